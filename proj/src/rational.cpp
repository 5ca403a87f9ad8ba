#include "kstab/rational.hpp"

#include <algorithm>
#include <stdexcept>

namespace kstab {

double rat_to_double(const Rat& r) { return r.convert_to<double>(); }

Rat rat_from_double(double x) {
  mpq_t q;
  mpq_init(q);
  mpq_set_d(q, x);
  Rat r(q);
  mpq_clear(q);
  return r;
}

Rat parse_rational(const std::string& s) {
  if (s.empty()) throw std::invalid_argument("empty rational literal");
  auto slash = s.find('/');
  auto check_int = [](const std::string& t) {
    if (t.empty()) return false;
    std::size_t i = (t[0] == '-' || t[0] == '+') ? 1 : 0;
    if (i == t.size()) return false;
    for (; i < t.size(); ++i)
      if (t[i] < '0' || t[i] > '9') return false;
    return true;
  };
  if (slash == std::string::npos) {
    if (!check_int(s)) throw std::invalid_argument("malformed rational: " + s);
    return Rat(Int(s));
  }
  std::string num = s.substr(0, slash), den = s.substr(slash + 1);
  if (!check_int(num) || !check_int(den))
    throw std::invalid_argument("malformed rational: " + s);
  Int d(den);
  if (d == 0) throw std::invalid_argument("zero denominator: " + s);
  return Rat(Int(num), d);
}

std::string rational_to_string(const Rat& r) {
  Int num = numerator(r), den = denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

Int int_lcm(const Int& a, const Int& b) {
  if (a == 0 || b == 0) return 0;
  Int g = boost::multiprecision::gcd(a, b);
  return boost::multiprecision::abs(a / g * b);
}

Int denominator_lcm(const RVec& v) {
  Int l = 1;
  for (Eigen::Index i = 0; i < v.size(); ++i) l = int_lcm(l, denominator(v(i)));
  return l;
}

std::vector<RVec> sorted_lex(std::vector<RVec> pts) {
  std::sort(pts.begin(), pts.end(), [](const RVec& a, const RVec& b) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      if (a(i) != b(i)) return a(i) < b(i);
    }
    return false;
  });
  return pts;
}

RVec make_rvec(std::initializer_list<Rat> entries) {
  RVec v(static_cast<Eigen::Index>(entries.size()));
  Eigen::Index i = 0;
  for (const Rat& e : entries) v(i++) = e;
  return v;
}

RVec lagrange_interpolate(const std::vector<Rat>& xs, const std::vector<Rat>& ys) {
  const int m = static_cast<int>(xs.size());
  if (m == 0 || ys.size() != xs.size())
    throw std::invalid_argument("interpolation needs matching nonempty node and value lists");
  // Accumulate ys[i] * prod_{j != i} (x - xs[j]) / (xs[i] - xs[j]) in
  // coefficient form.
  RVec coeffs = RVec::Zero(m);
  for (int i = 0; i < m; ++i) {
    RVec basis = RVec::Zero(m);
    basis(0) = 1;
    int deg = 0;
    Rat denom = 1;
    for (int j = 0; j < m; ++j) {
      if (j == i) continue;
      if (xs[i] == xs[j]) throw std::invalid_argument("interpolation nodes must be distinct");
      denom *= xs[i] - xs[j];
      // basis *= (x - xs[j])
      for (int d = deg + 1; d >= 1; --d) basis(d) = basis(d - 1) - xs[j] * basis(d);
      basis(0) *= -xs[j];
      ++deg;
    }
    coeffs += RVec(basis * (ys[i] / denom));
  }
  return coeffs;
}

Rat poly_eval(const RVec& coeffs, const Rat& x) {
  Rat v = 0;
  for (Eigen::Index d = coeffs.size() - 1; d >= 0; --d) v = v * x + coeffs(d);
  return v;
}

}  // namespace kstab
