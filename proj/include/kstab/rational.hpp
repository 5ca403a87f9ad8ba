#ifndef KSTAB_RATIONAL_HPP
#define KSTAB_RATIONAL_HPP

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/eigen.hpp>
#include <Eigen/Dense>

#include <string>
#include <vector>

namespace kstab {

// All geometry and spectra are exact rationals; doubles appear only in
// final norm values (p-th roots) and in the optimizer.
using Rat = boost::multiprecision::mpq_rational;
using Int = boost::multiprecision::mpz_int;

using RVec = Eigen::Matrix<Rat, Eigen::Dynamic, 1>;
using RMat = Eigen::Matrix<Rat, Eigen::Dynamic, Eigen::Dynamic>;
using IVec = Eigen::Matrix<long long, Eigen::Dynamic, 1>;
// Lattice point sets: one point per row.
using IMat = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline Int numerator(const Rat& r) { return boost::multiprecision::numerator(r); }
inline Int denominator(const Rat& r) { return boost::multiprecision::denominator(r); }

inline Rat rat_abs(const Rat& r) { return r < 0 ? Rat(-r) : r; }

double rat_to_double(const Rat& r);

/// Exact conversion; every IEEE double is a dyadic rational.
Rat rat_from_double(double x);

/// Parses "p/q", "p", or "-p/q". Throws std::invalid_argument on malformed input.
Rat parse_rational(const std::string& s);

/// Canonical "p/q" form ("p" when the denominator is 1).
std::string rational_to_string(const Rat& r);

Int int_lcm(const Int& a, const Int& b);

/// lcm of the denominators of all entries.
Int denominator_lcm(const RVec& v);

std::vector<RVec> sorted_lex(std::vector<RVec> pts);

RVec make_rvec(std::initializer_list<Rat> entries);

/// Coefficients (index = power) of the unique degree <= m-1 polynomial
/// through m distinct nodes, solved exactly.
RVec lagrange_interpolate(const std::vector<Rat>& xs, const std::vector<Rat>& ys);

/// Evaluates a coefficient vector (index = power) at x.
Rat poly_eval(const RVec& coeffs, const Rat& x);

}  // namespace kstab

#endif
