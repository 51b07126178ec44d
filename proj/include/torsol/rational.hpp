#pragma once

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/eigen.hpp>
#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

namespace torsol {

using Rational = boost::multiprecision::mpq_rational;
using BigInt = boost::multiprecision::mpz_int;

using IntVec = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;
using RatVec = Eigen::Matrix<Rational, Eigen::Dynamic, 1>;
using RatMat = Eigen::Matrix<Rational, Eigen::Dynamic, Eigen::Dynamic>;

inline RatVec to_rational(const IntVec& v) {
  RatVec r(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) r(i) = Rational(v(i));
  return r;
}

inline Eigen::VectorXd to_double(const RatVec& v) {
  Eigen::VectorXd r(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) r(i) = v(i).convert_to<double>();
  return r;
}

inline Eigen::VectorXd to_double(const IntVec& v) {
  Eigen::VectorXd r(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) r(i) = static_cast<double>(v(i));
  return r;
}

/// Exact determinant by fraction-free Gaussian elimination.
Rational rat_det(RatMat A);

/// Exact rank by Gaussian elimination.
int rat_rank(RatMat A);

/// Solve A x = b exactly; empty if A is singular.
std::optional<RatVec> rat_solve(RatMat A, RatVec b);

/// Nullspace basis vector of the m x n system A x = 0 with rank n-1
/// (any one-dimensional kernel representative); empty otherwise.
std::optional<RatVec> rat_kernel_vector(RatMat A);

inline bool lex_less(const RatVec& a, const RatVec& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a(i) < b(i)) return true;
    if (a(i) > b(i)) return false;
  }
  return false;
}

inline bool rat_vec_eq(const RatVec& a, const RatVec& b) {
  if (a.size() != b.size()) return false;
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (a(i) != b(i)) return false;
  return true;
}

}  // namespace torsol
