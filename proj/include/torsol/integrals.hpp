#pragma once

#include "torsol/polytope.hpp"

#include <Eigen/Dense>

namespace torsol {

/// F(s) = int e^{<s,y>} dy with gradient int y e^{<s,y>} and hessian
/// int y y^T e^{<s,y>}; est_error is the last Richardson difference
/// (heuristic, not a bound).
struct ExpMomentResult {
  double value = 0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
  double est_error = 0;
  bool converged = false;
};

/// Exact sum of |det|/n! over the simplices.
Rational simplices_volume(const std::vector<Simplex>& tri, int dim);

/// Exact int y_axis dy (volume times centroid coordinate per simplex).
Rational simplices_moment(const std::vector<Simplex>& tri, int dim, int axis);

/// Tensorized Gauss-Legendre (order 8) on collapsed coordinates per simplex,
/// refined by uniform dyadic subdivision until the relative change of
/// value/gradient/hessian falls below tol.
ExpMomentResult simplices_exp_moment(const std::vector<Simplex>& tri, int dim,
                                     const Eigen::VectorXd& s, double tol = 1e-10);

Rational volume(const DualPolytope& P);

/// axis is 1-based to match the coordinate labels y^1..y^n.
Rational monomial_moment(const DualPolytope& P, int axis);

ExpMomentResult exp_moment(const DualPolytope& P, const Eigen::VectorXd& s, double tol = 1e-10);

}  // namespace torsol
