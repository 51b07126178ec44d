#pragma once

#include "torsol/integrals.hpp"

namespace torsol {

struct SolitonVector {
  Eigen::VectorXd c;
  double residual_norm = 0;  // ||grad F(c)||
  int iterations = 0;
  bool converged = false;
  std::vector<double> f_trace;  // F along accepted iterates
};

/// Damped Newton minimization of F(s) = int_P e^{<s,y>} dy from s = 0.
/// Stops when ||grad F|| / vol(P) < tol.
SolitonVector solve_soliton_vector(const DualPolytope& P, double tol = 1e-10);

/// Exact rational test barycenter(P) == 0; no tolerance involved.
bool futaki_vanishes(const DualPolytope& P);

}  // namespace torsol
