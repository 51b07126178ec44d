#include "torsol/soliton.hpp"

#include <stdexcept>

namespace torsol {

SolitonVector solve_soliton_vector(const DualPolytope& P, double tol) {
  if (tol <= 0) throw std::invalid_argument("solve_soliton_vector: tol must be positive");
  const int n = P.dim;
  const double vol = volume(P).convert_to<double>();
  const double quad_tol = tol / 100.0;
  const int max_iter = 100;

  SolitonVector out;
  out.c = Eigen::VectorXd::Zero(n);

  ExpMomentResult m = exp_moment(P, out.c, quad_tol);
  out.f_trace.push_back(m.value);
  out.residual_norm = m.gradient.norm();

  for (int it = 0; it < max_iter; ++it) {
    if (out.residual_norm / vol < tol) {
      out.converged = true;
      out.iterations = it;
      return out;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(m.hessian);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("soliton solve: hessian not positive definite");
    Eigen::VectorXd step = llt.solve(-m.gradient);

    // Armijo backtracking on F
    const double slope = m.gradient.dot(step);
    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      Eigen::VectorXd trial = out.c + alpha * step;
      ExpMomentResult mt = exp_moment(P, trial, quad_tol);
      if (mt.value <= m.value + 1e-4 * alpha * slope) {
        out.c = trial;
        m = mt;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {  // line-search stagnation: report best iterate
      out.iterations = it + 1;
      out.residual_norm = m.gradient.norm();
      out.converged = false;
      return out;
    }
    out.f_trace.push_back(m.value);
    out.residual_norm = m.gradient.norm();
    out.iterations = it + 1;
  }
  out.converged = out.residual_norm / vol < tol;
  return out;
}

bool futaki_vanishes(const DualPolytope& P) {
  RatVec b = barycenter(P);
  for (Eigen::Index i = 0; i < b.size(); ++i)
    if (b(i) != 0) return false;
  return true;
}

}  // namespace torsol
