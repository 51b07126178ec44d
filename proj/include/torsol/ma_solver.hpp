#pragma once

#include "torsol/guillemin.hpp"
#include "torsol/integrals.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>

namespace torsol {

/// Uniform vertex-centered grid on [-R,R]^2 with the origin as a node.
struct Grid {
  double R = 0;
  int resolution = 0;  // nodes per axis, odd
  double h = 0;

  double coord(int i) const { return -R + h * i; }
  int center() const { return (resolution - 1) / 2; }
};

Grid build_grid(double R, int resolution);

struct ContinuityState {
  double t = 0;
  Eigen::MatrixXd phi;      // resolution x resolution, row i ~ x1, col j ~ x2
  Eigen::Vector2d c_vec = Eigen::Vector2d::Zero();
  double m_t = 0;           // min over nodes of w_t
  Eigen::Vector2d x_t = Eigen::Vector2d::Zero();  // argmin node of w_t
  double sup_phi_minus_phi0 = 0;
  double inf_phi_minus_phi0 = 0;
  double residual_norm = 0;  // sup norm of the log-form residual
  int newton_iters = 0;
  double normalization_shift = 0;  // additive shift making the beta identity hold
};

struct ContinuitySchedule {
  double t_start = 0.3;
  double t_step = 0.05;
  double newton_tol = 1e-9;
};

struct NewtonOutcome {
  Eigen::MatrixXd phi;
  int iterations = 0;
  double residual_sup = 0;
  bool converged = false;
};

struct VerificationReport {
  double residual_sup = 0;
  double min_det = 0;
  double containment_margin = 0;  // min over interior nodes of min_i l_i(D_h phi)
  double beta_box = 0;            // int_box e^{-w}
  double beta_target = 0;         // e^c int_P e^{<c_vec,y>} dy
  double beta_rel_err = 0;
  double normalization_shift = 0;
  double boundary_distance = 0;   // a0 = inf |y| over y on the facet planes of P
  bool residual_ok = false;
  bool convex_ok = false;
  bool containment_ok = false;
};

/// Log-form residual log det(D2_h phi) + c + w_t + <c_vec, D_h phi> on the
/// interior nodes (9-point Hessian, central first differences).
/// Throws std::domain_error when the discrete determinant is non-positive.
Eigen::MatrixXd residual_field(const Grid& g, const Eigen::MatrixXd& phi,
                               const Eigen::MatrixXd& phi0, double t,
                               const Eigen::Vector2d& c_vec, double c = 0.0);

/// det(D2_h phi) - e^{-c - w_t - <c_vec, D_h phi>}; defined for any field.
Eigen::MatrixXd primal_residual_field(const Grid& g, const Eigen::MatrixXd& phi,
                                      const Eigen::MatrixXd& phi0, double t,
                                      const Eigen::Vector2d& c_vec, double c = 0.0);

/// Damped Newton with discrete-convexity line search; the boundary ring of
/// `init` is held fixed. Falls back to a smoothed-eigenvalue continuation
/// when the initial field is not discretely convex.
NewtonOutcome solve_at_t(const Grid& g, const Eigen::MatrixXd& init,
                         const Eigen::MatrixXd& phi0, double t,
                         const Eigen::Vector2d& c_vec, double tol, int max_iter = 50);

/// phi0 sampled on the grid by warm-started Legendre inversion.
Eigen::MatrixXd phi0_on_grid(const GuilleminPotential& G, const Grid& g);

/// March t from schedule.t_start to 1, warm-starting each solve. Boundary
/// data is phi0 + c0/t where c0 cancels the mean far-field residual of phi0.
/// on_step, when set, is invoked after every converged step.
std::vector<ContinuityState> continuity_solve(
    const DualPolytope& P, const GuilleminPotential& G, const Grid& g,
    const Eigen::Vector2d& c_vec, const ContinuitySchedule& schedule,
    const std::function<void(const ContinuityState&)>& on_step = {},
    std::optional<ContinuityState> resume_from = std::nullopt);

VerificationReport verify_solution(const ContinuityState& state, const DualPolytope& P,
                                   const Grid& g, const Eigen::MatrixXd& phi0, double tol);

/// Closed-form reference potential on the anticanonical CP^2 polytope:
/// 3 log(1+e^{x1}+e^{x2}) - x1 - x2 - log 9, satisfying det D^2 phi = e^{-phi}.
double cp2_reference_potential(double x1, double x2);

}  // namespace torsol
