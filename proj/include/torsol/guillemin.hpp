#pragma once

#include "torsol/polytope.hpp"

#include <Eigen/Dense>

namespace torsol {

struct U0Eval {
  double value = 0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

struct LegendreResult {
  Eigen::VectorXd y;       // moment image, strictly interior
  double value = 0;        // phi0(x)
  double grad_error = 0;   // ||Du0(y) - x|| achieved
  int iterations = 0;
  bool converged = false;
  bool at_floor = false;   // stopped at the double-representability floor
};

struct ScanRow {
  double radius = 0;
  double sup_lemma21 = 0;  // sup |log det D^2 phi0 + phi0| on the sphere
  double sup_lemma22 = 0;  // sup |phi0 - v| on the sphere
  double run_sup21 = 0;    // running maxima up to this radius
  double run_sup22 = 0;
};

struct ScanReport {
  std::vector<ScanRow> rows;
  double saturation21 = 0;  // sup at largest radius / overall sup
  double saturation22 = 0;
};

/// Evaluator bundle for the canonical symplectic potential
/// u0(y) = sum_i l_i log l_i on P and its Legendre transform phi0 on R^n.
class GuilleminPotential {
 public:
  explicit GuilleminPotential(const DualPolytope& P, double newton_tol = 1e-12);

  int dim() const { return dim_; }
  double newton_tol() const { return newton_tol_; }

  /// l_i(y) for all facets; any non-positive entry means y is not interior.
  Eigen::VectorXd lvals(const Eigen::VectorXd& y) const;

  /// Throws std::domain_error off the strict interior.
  U0Eval u0_eval(const Eigen::VectorXd& y) const;

  /// det D^2 u0 via the squared-determinant expansion over facet n-subsets.
  double det_hess_u0(const Eigen::VectorXd& y) const;

  /// Solve Du0(y) = x; phi0(x) = <x,y> - u0(y).
  LegendreResult legendre_phi0(const Eigen::VectorXd& x) const;

  /// Support function v(x) of P.
  double support(const Eigen::VectorXd& x) const;

  /// Sphere scan of the two boundedness quantities. Radii must be increasing;
  /// the same deterministic low-discrepancy direction set is reused at every
  /// radius so the running suprema are comparable.
  ScanReport lemma_scan(const std::vector<double>& radii, int samples_per_radius) const;

 private:
  int dim_;
  double newton_tol_;
  Eigen::MatrixXd normals_;        // d x n
  Eigen::MatrixXd dual_vertices_;  // m x n
  std::vector<std::pair<std::vector<int>, double>> binet_;  // n-subset, det^2
};

/// Deterministic low-discrepancy unit directions (golden-angle in 2-D,
/// Halton/Box-Muller otherwise).
std::vector<Eigen::VectorXd> low_discrepancy_directions(int dim, int count);

}  // namespace torsol
