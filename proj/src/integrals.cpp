#include "torsol/integrals.hpp"

#include <cmath>
#include <stdexcept>

namespace torsol {

namespace {

// 8-point Gauss-Legendre nodes/weights on [0,1]
constexpr int kGaussOrder = 8;
constexpr double kGaussNode[kGaussOrder] = {
    0.01985507175123188416, 0.1016667612931866302, 0.2372337950418355071,
    0.4082826787521750975,  0.5917173212478249025, 0.7627662049581644929,
    0.8983332387068133698,  0.9801449282487681158};
constexpr double kGaussWeight[kGaussOrder] = {
    0.05061426814518812958, 0.1111905172266872353, 0.1568533229389436437,
    0.1813418916891809915,  0.1813418916891809915, 0.1568533229389436437,
    0.1111905172266872353,  0.05061426814518812958};

Rational simplex_volume(const Simplex& s, int n) {
  RatMat E(n, n);
  for (int c = 0; c < n; ++c) E.col(c) = s.verts[c + 1] - s.verts[0];
  Rational nfact(1);
  for (int k = 2; k <= n; ++k) nfact *= k;
  Rational v = rat_det(E) / nfact;
  return v < 0 ? -v : v;
}

struct DoubleSimplex {
  Eigen::VectorXd w0;
  Eigen::MatrixXd E;   // columns w_i - w_0
  double jac;          // |det E|
};

// accumulate the quadrature sums of one simplex at subdivision level
// (cells per axis), appending into (value, grad, hess) in a fixed order
void accumulate(const DoubleSimplex& sp, const Eigen::VectorXd& s, int cells,
                double& value, Eigen::VectorXd& grad, Eigen::MatrixXd& hess) {
  const int n = static_cast<int>(s.size());
  std::vector<int> cell(n, 0);
  std::vector<int> node(n, 0);
  Eigen::VectorXd u(n), xi(n), y(n);
  const double inv_cells = 1.0 / cells;

  // iterate cells lexicographically, then tensor nodes lexicographically
  while (true) {
    std::fill(node.begin(), node.end(), 0);
    while (true) {
      double wq = 1.0;
      for (int k = 0; k < n; ++k) {
        u(k) = (cell[k] + kGaussNode[node[k]]) * inv_cells;
        wq *= kGaussWeight[node[k]] * inv_cells;
      }
      // collapsed coordinates: xi_k = u_k * prod_{j<k} (1-u_j)
      double pre = 1.0;
      double jac_collapse = 1.0;
      for (int k = 0; k < n; ++k) {
        xi(k) = u(k) * pre;
        jac_collapse *= pre;
        pre *= (1.0 - u(k));
      }
      y = sp.w0 + sp.E * xi;
      const double f = std::exp(s.dot(y)) * sp.jac * jac_collapse * wq;
      value += f;
      grad.noalias() += f * y;
      hess.noalias() += f * (y * y.transpose());

      int k = n - 1;
      while (k >= 0 && ++node[k] == kGaussOrder) node[k--] = 0;
      if (k < 0) break;
    }
    int k = n - 1;
    while (k >= 0 && ++cell[k] == cells) cell[k--] = 0;
    if (k < 0) break;
  }
}

}  // namespace

Rational simplices_volume(const std::vector<Simplex>& tri, int dim) {
  Rational total(0);
  for (const auto& s : tri) total += simplex_volume(s, dim);
  return total;
}

Rational simplices_moment(const std::vector<Simplex>& tri, int dim, int axis) {
  if (axis < 1 || axis > dim) throw std::invalid_argument("moment axis out of range");
  Rational total(0);
  for (const auto& s : tri) {
    Rational vol = simplex_volume(s, dim);
    Rational centroid(0);
    for (const auto& v : s.verts) centroid += v(axis - 1);
    centroid /= Rational(dim + 1);
    total += vol * centroid;
  }
  return total;
}

ExpMomentResult simplices_exp_moment(const std::vector<Simplex>& tri, int dim,
                                     const Eigen::VectorXd& s, double tol) {
  if (tol <= 0) throw std::invalid_argument("exp_moment: tol must be positive");
  if (static_cast<int>(s.size()) != dim) throw std::invalid_argument("exp_moment: bad s size");

  std::vector<DoubleSimplex> prepared;
  prepared.reserve(tri.size());
  for (const auto& t : tri) {
    DoubleSimplex d;
    d.w0 = to_double(t.verts[0]);
    d.E.resize(dim, dim);
    for (int c = 0; c < dim; ++c) d.E.col(c) = to_double(t.verts[c + 1]) - d.w0;
    d.jac = std::abs(d.E.determinant());
    prepared.push_back(std::move(d));
  }

  const int max_level = dim <= 2 ? 8 : 5;
  ExpMomentResult prev, cur;
  for (int level = 0; level <= max_level; ++level) {
    cur.value = 0;
    cur.gradient = Eigen::VectorXd::Zero(dim);
    cur.hessian = Eigen::MatrixXd::Zero(dim, dim);
    const int cells = 1 << level;
    for (const auto& sp : prepared) accumulate(sp, s, cells, cur.value, cur.gradient, cur.hessian);

    if (level > 0) {
      double diff = std::abs(cur.value - prev.value);
      diff = std::max(diff, (cur.gradient - prev.gradient).cwiseAbs().maxCoeff());
      diff = std::max(diff, (cur.hessian - prev.hessian).cwiseAbs().maxCoeff());
      cur.est_error = diff / cur.value;
      if (cur.est_error < tol) {
        cur.converged = true;
        return cur;
      }
    }
    prev = cur;
  }
  cur.converged = false;
  return cur;  // best estimate with est_error from the last comparison
}

Rational volume(const DualPolytope& P) { return simplices_volume(P.triangulation, P.dim); }

Rational monomial_moment(const DualPolytope& P, int axis) {
  return simplices_moment(P.triangulation, P.dim, axis);
}

ExpMomentResult exp_moment(const DualPolytope& P, const Eigen::VectorXd& s, double tol) {
  return simplices_exp_moment(P.triangulation, P.dim, s, tol);
}

}  // namespace torsol
