#include "torsol/guillemin.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace torsol {

namespace {

void subsets_rec(int start, int need, int total, std::vector<int>& cur,
                 const std::function<void(const std::vector<int>&)>& fn) {
  if (need == 0) {
    fn(cur);
    return;
  }
  for (int i = start; i + need <= total; ++i) {
    cur.push_back(i);
    subsets_rec(i + 1, need - 1, total, cur, fn);
    cur.pop_back();
  }
}

double halton(int index, int base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * (index % base);
    index /= base;
  }
  return r;
}

}  // namespace

GuilleminPotential::GuilleminPotential(const DualPolytope& P, double newton_tol)
    : dim_(P.dim), newton_tol_(newton_tol) {
  const int d = static_cast<int>(P.facet_normals.size());
  normals_.resize(d, dim_);
  for (int i = 0; i < d; ++i)
    for (int c = 0; c < dim_; ++c) normals_(i, c) = static_cast<double>(P.facet_normals[i](c));

  dual_vertices_.resize(static_cast<int>(P.vertices.size()), dim_);
  for (std::size_t k = 0; k < P.vertices.size(); ++k)
    dual_vertices_.row(static_cast<int>(k)) = to_double(P.vertices[k]).transpose();

  // squared determinants of facet-normal n-subsets, exact then cast
  std::vector<int> cur;
  subsets_rec(0, dim_, d, cur, [&](const std::vector<int>& idx) {
    RatMat M(dim_, dim_);
    for (int r = 0; r < dim_; ++r)
      for (int c = 0; c < dim_; ++c) M(r, c) = Rational(P.facet_normals[idx[r]](c));
    Rational det = rat_det(M);
    if (det == 0) return;
    Rational det2 = det * det;
    binet_.emplace_back(idx, det2.convert_to<double>());
  });
}

Eigen::VectorXd GuilleminPotential::lvals(const Eigen::VectorXd& y) const {
  return (normals_ * y).array() + 1.0;
}

U0Eval GuilleminPotential::u0_eval(const Eigen::VectorXd& y) const {
  Eigen::VectorXd l = lvals(y);
  if ((l.array() <= 0).any()) throw std::domain_error("u0_eval: point not strictly interior");
  U0Eval out;
  out.gradient = Eigen::VectorXd::Zero(dim_);
  out.hessian = Eigen::MatrixXd::Zero(dim_, dim_);
  for (int i = 0; i < l.size(); ++i) {
    const double li = l(i);
    const double logl = std::log(li);
    out.value += li * logl;
    out.gradient += (1.0 + logl) * normals_.row(i).transpose();
    out.hessian.noalias() += normals_.row(i).transpose() * normals_.row(i) / li;
  }
  return out;
}

double GuilleminPotential::det_hess_u0(const Eigen::VectorXd& y) const {
  Eigen::VectorXd l = lvals(y);
  if ((l.array() <= 0).any()) throw std::domain_error("det_hess_u0: point not strictly interior");
  double acc = 0;
  for (const auto& [idx, det2] : binet_) {
    double prod = 1.0;
    for (int i : idx) prod *= l(i);
    acc += det2 / prod;
  }
  return acc;
}

LegendreResult GuilleminPotential::legendre_phi0(const Eigen::VectorXd& x) const {
  LegendreResult res;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(dim_);  // l_i(0) = 1, always interior
  const int max_iter = 400;
  const double eps = std::numeric_limits<double>::epsilon();
  const double xscale = 1.0 + x.norm();

  Eigen::VectorXd best_y = y;
  double best_err = std::numeric_limits<double>::infinity();
  int stagnation = 0;

  for (int it = 0; it < max_iter; ++it) {
    U0Eval u = u0_eval(y);
    Eigen::VectorXd g = u.gradient - x;
    const double err = g.norm();
    res.iterations = it;
    if (err < best_err) {
      if (err < 0.5 * best_err) stagnation = 0;
      best_err = err;
      best_y = y;
    } else {
      ++stagnation;
    }
    if (err <= newton_tol_ * xscale) {
      res.converged = true;
      best_y = y;
      best_err = err;
      break;
    }
    // gradient quantization scale: one ulp of y moves Du0 by about |H| ulp(y)
    const double kappa =
        u.hessian.cwiseAbs().rowwise().sum().maxCoeff() * eps * (1.0 + y.norm());
    if (stagnation >= 40) {
      if (best_err <= 64.0 * kappa) {
        res.converged = true;
        res.at_floor = true;  // double grid cannot represent a closer point
        break;
      }
      throw std::runtime_error("legendre_phi0: Newton did not converge (grad error " +
                               std::to_string(best_err) + ")");
    }

    Eigen::VectorXd step = Eigen::LDLT<Eigen::MatrixXd>(u.hessian).solve(-g);

    // fraction-to-the-boundary: no l_i may shrink by more than half
    Eigen::VectorXd l = lvals(y);
    Eigen::VectorXd dl = normals_ * step;
    double alpha = 1.0;
    for (int i = 0; i < l.size(); ++i)
      if (dl(i) < 0) alpha = std::min(alpha, -0.5 * l(i) / dl(i));

    Eigen::VectorXd ynew = y + alpha * step;
    int guard = 0;
    while ((lvals(ynew).array() <= 0).any() && guard++ < 60) {
      alpha *= 0.5;
      ynew = y + alpha * step;
    }
    const double moved = (ynew - y).norm();
    y = ynew;
    if (moved <= 8 * eps * (1.0 + y.norm()) && best_err <= 64.0 * kappa) {
      res.converged = true;
      res.at_floor = true;
      break;
    }
  }
  if (!res.converged)
    throw std::runtime_error("legendre_phi0: iteration cap reached (grad error " +
                             std::to_string(best_err) + ")");
  res.y = best_y;
  res.grad_error = best_err;
  Eigen::VectorXd l = lvals(best_y);
  double phi0 = -static_cast<double>(l.size());
  for (int i = 0; i < l.size(); ++i) phi0 += l(i) - std::log(l(i));
  res.value = phi0;
  return res;
}

double GuilleminPotential::support(const Eigen::VectorXd& x) const {
  return (dual_vertices_ * x).maxCoeff();
}

std::vector<Eigen::VectorXd> low_discrepancy_directions(int dim, int count) {
  std::vector<Eigen::VectorXd> dirs;
  dirs.reserve(count);
  if (dim == 1) {
    for (int j = 0; j < count; ++j) {
      Eigen::VectorXd d(1);
      d(0) = (j % 2 == 0) ? 1.0 : -1.0;
      dirs.push_back(d);
    }
    return dirs;
  }
  if (dim == 2) {
    const double golden = 0.6180339887498949;
    for (int j = 1; j <= count; ++j) {
      double theta = 2.0 * M_PI * std::fmod(j * golden, 1.0);
      Eigen::VectorXd d(2);
      d << std::cos(theta), std::sin(theta);
      dirs.push_back(d);
    }
    return dirs;
  }
  // Halton points mapped through Box-Muller, then normalized
  static const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19};
  const int pairs = (dim + 1) / 2;
  for (int j = 1; j <= count; ++j) {
    Eigen::VectorXd d(dim);
    for (int p = 0; p < pairs; ++p) {
      double u1 = std::max(halton(j, primes[(2 * p) % 8]), 1e-12);
      double u2 = halton(j, primes[(2 * p + 1) % 8]);
      double r = std::sqrt(-2.0 * std::log(u1));
      double g1 = r * std::cos(2.0 * M_PI * u2);
      double g2 = r * std::sin(2.0 * M_PI * u2);
      d(2 * p) = g1;
      if (2 * p + 1 < dim) d(2 * p + 1) = g2;
    }
    if (d.norm() < 1e-12) d.setOnes();
    dirs.push_back(d.normalized());
  }
  return dirs;
}

ScanReport GuilleminPotential::lemma_scan(const std::vector<double>& radii,
                                          int samples_per_radius) const {
  for (std::size_t i = 1; i < radii.size(); ++i)
    if (!(radii[i] > radii[i - 1])) throw std::invalid_argument("lemma_scan: radii must increase");

  auto dirs = low_discrepancy_directions(dim_, samples_per_radius);
  ScanReport rep;
  double run21 = 0, run22 = 0;

  for (double R : radii) {
    ScanRow row;
    row.radius = R;
    for (const auto& d : dirs) {
      Eigen::VectorXd x = R * d;
      LegendreResult lr = legendre_phi0(x);
      // evaluate at the achieved gradient image so the pair (x_hat, y) is
      // exactly Legendre-matched even at the representability floor
      U0Eval u = u0_eval(lr.y);
      const Eigen::VectorXd& xhat = u.gradient;
      double phi0 = xhat.dot(lr.y) - u.value;
      double q21 = std::abs(-std::log(det_hess_u0(lr.y)) + phi0);
      double q22 = std::abs(phi0 - support(xhat));
      row.sup_lemma21 = std::max(row.sup_lemma21, q21);
      row.sup_lemma22 = std::max(row.sup_lemma22, q22);
    }
    run21 = std::max(run21, row.sup_lemma21);
    run22 = std::max(run22, row.sup_lemma22);
    row.run_sup21 = run21;
    row.run_sup22 = run22;
    rep.rows.push_back(row);
  }
  if (!rep.rows.empty() && run21 > 0) rep.saturation21 = rep.rows.back().sup_lemma21 / run21;
  if (!rep.rows.empty() && run22 > 0) rep.saturation22 = rep.rows.back().sup_lemma22 / run22;
  return rep;
}

}  // namespace torsol
