#include "torsol/ma_solver.hpp"

#include <Eigen/Sparse>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

namespace torsol {

namespace {

struct HessParts {
  Eigen::MatrixXd pxx, pyy, pxy, px, py, w_plus_adv;
};

HessParts stencil_parts(const Grid& g, const Eigen::MatrixXd& phi, const Eigen::MatrixXd& phi0,
                        double t, const Eigen::Vector2d& c_vec) {
  const int n = g.resolution;
  const int m = n - 2;
  const double h = g.h, h2 = h * h;
  HessParts out;
  out.pxx.resize(m, m);
  out.pyy.resize(m, m);
  out.pxy.resize(m, m);
  out.px.resize(m, m);
  out.py.resize(m, m);
  out.w_plus_adv.resize(m, m);
  for (int i = 1; i < n - 1; ++i) {
    for (int j = 1; j < n - 1; ++j) {
      const double c = phi(i, j);
      out.pxx(i - 1, j - 1) = (phi(i + 1, j) - 2 * c + phi(i - 1, j)) / h2;
      out.pyy(i - 1, j - 1) = (phi(i, j + 1) - 2 * c + phi(i, j - 1)) / h2;
      out.pxy(i - 1, j - 1) =
          (phi(i + 1, j + 1) - phi(i + 1, j - 1) - phi(i - 1, j + 1) + phi(i - 1, j - 1)) /
          (4 * h2);
      out.px(i - 1, j - 1) = (phi(i + 1, j) - phi(i - 1, j)) / (2 * h);
      out.py(i - 1, j - 1) = (phi(i, j + 1) - phi(i, j - 1)) / (2 * h);
      out.w_plus_adv(i - 1, j - 1) = t * c + (1.0 - t) * phi0(i, j) +
                                     c_vec(0) * out.px(i - 1, j - 1) +
                                     c_vec(1) * out.py(i - 1, j - 1);
    }
  }
  return out;
}

bool convexity_ok(const HessParts& p) {
  return (p.pxx.array() > 0).all() &&
         ((p.pxx.array() * p.pyy.array() - p.pxy.array().square()) > 0).all();
}

// smooth eigenvalue floor: lam -> (lam + sqrt(lam^2 + 4 delta^2)) / 2
Eigen::MatrixXd smooth_residual(const HessParts& p, double c, double theta) {
  Eigen::ArrayXXd mid = (p.pxx.array() + p.pyy.array()) / 2;
  Eigen::ArrayXXd rad =
      (((p.pxx.array() - p.pyy.array()) / 2).square() + p.pxy.array().square()).sqrt();
  Eigen::ArrayXXd lm = mid - rad, lp = mid + rad;
  Eigen::ArrayXXd delta = theta * (-(p.w_plus_adv.array() + c).min(600.0) / 2).exp();
  auto flo = [&](const Eigen::ArrayXXd& l) {
    return ((l + (l.square() + 4 * delta.square()).sqrt()) / 2).log();
  };
  return (flo(lm) + flo(lp) + p.w_plus_adv.array() + c).matrix();
}

struct JacCoeffs {
  Eigen::ArrayXXd a11, a22, a12;  // d residual / d(pxx), d(pyy), d(pxy)
};

JacCoeffs exact_coeffs(const HessParts& p) {
  JacCoeffs c;
  Eigen::ArrayXXd det = p.pxx.array() * p.pyy.array() - p.pxy.array().square();
  c.a11 = p.pyy.array() / det;
  c.a22 = p.pxx.array() / det;
  c.a12 = -2.0 * p.pxy.array() / det;
  return c;
}

JacCoeffs smooth_coeffs(const HessParts& p, double cconst, double theta) {
  JacCoeffs c;
  Eigen::ArrayXXd diff = (p.pxx.array() - p.pyy.array()) / 2;
  Eigen::ArrayXXd rad = (diff.square() + p.pxy.array().square()).sqrt().max(1e-300);
  Eigen::ArrayXXd mid = (p.pxx.array() + p.pyy.array()) / 2;
  Eigen::ArrayXXd lm = mid - rad, lp = mid + rad;
  Eigen::ArrayXXd delta = theta * (-(p.w_plus_adv.array() + cconst).min(600.0) / 2).exp();
  auto dlog_floor = [&](const Eigen::ArrayXXd& l) {
    Eigen::ArrayXXd s = (l.square() + 4 * delta.square()).sqrt();
    return ((1.0 + l / s) / 2) / ((l + s) / 2);
  };
  Eigen::ArrayXXd gm = dlog_floor(lm), gp = dlog_floor(lp);
  Eigen::ArrayXXd dm_dxx = (1.0 - diff / rad) / 2, dp_dxx = (1.0 + diff / rad) / 2;
  Eigen::ArrayXXd dm_dxy = -p.pxy.array() / rad, dp_dxy = p.pxy.array() / rad;
  c.a11 = gm * dm_dxx + gp * dp_dxx;
  c.a22 = gm * (1.0 - dm_dxx) + gp * (1.0 - dp_dxx);
  c.a12 = gm * dm_dxy + gp * dp_dxy;
  return c;
}

Eigen::SparseMatrix<double> assemble_jacobian(const Grid& g, const JacCoeffs& c, double t,
                                              const Eigen::Vector2d& c_vec) {
  const int n = g.resolution, m = n - 2;
  const double h = g.h, h2 = h * h;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(m) * m * 9);
  auto idx = [m](int i, int j) { return (i - 1) * m + (j - 1); };
  for (int i = 1; i < n - 1; ++i) {
    for (int j = 1; j < n - 1; ++j) {
      const int k = idx(i, j);
      const double A = c.a11(i - 1, j - 1), B = c.a22(i - 1, j - 1), C = c.a12(i - 1, j - 1);
      auto add = [&](int ii, int jj, double v) {
        if (ii > 0 && ii < n - 1 && jj > 0 && jj < n - 1) trip.emplace_back(k, idx(ii, jj), v);
      };
      add(i, j, -2 * (A + B) / h2 + t);
      add(i + 1, j, A / h2 + c_vec(0) / (2 * h));
      add(i - 1, j, A / h2 - c_vec(0) / (2 * h));
      add(i, j + 1, B / h2 + c_vec(1) / (2 * h));
      add(i, j - 1, B / h2 - c_vec(1) / (2 * h));
      const double D = C / (4 * h2);
      add(i + 1, j + 1, D);
      add(i - 1, j - 1, D);
      add(i + 1, j - 1, -D);
      add(i - 1, j + 1, -D);
    }
  }
  Eigen::SparseMatrix<double> J(m * m, m * m);
  J.setFromTriplets(trip.begin(), trip.end());
  return J;
}

}  // namespace

Grid build_grid(double R, int resolution) {
  if (!(R > 0)) throw std::invalid_argument("build_grid: R must be positive");
  if (resolution < 33) throw std::invalid_argument("build_grid: resolution must be >= 33");
  if (resolution % 2 == 0) throw std::invalid_argument("build_grid: resolution must be odd");
  Grid g;
  g.R = R;
  g.resolution = resolution;
  g.h = 2.0 * R / (resolution - 1);
  return g;
}

Eigen::MatrixXd residual_field(const Grid& g, const Eigen::MatrixXd& phi,
                               const Eigen::MatrixXd& phi0, double t,
                               const Eigen::Vector2d& c_vec, double c) {
  HessParts p = stencil_parts(g, phi, phi0, t, c_vec);
  Eigen::ArrayXXd det = p.pxx.array() * p.pyy.array() - p.pxy.array().square();
  if ((det <= 0).any() || (p.pxx.array() <= 0).any())
    throw std::domain_error("residual_field: discrete convexity breach");
  return (det.log() + p.w_plus_adv.array() + c).matrix();
}

Eigen::MatrixXd primal_residual_field(const Grid& g, const Eigen::MatrixXd& phi,
                                      const Eigen::MatrixXd& phi0, double t,
                                      const Eigen::Vector2d& c_vec, double c) {
  HessParts p = stencil_parts(g, phi, phi0, t, c_vec);
  Eigen::ArrayXXd det = p.pxx.array() * p.pyy.array() - p.pxy.array().square();
  return (det - (-(p.w_plus_adv.array() + c)).exp()).matrix();
}

namespace {

class NewtonDriver {
 public:
  NewtonDriver(const Grid& g, const Eigen::MatrixXd& phi0, double t,
               const Eigen::Vector2d& c_vec)
      : g_(g), phi0_(phi0), t_(t), c_vec_(c_vec) {}

  // Damped Newton on r(phi) - defect with convexity-preserving line search.
  // Smoothed-eigenvalue stages engage automatically when the iterate is not
  // discretely convex. Returns true when the exact residual meets tol.
  bool run(Eigen::MatrixXd& phi, const Eigen::MatrixXd& defect, double tol, int max_iter,
           int& iters, double& residual_sup, bool force_smooth = false) {
    const double thetas[] = {1e-1, 1e-2, 1e-3, 1e-4, 0.0};
    int stage = 4;
    if (force_smooth) {
      stage = 0;
    } else {
      HessParts p = stencil_parts(g_, phi, phi0_, t_, c_vec_);
      if (!convexity_ok(p)) stage = 0;
    }
    bool stalled_at_floor = false;
    for (; stage < 5; ++stage) {
      const bool exact = thetas[stage] == 0.0;
      const double stage_tol = exact ? tol : 1e-7;
      for (int it = 0; it < max_iter; ++it) {
        HessParts p = stencil_parts(g_, phi, phi0_, t_, c_vec_);
        const bool cvx = convexity_ok(p);
        if (exact && !cvx) return false;
        Eigen::MatrixXd r = (exact ? exact_residual(p) : smooth_residual(p, 0.0, thetas[stage]));
        r -= defect;
        residual_sup = r.cwiseAbs().maxCoeff();
        if (residual_sup < stage_tol) break;

        JacCoeffs jc = exact ? exact_coeffs(p) : smooth_coeffs(p, 0.0, thetas[stage]);
        Eigen::SparseMatrix<double> J = assemble_jacobian(g_, jc, t_, c_vec_);
        if (!pattern_done_) {
          lu_.analyzePattern(J);
          pattern_done_ = true;
        }
        lu_.factorize(J);
        if (lu_.info() != Eigen::Success) return false;
        const int m = g_.resolution - 2;
        Eigen::VectorXd rhs(m * m);
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < m; ++j) rhs(i * m + j) = -r(i, j);
        Eigen::VectorXd delta = lu_.solve(rhs);

        const double r2 = r.norm();
        double alpha = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 50; ++ls) {
          Eigen::MatrixXd trial = phi;
          for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) trial(i + 1, j + 1) += alpha * delta(i * m + j);
          HessParts pt = stencil_parts(g_, trial, phi0_, t_, c_vec_);
          Eigen::MatrixXd rt;
          if (exact) {
            if (!convexity_ok(pt)) {
              alpha *= 0.5;
              continue;
            }
            rt = exact_residual(pt);
          } else {
            rt = smooth_residual(pt, 0.0, thetas[stage]);
          }
          rt -= defect;
          if (rt.norm() < r2) {
            phi = trial;
            accepted = true;
            break;
          }
          alpha *= 0.5;
        }
        ++iters;
        if (std::getenv("TORSOL_TRACE"))
          std::fprintf(stderr, "  [newton t=%.3f stage=%d it=%d] sup=%.3e 2norm=%.3e alpha=%.3e accepted=%d\n",
                       t_, stage, it, residual_sup, r2, alpha, accepted ? 1 : 0);
        if (!accepted) {
          if (exact) {
            // line-search floor of double precision: accept a near-tol stall
            stalled_at_floor = residual_sup < 50 * tol;
            if (!stalled_at_floor) return false;
          }
          break;
        }
      }
    }
    HessParts p = stencil_parts(g_, phi, phi0_, t_, c_vec_);
    if (!convexity_ok(p)) return false;
    residual_sup = (exact_residual(p) - defect).cwiseAbs().maxCoeff();
    return residual_sup < tol || stalled_at_floor;
  }

 private:
  static Eigen::MatrixXd exact_residual(const HessParts& p) {
    Eigen::ArrayXXd det = p.pxx.array() * p.pyy.array() - p.pxy.array().square();
    return (det.log() + p.w_plus_adv.array()).matrix();
  }

  const Grid& g_;
  const Eigen::MatrixXd& phi0_;
  double t_;
  Eigen::Vector2d c_vec_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
  bool pattern_done_ = false;
};

}  // namespace

NewtonOutcome solve_at_t(const Grid& g, const Eigen::MatrixXd& init, const Eigen::MatrixXd& phi0,
                         double t, const Eigen::Vector2d& c_vec, double tol, int max_iter) {
  NewtonOutcome out;
  out.phi = init;
  NewtonDriver driver(g, phi0, t, c_vec);
  Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(g.resolution - 2, g.resolution - 2);

  if (driver.run(out.phi, zero, tol, max_iter, out.iterations, out.residual_sup)) {
    out.converged = true;
    return out;
  }

  // smoothed-eigenvalue cascade: Newton on the floored residual tolerates
  // transiently non-convex iterates and walks through the thin feasible
  // region that blocks the exact-phase line search
  out.phi = init;
  {
    int it = 0;
    double rs = 0;
    if (driver.run(out.phi, zero, tol, max_iter, it, rs, /*force_smooth=*/true)) {
      out.iterations += it;
      out.residual_sup = rs;
      out.converged = true;
      return out;
    }
    out.iterations += it;
  }

  // defect continuation: r(phi) = (1 - lambda) r(init), lambda 0 -> 1.
  // The initial field solves lambda = 0 exactly; march with adaptive steps.
  out.phi = init;
  HessParts p0 = stencil_parts(g, init, phi0, t, c_vec);
  Eigen::MatrixXd defect0 =
      convexity_ok(p0)
          ? Eigen::MatrixXd((p0.pxx.array() * p0.pyy.array() - p0.pxy.array().square()).log() +
                            p0.w_plus_adv.array())
          : smooth_residual(p0, 0.0, 1e-4);

  double lambda = 0.0, dlam = 0.25;
  while (lambda < 1.0) {
    const double target = std::min(1.0, lambda + dlam);
    Eigen::MatrixXd trial = out.phi;
    int it = 0;
    double rs = 0;
    const double stage_tol = target >= 1.0 ? tol : std::max(tol, 1e-8);
    if (driver.run(trial, Eigen::MatrixXd((1.0 - target) * defect0), stage_tol, max_iter, it,
                   rs)) {
      out.phi = trial;
      out.iterations += it;
      out.residual_sup = rs;
      lambda = target;
    } else {
      out.iterations += it;
      dlam /= 2;
      if (dlam < 1.0 / 64) {
        out.converged = false;
        return out;
      }
    }
  }
  out.converged = true;
  return out;
}

Eigen::MatrixXd phi0_on_grid(const GuilleminPotential& G, const Grid& g) {
  const int n = g.resolution;
  Eigen::MatrixXd f(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      Eigen::VectorXd x(2);
      x << g.coord(i), g.coord(j);
      f(i, j) = G.legendre_phi0(x).value;
    }
  }
  return f;
}

namespace {

ContinuityState make_state(const Grid& g, const Eigen::MatrixXd& phi, const Eigen::MatrixXd& phi0,
                           double t, const Eigen::Vector2d& c_vec, double residual_sup,
                           int iters) {
  ContinuityState st;
  st.t = t;
  st.phi = phi;
  st.c_vec = c_vec;
  st.residual_norm = residual_sup;
  st.newton_iters = iters;

  const int n = g.resolution;
  st.m_t = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double w = t * phi(i, j) + (1.0 - t) * phi0(i, j);
      if (w < st.m_t) {
        st.m_t = w;
        st.x_t << g.coord(i), g.coord(j);
      }
    }
  }
  Eigen::MatrixXd d = phi - phi0;
  st.sup_phi_minus_phi0 = d.maxCoeff();
  st.inf_phi_minus_phi0 = d.minCoeff();
  return st;
}

}  // namespace

std::vector<ContinuityState> continuity_solve(
    const DualPolytope& P, const GuilleminPotential& G, const Grid& g,
    const Eigen::Vector2d& c_vec, const ContinuitySchedule& schedule,
    const std::function<void(const ContinuityState&)>& on_step,
    std::optional<ContinuityState> resume_from) {
  if (!(schedule.t_start > 0) || schedule.t_start > 1.0)
    throw std::invalid_argument("continuity_solve: t_start must lie in (0, 1]");
  if (!(schedule.t_step > 0)) throw std::invalid_argument("continuity_solve: t_step must be positive");

  Eigen::MatrixXd phi0 = phi0_on_grid(G, g);
  const int n = g.resolution;

  // boundary offset c0: mean far-field residual of phi0 (ring adjacent to the
  // boundary), cancelled so that boundary data phi0 + c0/t matches the bulk
  double c0 = 0;
  {
    Eigen::MatrixXd r0 = residual_field(g, phi0, phi0, 1.0, c_vec, 0.0);
    double acc = 0;
    int cnt = 0;
    const int m = n - 2;
    for (int i = 0; i < m; ++i) {
      acc += r0(i, 0) + r0(i, m - 1);
      cnt += 2;
    }
    for (int j = 1; j < m - 1; ++j) {
      acc += r0(0, j) + r0(m - 1, j);
      cnt += 2;
    }
    c0 = -acc / cnt;
  }

  std::vector<ContinuityState> path;
  double t = schedule.t_start;
  double dt = schedule.t_step;
  Eigen::MatrixXd phi;
  if (resume_from) {
    t = resume_from->t;
    phi = resume_from->phi;
    path.push_back(*resume_from);
    if (t >= 1.0) return path;
    t = std::min(1.0, t + dt);
    phi.array() += c0 / t - c0 / resume_from->t;
  } else {
    phi = phi0.array() + c0 / t;
  }

  int halvings = 0;
  double t_prev = resume_from ? resume_from->t : t;  // last converged t (init: none yet)
  bool have_prev = static_cast<bool>(resume_from);
  Eigen::MatrixXd phi_prev = phi;

  while (true) {
    NewtonOutcome nr = solve_at_t(g, phi, phi0, t, c_vec, schedule.newton_tol);
    if (!nr.converged) {
      if (halvings >= 5) {
        // report the last good state plus the failing t via exception
        throw std::runtime_error("continuity_solve: step to t=" + std::to_string(t) +
                                 " failed after 5 halvings");
      }
      ++halvings;
      if (!have_prev)
        throw std::runtime_error("continuity_solve: initial solve at t_start failed");
      dt /= 2;
      double t_new = std::min(1.0, t_prev + dt);
      phi = phi_prev.array() + (c0 / t_new - c0 / t_prev);
      t = t_new;
      continue;
    }
    ContinuityState st = make_state(g, nr.phi, phi0, t, c_vec, nr.residual_sup, nr.iterations);
    {
      // beta-identity normalization shift (trapezoid weights on the box)
      Eigen::ArrayXXd w = t * nr.phi.array() + (1.0 - t) * phi0.array();
      double I = 0;
      for (int i = 0; i < n; ++i) {
        const double wi = (i == 0 || i == n - 1) ? 0.5 : 1.0;
        for (int j = 0; j < n; ++j) {
          const double wj = (j == 0 || j == n - 1) ? 0.5 : 1.0;
          I += wi * wj * std::exp(-w(i, j));
        }
      }
      I *= g.h * g.h;
      Eigen::VectorXd cv(2);
      cv << c_vec(0), c_vec(1);
      const double beta = exp_moment(P, cv, 1e-12).value;
      st.normalization_shift = std::log(I / beta) / t;
    }
    path.push_back(st);
    if (on_step) on_step(st);

    if (t >= 1.0) break;
    t_prev = t;
    phi_prev = nr.phi;
    have_prev = true;
    double t_new = std::min(1.0, t + dt);
    phi = nr.phi.array() + (c0 / t_new - c0 / t);
    t = t_new;
  }
  return path;
}

VerificationReport verify_solution(const ContinuityState& state, const DualPolytope& P,
                                   const Grid& g, const Eigen::MatrixXd& phi0, double tol) {
  VerificationReport rep;
  const int n = g.resolution;
  HessParts p = stencil_parts(g, state.phi, phi0, state.t, state.c_vec);
  Eigen::ArrayXXd det = p.pxx.array() * p.pyy.array() - p.pxy.array().square();
  rep.min_det = det.minCoeff();
  rep.convex_ok = rep.min_det > 0 && (p.pxx.array() > 0).all();
  if (rep.convex_ok) {
    rep.residual_sup = (det.log() + p.w_plus_adv.array()).abs().maxCoeff();
    rep.residual_ok = rep.residual_sup < tol;
  } else {
    rep.residual_sup = std::numeric_limits<double>::infinity();
  }

  // gradient image containment: min over interior nodes of min_i l_i(D_h phi)
  rep.containment_margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n - 2; ++i) {
    for (int j = 0; j < n - 2; ++j) {
      Eigen::Vector2d grad(p.px(i, j), p.py(i, j));
      for (std::size_t f = 0; f < P.facet_normals.size(); ++f) {
        double l = 1.0;
        for (int c = 0; c < 2; ++c) l += grad(c) * static_cast<double>(P.facet_normals[f](c));
        rep.containment_margin = std::min(rep.containment_margin, l);
      }
    }
  }
  rep.containment_ok = rep.containment_margin >= -1e-12;

  {
    Eigen::ArrayXXd w = state.t * state.phi.array() + (1.0 - state.t) * phi0.array();
    double I = 0;
    for (int i = 0; i < n; ++i) {
      const double wi = (i == 0 || i == n - 1) ? 0.5 : 1.0;
      for (int j = 0; j < n; ++j) {
        const double wj = (j == 0 || j == n - 1) ? 0.5 : 1.0;
        I += wi * wj * std::exp(-w(i, j));
      }
    }
    rep.beta_box = I * g.h * g.h;
    Eigen::VectorXd cv(2);
    cv << state.c_vec(0), state.c_vec(1);
    rep.beta_target = exp_moment(P, cv, 1e-12).value;
    rep.beta_rel_err = std::abs(rep.beta_box - rep.beta_target) / rep.beta_target;
    rep.normalization_shift = std::log(rep.beta_box / rep.beta_target) / state.t;
  }

  // a0 = inf{|y| : y in a facet plane of P} = min_i 1/|n_i|
  rep.boundary_distance = std::numeric_limits<double>::infinity();
  for (const auto& nv : P.facet_normals) {
    double norm2 = 0;
    for (Eigen::Index c = 0; c < nv.size(); ++c) norm2 += double(nv(c)) * double(nv(c));
    rep.boundary_distance = std::min(rep.boundary_distance, 1.0 / std::sqrt(norm2));
  }
  return rep;
}

double cp2_reference_potential(double x1, double x2) {
  // log(1+e^a+e^b) evaluated stably
  double m = std::max({0.0, x1, x2});
  double s = std::exp(0.0 - m) + std::exp(x1 - m) + std::exp(x2 - m);
  return 3.0 * (m + std::log(s)) - x1 - x2 - std::log(9.0);
}

}  // namespace torsol
