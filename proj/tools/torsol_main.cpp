// Command-line front end: combinatorial checks, soliton vector, Guillemin
// potential diagnostics, and the continuity-method solver.
//
// Exit codes: 0 success, 1 I/O failure, 2 invalid input, 3 solver
// non-convergence.

#include "torsol/run_io.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <random>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace torsol;

namespace {

constexpr const char* kVersion = "0.1.0";

struct CommonOpts {
  std::string input;
  std::string out = "out";
  double tol = 1e-10;
  unsigned seed = 12345;
};

std::string yesno(bool b) { return b ? "yes" : "no"; }

void ensure_out(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory: " + dir);
}

json load_report(const std::string& dir) {
  fs::path p = fs::path(dir) / "report.json";
  if (fs::exists(p)) {
    try {
      return json::parse(read_text_file(p.string()));
    } catch (...) {
    }
  }
  return json::object();
}

void store_report(const std::string& dir, const json& doc) {
  write_text_file((fs::path(dir) / "report.json").string(), doc.dump(2));
}

std::string timestamp() {
  std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

LatticePolytope load_polytope(const std::string& path) {
  return parse_polytope(read_text_file(path));
}

json combinatorial_fragment(const LatticePolytope& Q, const DualPolytope& P,
                            const FanoReport& fano) {
  json frag;
  frag["fano"] = fano_to_json(fano);
  frag["dual"] = dual_to_json(P);
  RatVec b = barycenter(P);
  json bj = json::array();
  for (Eigen::Index c = 0; c < b.size(); ++c) bj.push_back(rational_to_string(b(c)));
  frag["barycenter"] = bj;
  frag["futaki_vanishes"] = futaki_vanishes(P);
  frag["volume"] = rational_to_string(volume(P));
  frag["dim"] = Q.dim;
  return frag;
}

int cmd_check(const CommonOpts& o) {
  LatticePolytope Q = load_polytope(o.input);
  FanoReport fano = validate_toric_fano(Q);
  DualPolytope P = dual_polytope(Q);
  bool futaki = futaki_vanishes(P);

  std::ostringstream line;
  line << "Fano: " << yesno(fano.is_fano) << ", Gorenstein: " << yesno(fano.is_gorenstein);
  if (!fano.is_gorenstein) line << " (index " << fano.gorenstein_index << ")";
  line << ", Futaki vanishes: " << yesno(futaki);
  std::cout << line.str() << "\n";
  for (const auto& f : fano.failures) std::cout << "  finding: " << f << "\n";

  RatVec b = barycenter(P);
  std::cout << "barycenter: (";
  for (Eigen::Index c = 0; c < b.size(); ++c)
    std::cout << (c ? ", " : "") << rational_to_string(b(c));
  std::cout << ")\n";

  ensure_out(o.out);
  json rep = load_report(o.out);
  rep["input"] = o.input;
  rep["version"] = kVersion;
  rep["timestamp"] = timestamp();
  rep.merge_patch(combinatorial_fragment(Q, P, fano));
  store_report(o.out, rep);
  return fano.is_fano ? 0 : 2;
}

int cmd_dual(const CommonOpts& o) {
  LatticePolytope Q = load_polytope(o.input);
  DualPolytope P = dual_polytope(Q);
  std::cout << "dual polytope: " << P.vertices.size() << " vertices, "
            << P.facet_normals.size() << " facets, " << P.triangulation.size()
            << " simplices\n";
  for (const auto& v : P.vertices) {
    std::cout << "  (";
    for (Eigen::Index c = 0; c < v.size(); ++c)
      std::cout << (c ? ", " : "") << rational_to_string(v(c));
    std::cout << ")\n";
  }
  std::cout << "volume: " << rational_to_string(volume(P)) << "\n";
  ensure_out(o.out);
  json rep = load_report(o.out);
  rep["dual"] = dual_to_json(P);
  rep["version"] = kVersion;
  store_report(o.out, rep);
  return 0;
}

int cmd_soliton(const CommonOpts& o) {
  LatticePolytope Q = load_polytope(o.input);
  DualPolytope P = dual_polytope(Q);
  SolitonVector sv = solve_soliton_vector(P, o.tol);
  std::cout << "c = (";
  for (Eigen::Index c = 0; c < sv.c.size(); ++c)
    std::cout << (c ? ", " : "") << std::setprecision(6) << sv.c(c);
  std::cout << "), residual " << std::setprecision(6) << sv.residual_norm << ", iterations "
            << sv.iterations << ", converged " << yesno(sv.converged) << "\n";
  ensure_out(o.out);
  json rep = load_report(o.out);
  rep["soliton"] = soliton_to_json(sv);
  rep["version"] = kVersion;
  store_report(o.out, rep);
  return sv.converged ? 0 : 3;
}

int cmd_guillemin(const CommonOpts& o, const std::vector<double>& radii, int samples) {
  LatticePolytope Q = load_polytope(o.input);
  DualPolytope P = dual_polytope(Q);
  GuilleminPotential G(P);

  ScanReport scan = G.lemma_scan(radii, samples);
  ensure_out(o.out);
  write_scan_csv((fs::path(o.out) / "scan.csv").string(), scan);
  for (const auto& r : scan.rows)
    std::cout << "radius " << r.radius << ": sup|log det D2phi0 + phi0| = " << std::setprecision(6)
              << r.sup_lemma21 << ", sup|phi0 - v| = " << r.sup_lemma22 << "\n";
  std::cout << "saturation ratio: " << std::setprecision(6) << scan.saturation21 << " / "
            << scan.saturation22 << "\n";

  // Cauchy-Binet and Legendre self-tests on random interior points
  std::mt19937 rng(o.seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Eigen::VectorXd lo = Eigen::VectorXd::Constant(Q.dim, 1e300),
                  hi = Eigen::VectorXd::Constant(Q.dim, -1e300);
  for (const auto& v : P.vertices) {
    Eigen::VectorXd vd = to_double(v);
    lo = lo.cwiseMin(vd);
    hi = hi.cwiseMax(vd);
  }
  double max_cb_dev = 0, max_roundtrip = 0;
  int done = 0;
  while (done < 100) {
    Eigen::VectorXd y(Q.dim);
    for (int c = 0; c < Q.dim; ++c) y(c) = lo(c) + (hi(c) - lo(c)) * (0.5 + 0.5 * unif(rng));
    if ((G.lvals(y).array() < 0.05).any()) continue;
    ++done;
    U0Eval u = G.u0_eval(y);
    double direct = u.hessian.determinant();
    max_cb_dev = std::max(max_cb_dev, std::abs(direct - G.det_hess_u0(y)) / std::abs(direct));
    LegendreResult lr = G.legendre_phi0(u.gradient);
    max_roundtrip = std::max(max_roundtrip, (lr.y - y).norm());
  }
  std::cout << "Cauchy-Binet max relative deviation: " << std::setprecision(6) << max_cb_dev
            << "\n";
  std::cout << "Legendre round-trip max error: " << std::setprecision(6) << max_roundtrip << "\n";

  json rep = load_report(o.out);
  rep["scan"] = scan_to_json(scan);
  rep["scan"]["cauchy_binet_max_dev"] = max_cb_dev;
  rep["scan"]["legendre_roundtrip_max"] = max_roundtrip;
  rep["version"] = kVersion;
  store_report(o.out, rep);
  return 0;
}

int cmd_solve(const CommonOpts& o, double R, int resolution, double t_start, double t_step,
              bool oracle, bool resume) {
  LatticePolytope Q = load_polytope(o.input);
  FanoReport fano = validate_toric_fano(Q);
  if (!fano.is_fano) {
    std::cerr << "input is not a toric Fano polytope\n";
    return 2;
  }
  if (Q.dim != 2) {
    std::cerr << "the continuity solver is two-dimensional only\n";
    return 2;
  }
  DualPolytope P = dual_polytope(Q);
  SolitonVector sv = solve_soliton_vector(P, 1e-10);
  if (!sv.converged) return 3;
  Eigen::Vector2d c_vec(sv.c(0), sv.c(1));

  Grid g = build_grid(R, resolution);
  GuilleminPotential G(P);
  Eigen::MatrixXd phi0 = phi0_on_grid(G, g);

  ensure_out(o.out);
  ContinuitySchedule sched;
  sched.t_start = t_start;
  sched.t_step = t_step;
  sched.newton_tol = o.tol;

  std::optional<ContinuityState> resume_state;
  fs::path ckpt = fs::path(o.out) / "checkpoint.json";
  if (resume && fs::exists(ckpt)) {
    resume_state = load_checkpoint(ckpt.string(), g);
    std::cout << "resuming from t = " << resume_state->t << "\n";
  }

  std::vector<json> path_rows;
  auto on_step = [&](const ContinuityState& st) {
    save_checkpoint(ckpt.string(), st, g);
    Eigen::MatrixXd res = residual_field(g, st.phi, phi0, st.t, st.c_vec);
    char name[64];
    std::snprintf(name, sizeof(name), "fields_t%.4f.csv", st.t);
    write_fields_csv((fs::path(o.out) / name).string(), g, st.phi, phi0, res,
                     st.normalization_shift);
    std::cout << "t = " << std::fixed << std::setprecision(4) << st.t
              << std::defaultfloat << ": iters " << st.newton_iters << ", residual "
              << std::setprecision(3) << st.residual_norm << ", m_t " << std::setprecision(6)
              << st.m_t << ", x_t (" << st.x_t(0) << ", " << st.x_t(1) << ")\n";
  };

  std::vector<ContinuityState> path =
      continuity_solve(P, G, g, c_vec, sched, on_step, resume_state);
  write_path_csv((fs::path(o.out) / "path.csv").string(), path);

  const ContinuityState& last = path.back();
  VerificationReport ver = verify_solution(last, P, g, phi0, std::max(o.tol * 10, 1e-8));
  std::cout << "final residual " << std::setprecision(6) << ver.residual_sup
            << ", containment margin " << ver.containment_margin << ", beta rel err "
            << ver.beta_rel_err << ", shift " << ver.normalization_shift << "\n";

  json rep = load_report(o.out);
  rep["config"] = {{"command", "solve"}, {"input", o.input},   {"out", o.out},
                   {"R", R},             {"resolution", resolution}, {"t_start", t_start},
                   {"t_step", t_step},   {"tol", o.tol},       {"seed", o.seed},
                   {"oracle", oracle},   {"resume", resume}};
  rep.merge_patch(combinatorial_fragment(Q, P, fano));
  rep["soliton"] = soliton_to_json(sv);
  json steps = json::array();
  for (const auto& st : path) steps.push_back(state_to_json(st));
  rep["path"] = steps;
  rep["verification"] = verification_to_json(ver);
  rep["version"] = kVersion;
  rep["timestamp"] = timestamp();

  if (oracle) {
    Eigen::MatrixXd exact(g.resolution, g.resolution);
    for (int i = 0; i < g.resolution; ++i)
      for (int j = 0; j < g.resolution; ++j)
        exact(i, j) = cp2_reference_potential(g.coord(i), g.coord(j));
    NewtonOutcome nr = solve_at_t(g, exact, phi0, 1.0, Eigen::Vector2d::Zero(), 1e-6);
    double sup_err = (nr.phi - exact).cwiseAbs().maxCoeff();
    std::cout << "oracle sup error vs closed form: " << std::setprecision(6) << sup_err << "\n";
    rep["oracle_sup_error"] = sup_err;
  }
  store_report(o.out, rep);
  return 0;
}

int cmd_report(const std::string& out) {
  json rep = json::parse(read_text_file((fs::path(out) / "report.json").string()));
  std::cout << "torsol report (" << rep.value("version", "?") << ")\n";
  if (rep.contains("fano")) {
    const auto& f = rep["fano"];
    std::cout << "Fano: " << yesno(f["is_fano"].get<bool>())
              << ", Gorenstein: " << yesno(f["is_gorenstein"].get<bool>()) << " (index "
              << f["gorenstein_index"] << ")\n";
  }
  if (rep.contains("futaki_vanishes"))
    std::cout << "Futaki vanishes: " << yesno(rep["futaki_vanishes"].get<bool>()) << "\n";
  if (rep.contains("barycenter")) std::cout << "barycenter: " << rep["barycenter"].dump() << "\n";
  if (rep.contains("soliton")) {
    std::cout << "soliton c = " << rep["soliton"]["c"].dump() << " (residual "
              << std::setprecision(6) << rep["soliton"]["residual_norm"].get<double>() << ")\n";
  }
  if (rep.contains("path") && !rep["path"].empty()) {
    const auto& lastj = rep["path"].back();
    std::cout << "continuity path: " << rep["path"].size() << " steps, final t = "
              << lastj["t"].get<double>() << ", residual "
              << lastj["residual_norm"].get<double>() << "\n";
  }
  if (rep.contains("verification"))
    std::cout << "verification: residual_ok " << rep["verification"]["residual_ok"]
              << ", containment_ok " << rep["verification"]["containment_ok"] << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"toric Kahler-Ricci soliton toolkit"};
  app.require_subcommand(1);

  CommonOpts o;
  double R = 8.0, t_start = 0.3, t_step = 0.05;
  int resolution = 161, samples = 200;
  std::vector<double> radii = {5, 10, 20, 40};
  bool oracle = false, resume = false;

  auto add_common = [&](CLI::App* sub, bool needs_input = true) {
    if (needs_input) sub->add_option("--input", o.input, "polytope document")->required();
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--tol", o.tol, "tolerance");
    sub->add_option("--seed", o.seed, "seed for sampling scans");
  };

  CLI::App* check = app.add_subcommand("check", "combinatorial Fano report");
  add_common(check);
  CLI::App* dual = app.add_subcommand("dual", "dual polytope data");
  add_common(dual);
  CLI::App* sol = app.add_subcommand("soliton-vector", "solve for the soliton coefficients");
  add_common(sol);
  CLI::App* gui = app.add_subcommand("guillemin", "potential scans and self-tests");
  add_common(gui);
  gui->add_option("--radii", radii, "scan radii");
  gui->add_option("--samples", samples, "directions per radius");
  CLI::App* solve = app.add_subcommand("solve", "continuity-method solve");
  add_common(solve);
  solve->add_option("--R", R, "half-width of the grid");
  solve->add_option("--resolution", resolution, "odd nodes per axis");
  solve->add_option("--t-start", t_start, "first continuity parameter");
  solve->add_option("--t-step", t_step, "continuity increment");
  solve->add_flag("--oracle", oracle, "also check the closed-form reference (CP^2 input)");
  solve->add_flag("--resume", resume, "resume from the last checkpoint");
  CLI::App* report = app.add_subcommand("report", "print a stored report");
  report->add_option("--out", o.out, "output directory of a previous run");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? 2 : 0;
  }

  try {
    if (o.tol <= 0) {
      std::cerr << "usage error: --tol must be positive\n";
      return 2;
    }
    if (check->parsed()) return cmd_check(o);
    if (dual->parsed()) return cmd_dual(o);
    if (sol->parsed()) return cmd_soliton(o);
    if (gui->parsed()) {
      if (samples <= 0 || radii.empty()) {
        std::cerr << "usage error: need positive --samples and at least one radius\n";
        return 2;
      }
      double tol_scan = o.tol;
      (void)tol_scan;
      return cmd_guillemin(o, radii, samples);
    }
    if (solve->parsed()) {
      if (o.tol > 1e-2) {
        std::cerr << "usage error: --tol too large for the solver\n";
        return 2;
      }
      CommonOpts so = o;
      if (so.tol == 1e-10) so.tol = 1e-9;  // solver default differs from exact-ops default
      return cmd_solve(so, R, resolution, t_start, t_step, oracle, resume);
    }
    if (report->parsed()) return cmd_report(o.out);
  } catch (const PolytopeError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "i/o failure: " << e.what() << "\n";
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "i/o failure: " << e.what() << "\n";
    return 1;
  } catch (const std::runtime_error& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
