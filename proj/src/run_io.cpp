#include "torsol/run_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace torsol {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string rational_to_string(const Rational& q) {
  std::ostringstream os;
  os << q;
  return os.str();
}

nlohmann::json fano_to_json(const FanoReport& rep) {
  return nlohmann::json{{"is_fano", rep.is_fano},
                        {"origin_interior", rep.origin_interior},
                        {"vertices_primitive", rep.vertices_primitive},
                        {"faces_simplicial", rep.faces_simplicial},
                        {"is_gorenstein", rep.is_gorenstein},
                        {"gorenstein_index", rep.gorenstein_index},
                        {"failures", rep.failures},
                        {"notes", rep.notes}};
}

nlohmann::json dual_to_json(const DualPolytope& P) {
  nlohmann::json verts = nlohmann::json::array();
  for (const auto& v : P.vertices) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < v.size(); ++c) row.push_back(rational_to_string(v(c)));
    verts.push_back(row);
  }
  nlohmann::json normals = nlohmann::json::array();
  for (const auto& nv : P.facet_normals) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < nv.size(); ++c) row.push_back(nv(c));
    normals.push_back(row);
  }
  return nlohmann::json{{"dim", P.dim},
                        {"vertices", verts},
                        {"facet_normals", normals},
                        {"simplices", P.triangulation.size()}};
}

nlohmann::json soliton_to_json(const SolitonVector& sv) {
  std::vector<double> c(sv.c.data(), sv.c.data() + sv.c.size());
  return nlohmann::json{{"c", c},
                        {"residual_norm", sv.residual_norm},
                        {"iterations", sv.iterations},
                        {"converged", sv.converged}};
}

nlohmann::json scan_to_json(const ScanReport& rep) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : rep.rows)
    rows.push_back({{"radius", r.radius},
                    {"sup_lemma21", r.sup_lemma21},
                    {"sup_lemma22", r.sup_lemma22},
                    {"run_sup21", r.run_sup21},
                    {"run_sup22", r.run_sup22}});
  return nlohmann::json{
      {"rows", rows}, {"saturation21", rep.saturation21}, {"saturation22", rep.saturation22}};
}

nlohmann::json state_to_json(const ContinuityState& st) {
  return nlohmann::json{{"t", st.t},
                        {"m_t", st.m_t},
                        {"x_t", {st.x_t(0), st.x_t(1)}},
                        {"sup_phi_minus_phi0", st.sup_phi_minus_phi0},
                        {"inf_phi_minus_phi0", st.inf_phi_minus_phi0},
                        {"residual_norm", st.residual_norm},
                        {"newton_iters", st.newton_iters},
                        {"normalization_shift", st.normalization_shift}};
}

nlohmann::json verification_to_json(const VerificationReport& rep) {
  return nlohmann::json{{"residual_sup", rep.residual_sup},
                        {"min_det", rep.min_det},
                        {"containment_margin", rep.containment_margin},
                        {"beta_box", rep.beta_box},
                        {"beta_target", rep.beta_target},
                        {"beta_rel_err", rep.beta_rel_err},
                        {"normalization_shift", rep.normalization_shift},
                        {"boundary_distance_a0", rep.boundary_distance},
                        {"residual_ok", rep.residual_ok},
                        {"convex_ok", rep.convex_ok},
                        {"containment_ok", rep.containment_ok}};
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path);
  f << content;
  if (!f) throw IoError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for reading: " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

void write_fields_csv(const std::string& path, const Grid& g, const Eigen::MatrixXd& phi,
                      const Eigen::MatrixXd& phi0, const Eigen::MatrixXd& residual_interior,
                      double shift) {
  std::ostringstream os;
  os << "x1,x2,phi,phi0,phi_minus_phi0,residual\n";
  const int n = g.resolution;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double p = phi(i, j) + shift;
      os << fmt17(g.coord(i)) << ',' << fmt17(g.coord(j)) << ',' << fmt17(p) << ','
         << fmt17(phi0(i, j)) << ',' << fmt17(p - phi0(i, j)) << ',';
      if (i > 0 && i < n - 1 && j > 0 && j < n - 1)
        os << fmt17(residual_interior(i - 1, j - 1));
      else
        os << "nan";
      os << '\n';
    }
  }
  write_text_file(path, os.str());
}

void write_path_csv(const std::string& path, const std::vector<ContinuityState>& states) {
  std::ostringstream os;
  os << "t,m_t,x_t_1,x_t_2,sup_phi_minus_phi0,inf_phi_minus_phi0,newton_iters,residual_sup,"
        "normalization_shift\n";
  for (const auto& st : states) {
    os << fmt17(st.t) << ',' << fmt17(st.m_t) << ',' << fmt17(st.x_t(0)) << ','
       << fmt17(st.x_t(1)) << ',' << fmt17(st.sup_phi_minus_phi0) << ','
       << fmt17(st.inf_phi_minus_phi0) << ',' << st.newton_iters << ','
       << fmt17(st.residual_norm) << ',' << fmt17(st.normalization_shift) << '\n';
  }
  write_text_file(path, os.str());
}

void write_scan_csv(const std::string& path, const ScanReport& rep) {
  std::ostringstream os;
  os << "radius,sup_lemma21,sup_lemma22\n";
  for (const auto& r : rep.rows)
    os << fmt17(r.radius) << ',' << fmt17(r.sup_lemma21) << ',' << fmt17(r.sup_lemma22) << '\n';
  write_text_file(path, os.str());
}

void save_checkpoint(const std::string& path, const ContinuityState& st, const Grid& g) {
  nlohmann::json doc = state_to_json(st);
  doc["R"] = g.R;
  doc["resolution"] = g.resolution;
  std::vector<double> field;
  field.reserve(static_cast<std::size_t>(g.resolution) * g.resolution);
  for (int i = 0; i < g.resolution; ++i)
    for (int j = 0; j < g.resolution; ++j) field.push_back(st.phi(i, j));
  doc["phi"] = field;
  doc["c_vec"] = {st.c_vec(0), st.c_vec(1)};
  write_text_file(path, doc.dump());
}

ContinuityState load_checkpoint(const std::string& path, const Grid& g) {
  nlohmann::json doc = nlohmann::json::parse(read_text_file(path));
  if (doc["resolution"].get<int>() != g.resolution || doc["R"].get<double>() != g.R)
    throw std::runtime_error("checkpoint grid mismatch: " + path);
  ContinuityState st;
  st.t = doc["t"].get<double>();
  st.m_t = doc["m_t"].get<double>();
  st.x_t << doc["x_t"][0].get<double>(), doc["x_t"][1].get<double>();
  st.sup_phi_minus_phi0 = doc["sup_phi_minus_phi0"].get<double>();
  st.inf_phi_minus_phi0 = doc["inf_phi_minus_phi0"].get<double>();
  st.residual_norm = doc["residual_norm"].get<double>();
  st.newton_iters = doc["newton_iters"].get<int>();
  st.normalization_shift = doc["normalization_shift"].get<double>();
  st.c_vec << doc["c_vec"][0].get<double>(), doc["c_vec"][1].get<double>();
  const auto& field = doc["phi"];
  st.phi.resize(g.resolution, g.resolution);
  std::size_t k = 0;
  for (int i = 0; i < g.resolution; ++i)
    for (int j = 0; j < g.resolution; ++j) st.phi(i, j) = field[k++].get<double>();
  return st;
}

}  // namespace torsol
