#pragma once

#include "torsol/ma_solver.hpp"
#include "torsol/soliton.hpp"

#include <nlohmann/json.hpp>

#include <stdexcept>
#include <string>
#include <vector>

namespace torsol {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Full double precision (17 significant digits), locale-independent.
std::string fmt17(double v);

std::string rational_to_string(const Rational& q);

nlohmann::json fano_to_json(const FanoReport& rep);
nlohmann::json dual_to_json(const DualPolytope& P);
nlohmann::json soliton_to_json(const SolitonVector& sv);
nlohmann::json scan_to_json(const ScanReport& rep);
nlohmann::json state_to_json(const ContinuityState& st);  // diagnostics only, no field
nlohmann::json verification_to_json(const VerificationReport& rep);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

/// x1,x2,phi,phi0,phi_minus_phi0,residual rows; `shift` is added to phi in
/// the emitted columns (the beta normalization), residual stays the raw
/// log-form residual of the solved field (NaN on the boundary ring).
void write_fields_csv(const std::string& path, const Grid& g, const Eigen::MatrixXd& phi,
                      const Eigen::MatrixXd& phi0, const Eigen::MatrixXd& residual_interior,
                      double shift);

void write_path_csv(const std::string& path, const std::vector<ContinuityState>& states);

void write_scan_csv(const std::string& path, const ScanReport& rep);

/// Compact checkpoint: metadata plus the raw (unnormalized) field.
void save_checkpoint(const std::string& path, const ContinuityState& st, const Grid& g);
ContinuityState load_checkpoint(const std::string& path, const Grid& g);

}  // namespace torsol
