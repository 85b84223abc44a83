#pragma once

// JSON, CSV and binary formats for profiles, ensembles, matrices and reports.

#include <filesystem>
#include <iosfwd>
#include <string>

#include <Eigen/Dense>

#include "json.hpp"
#include "speclaw/ensembles.hpp"
#include "speclaw/qve.hpp"
#include "speclaw/spectra.hpp"
#include "speclaw/verify.hpp"

namespace speclaw {

using json = nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const json& j);

/// {"n", "entries"} for full profiles (or {"n", "constant"} when every entry
/// is equal); {"d", "weights", "coeffs"} for block profiles.
json profile_to_json(const Profile& profile);
/// Accepts the three shapes above. A block profile with an additional "n"
/// is expanded to a full profile of that size.
Profile profile_from_json(const json& j);
VarianceProfile full_profile_from_json(const json& j);

json entry_law_to_json(const EntryLaw& law);
EntryLaw entry_law_from_json(const json& j);

json ensemble_to_json(const EnsembleSpec& spec);
EnsembleSpec ensemble_from_json(const json& j);

json solution_to_json(const QveSolution& s);
json bulk_to_json(const std::vector<BulkInterval>& bulk);
std::vector<BulkInterval> bulk_from_json(const json& j);

json local_law_config_to_json(const LocalLawConfig& cfg);
LocalLawConfig local_law_config_from_json(const json& j);

json report_to_json(const LocalLawReport& r);
LocalLawReport local_law_report_from_json(const json& j);
json report_to_json(const StieltjesReport& r);
StieltjesReport stieltjes_report_from_json(const json& j);
json report_to_json(const DelocReport& r);
DelocReport deloc_report_from_json(const json& j);
json projection_spec_to_json(const ProjectionTestSpec& s);
ProjectionTestSpec projection_spec_from_json(const json& j);
json report_to_json(const ProjectionTable& t);
ProjectionTable projection_table_from_json(const json& j);
json report_to_json(const InterlacingResult& r);
InterlacingResult interlacing_result_from_json(const json& j);

/// Columns x,rho.
void write_density_csv(const DensityCurve& curve, std::ostream& os);
/// Columns index,eigenvalue,inf_norm (inf_norm empty without vectors).
void write_spectrum_csv(const SpectrumSummary& s, std::ostream& os);
/// One row per (interval, trial).
void write_local_law_csv(const LocalLawReport& r, std::ostream& os);
void write_stieltjes_csv(const StieltjesReport& r, std::ostream& os);
/// One row per bulk eigenvector ratio.
void write_deloc_csv(const DelocReport& r, std::ostream& os);
void write_projection_csv(const ProjectionTable& t, std::ostream& os);

/// 8-byte little-endian n, then n*n little-endian float64 in row-major order.
void write_matrix_binary(const Eigen::MatrixXd& m, const std::filesystem::path& path);
Eigen::MatrixXd read_matrix_binary(const std::filesystem::path& path);
/// Matrix Market "array real symmetric" (lower triangle, column-major).
void write_matrix_market(const Eigen::MatrixXd& m, const std::filesystem::path& path);
Eigen::MatrixXd read_matrix_market(const std::filesystem::path& path);

json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace speclaw
