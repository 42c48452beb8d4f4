#pragma once

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

#include "nlsgibbs/experiments.hpp"
#include "nlsgibbs/fock.hpp"
#include "nlsgibbs/free_field.hpp"
#include "nlsgibbs/gibbs.hpp"

namespace nlsgibbs::io {

/// SpectralField <-> JSON {k_max, kappa, coeffs: [[re, im], ...]} in mode
/// order -k_max..k_max; doubles round-trip bit-exactly.
nlohmann::json field_to_json(const SpectralField& f, double kappa);
std::pair<SpectralField, double> field_from_json(const nlohmann::json& j);

nlohmann::json potential_to_json(const Potential& w);
Potential potential_from_json(const nlohmann::json& j);

/// Ensemble persistence: one header line {seed, k_max, kappa, count, weights?}
/// followed by one serialized field record per line.
void save_free_ensemble(const FieldEnsemble& ens, const std::filesystem::path& path);
FieldEnsemble load_free_ensemble(const std::filesystem::path& path);
void save_gibbs_ensemble(const GibbsEnsemble& ens, const std::filesystem::path& path);
GibbsEnsemble load_gibbs_ensemble(const std::filesystem::path& path);

/// Block-operator dump: "NLSGBLK1", int64 block count, then per block
/// {int64 n, int64 momentum, int64 dim, dim*dim row-major complex doubles}.
void save_block_operator(const BlockOperator& op, const std::filesystem::path& path);

/// CSV with the fixed schema {name, value, std_error, n_samples, seed}.
void write_estimates_csv(const std::filesystem::path& path,
                         const std::vector<std::tuple<std::string, double, double,
                                                      std::size_t, std::uint64_t>>& rows);

/// Sweep CSV: {sweep_value, metric, estimate, std_error, runtime_s}.
void write_report_csv(const ExperimentReport& rep, const std::filesystem::path& path);
nlohmann::json report_to_json(const ExperimentReport& rep);

/// SHA-256 hex digest (config hashing).
std::string sha256_hex(const std::string& data);

/// Gamma matrices as dense JSON arrays of [re, im] pairs.
nlohmann::json matrix_to_json(const Eigen::MatrixXcd& m);

}  // namespace nlsgibbs::io
