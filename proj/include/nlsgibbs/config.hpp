#pragma once

#include <json.hpp>

#include <string>
#include <vector>

#include "nlsgibbs/experiments.hpp"

namespace nlsgibbs {

/// Fully materialized scenario configuration. Parsing fills every default so
/// the stored copy carries no implicit values; the canonical serialization of
/// that copy is what gets hashed into outputs.
struct ScenarioConfig {
    int k_max = 1;
    double kappa = 1.0;
    Potential potential = Potential::constant(0.2);

    bool cutoff_diagnostic_one = false;
    double K = 4.0;
    double plateau = 0.5;

    std::size_t n_samples = 100000;
    std::uint64_t seed = 1;

    std::string n_max_policy = "auto";  // "auto" (ceil(K*tau)) or "explicit"
    int n_max = 0;

    double dt = 1e-3;
    bool galerkin = true;
    int n_x = 0;

    std::string sweep_kind = "tau";  // tau | epsilon | time
    std::vector<double> sweep_values = {2, 4, 8, 16};

    std::string eps_mode = "none";  // none | clip | delta
    double eps_exponent = 0.25;
    std::string profile_shape = "triangle";
    double profile_half_width = 0.5;

    int observable_mode = 0;
    int observable_p = 1;
    double time = 0.5;
    std::vector<double> t_list = {0.0, 1.0};

    double tail_B = 1.0;
    double tail_c = 0.5;
    std::vector<int> tail_levels = {4, 8, 16};

    std::string out_dir = "out";
    std::vector<std::string> formats = {"csv", "json"};

    CutoffFunction cutoff() const {
        return cutoff_diagnostic_one ? CutoffFunction::diagnostic_one()
                                     : CutoffFunction::plateau_bump(K, plateau);
    }
    ModeSet mode_set() const { return ModeSet(k_max); }
    FlowConfig flow_config() const {
        FlowConfig fc;
        fc.dt = dt;
        fc.kappa = kappa;
        fc.w = potential;
        fc.galerkin = galerkin;
        fc.n_x = n_x;
        return fc;
    }
    int resolve_n_max(double tau) const;
    DeltaProfile delta_profile() const;

    /// Parse + validate, materializing every default.
    static ScenarioConfig from_json(const nlohmann::json& j);
    static ScenarioConfig from_file(const std::string& path);
    nlohmann::json to_json() const;
    /// SHA-256 of the canonical (sorted-key) serialization.
    std::string config_hash() const;
};

}  // namespace nlsgibbs
