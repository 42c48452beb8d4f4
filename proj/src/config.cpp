#include "nlsgibbs/config.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>

#include "nlsgibbs/io.hpp"

namespace nlsgibbs {

using nlohmann::json;

int ScenarioConfig::resolve_n_max(double tau) const {
    if (n_max_policy == "explicit") {
        if (n_max < 1) throw std::invalid_argument("config: explicit n_max must be >= 1");
        return n_max;
    }
    if (cutoff_diagnostic_one)
        throw std::invalid_argument("config: auto n_max needs a compact cutoff");
    return static_cast<int>(std::ceil(K * tau));
}

DeltaProfile ScenarioConfig::delta_profile() const {
    DeltaProfile p;
    p.shape = profile_shape == "box" ? DeltaProfile::Shape::Box : DeltaProfile::Shape::Triangle;
    p.half_width = profile_half_width;
    return p;
}

namespace {
template <typename T>
T get_or(const json& j, const char* key, T def) {
    if (!j.contains(key)) return def;
    return j.at(key).get<T>();
}

void reject_unknown(const json& j, std::initializer_list<const char*> known,
                    const std::string& where) {
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* k : known)
            if (key == k) ok = true;
        if (!ok)
            throw std::invalid_argument("config: unknown field '" + key + "' in " + where);
    }
}
}  // namespace

ScenarioConfig ScenarioConfig::from_json(const json& j) {
    reject_unknown(j,
                   {"mode_set", "kappa", "potential", "cutoff", "sampler", "fock", "flow",
                    "sweep", "epsilon_schedule", "observable", "time", "tail", "output"},
                   "top level");
    ScenarioConfig c;
    if (j.contains("mode_set")) {
        reject_unknown(j.at("mode_set"), {"k_max"}, "mode_set");
        c.k_max = j.at("mode_set").at("k_max").get<int>();
    }
    if (c.k_max < 0) throw std::invalid_argument("config: k_max must be >= 0");
    c.kappa = get_or(j, "kappa", 1.0);
    if (c.kappa <= 0.0) throw std::invalid_argument("config: kappa must be > 0");
    if (j.contains("potential")) c.potential = io::potential_from_json(j.at("potential"));
    if (j.contains("cutoff")) {
        const json& jc = j.at("cutoff");
        reject_unknown(jc, {"K", "plateau", "diagnostic_one"}, "cutoff");
        c.cutoff_diagnostic_one = get_or(jc, "diagnostic_one", false);
        c.K = get_or(jc, "K", 4.0);
        c.plateau = get_or(jc, "plateau", 0.5);
        if (!c.cutoff_diagnostic_one) {
            if (c.K <= 0.0) throw std::invalid_argument("config: cutoff K must be > 0");
            if (!(c.plateau > 0.0 && c.plateau < 1.0))
                throw std::invalid_argument("config: cutoff plateau must be in (0,1)");
        }
    }
    if (c.cutoff_diagnostic_one && !c.potential.is_zero())
        throw std::invalid_argument(
            "config: diagnostic_one cutoff requires w == 0 (free diagnostic mode)");
    if (j.contains("sampler")) {
        const json& js = j.at("sampler");
        reject_unknown(js, {"n_samples", "seed"}, "sampler");
        c.n_samples = get_or<std::size_t>(js, "n_samples", 100000);
        c.seed = get_or<std::uint64_t>(js, "seed", 1);
        if (c.n_samples < 1) throw std::invalid_argument("config: n_samples must be >= 1");
    }
    if (j.contains("fock")) {
        const json& jf = j.at("fock");
        reject_unknown(jf, {"n_max_policy", "n_max"}, "fock");
        c.n_max_policy = get_or<std::string>(jf, "n_max_policy", "auto");
        c.n_max = get_or(jf, "n_max", 0);
        if (c.n_max_policy != "auto" && c.n_max_policy != "explicit")
            throw std::invalid_argument("config: n_max_policy must be auto|explicit");
        if (c.n_max_policy == "explicit" && c.n_max < 1)
            throw std::invalid_argument("config: explicit policy needs n_max >= 1");
    }
    if (j.contains("flow")) {
        const json& jf = j.at("flow");
        reject_unknown(jf, {"dt", "galerkin", "n_x"}, "flow");
        c.dt = get_or(jf, "dt", 1e-3);
        c.galerkin = get_or(jf, "galerkin", true);
        c.n_x = get_or(jf, "n_x", 0);
        if (c.dt <= 0.0) throw std::invalid_argument("config: dt must be > 0");
    }
    if (j.contains("sweep")) {
        const json& js = j.at("sweep");
        reject_unknown(js, {"kind", "values"}, "sweep");
        c.sweep_kind = get_or<std::string>(js, "kind", "tau");
        if (js.contains("values")) c.sweep_values = js.at("values").get<std::vector<double>>();
        if (c.sweep_kind != "tau" && c.sweep_kind != "epsilon" && c.sweep_kind != "time")
            throw std::invalid_argument("config: sweep kind must be tau|epsilon|time");
        if (c.sweep_values.empty()) throw std::invalid_argument("config: empty sweep");
    }
    if (j.contains("epsilon_schedule")) {
        const json& je = j.at("epsilon_schedule");
        reject_unknown(je, {"mode", "exponent", "profile", "half_width"}, "epsilon_schedule");
        c.eps_mode = get_or<std::string>(je, "mode", "none");
        c.eps_exponent = get_or(je, "exponent", 0.25);
        c.profile_shape = get_or<std::string>(je, "profile", "triangle");
        c.profile_half_width = get_or(je, "half_width", 0.5);
        if (c.eps_mode != "none" && c.eps_mode != "clip" && c.eps_mode != "delta")
            throw std::invalid_argument("config: epsilon mode must be none|clip|delta");
        if (c.eps_exponent <= 0.0)
            throw std::invalid_argument("config: epsilon exponent must be > 0");
    }
    if (c.potential.is_exact_delta() && c.eps_mode != "delta" && !c.cutoff_diagnostic_one)
        c.eps_mode = "delta";  // the only sound quantum route for w = -delta
    if (j.contains("observable")) {
        const json& jo = j.at("observable");
        reject_unknown(jo, {"mode", "p"}, "observable");
        c.observable_mode = get_or(jo, "mode", 0);
        c.observable_p = get_or(jo, "p", 1);
        if (std::abs(c.observable_mode) > c.k_max)
            throw std::invalid_argument("config: observable mode outside the mode set");
        if (c.observable_p < 1 || c.observable_p > 2)
            throw std::invalid_argument("config: observable p must be 1 or 2");
    }
    if (j.contains("time")) {
        const json& jt = j.at("time");
        reject_unknown(jt, {"t", "t_list"}, "time");
        c.time = get_or(jt, "t", 0.5);
        if (jt.contains("t_list")) c.t_list = jt.at("t_list").get<std::vector<double>>();
    }
    if (j.contains("tail")) {
        const json& jt = j.at("tail");
        reject_unknown(jt, {"B", "c", "levels"}, "tail");
        c.tail_B = get_or(jt, "B", 1.0);
        c.tail_c = get_or(jt, "c", 0.5);
        if (jt.contains("levels")) c.tail_levels = jt.at("levels").get<std::vector<int>>();
        if (c.tail_B <= 0.0) throw std::invalid_argument("config: tail B must be > 0");
    }
    if (j.contains("output")) {
        const json& jo = j.at("output");
        reject_unknown(jo, {"directory", "formats"}, "output");
        c.out_dir = get_or<std::string>(jo, "directory", "out");
        if (jo.contains("formats"))
            c.formats = jo.at("formats").get<std::vector<std::string>>();
    }
    return c;
}

ScenarioConfig ScenarioConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("config: JSON parse error in " + path + ": " + e.what());
    }
    return from_json(j);
}

json ScenarioConfig::to_json() const {
    return json{
        {"mode_set", {{"k_max", k_max}}},
        {"kappa", kappa},
        {"potential", io::potential_to_json(potential)},
        {"cutoff",
         {{"K", K}, {"plateau", plateau}, {"diagnostic_one", cutoff_diagnostic_one}}},
        {"sampler", {{"n_samples", n_samples}, {"seed", seed}}},
        {"fock", {{"n_max_policy", n_max_policy}, {"n_max", n_max}}},
        {"flow", {{"dt", dt}, {"galerkin", galerkin}, {"n_x", n_x}}},
        {"sweep", {{"kind", sweep_kind}, {"values", sweep_values}}},
        {"epsilon_schedule",
         {{"mode", eps_mode},
          {"exponent", eps_exponent},
          {"profile", profile_shape},
          {"half_width", profile_half_width}}},
        {"observable", {{"mode", observable_mode}, {"p", observable_p}}},
        {"time", {{"t", time}, {"t_list", t_list}}},
        {"tail", {{"B", tail_B}, {"c", tail_c}, {"levels", tail_levels}}},
        {"output", {{"directory", out_dir}, {"formats", formats}}}};
}

std::string ScenarioConfig::config_hash() const { return io::sha256_hex(to_json().dump()); }

}  // namespace nlsgibbs
