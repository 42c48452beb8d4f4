#include "nlsgibbs/io.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <fstream>

namespace nlsgibbs::io {

using nlohmann::json;

json field_to_json(const SpectralField& f, double kappa) {
    json coeffs = json::array();
    for (int i = 0; i < f.modes.size(); ++i)
        coeffs.push_back({f.coeffs[i].real(), f.coeffs[i].imag()});
    return json{{"k_max", f.modes.k_max}, {"kappa", kappa}, {"coeffs", std::move(coeffs)}};
}

std::pair<SpectralField, double> field_from_json(const json& j) {
    const int k_max = j.at("k_max").get<int>();
    const double kappa = j.at("kappa").get<double>();
    SpectralField f{ModeSet(k_max)};
    const auto& coeffs = j.at("coeffs");
    if (static_cast<int>(coeffs.size()) != f.modes.size())
        throw std::invalid_argument("field_from_json: coefficient count mismatch");
    for (int i = 0; i < f.modes.size(); ++i)
        f.coeffs[i] = Complex(coeffs[i][0].get<double>(), coeffs[i][1].get<double>());
    return {std::move(f), kappa};
}

json potential_to_json(const Potential& w) {
    json j{{"type", w.kind_name()}};
    switch (w.kind()) {
        case Potential::Kind::Constant:
            j["c"] = w.constant_value();
            break;
        case Potential::Kind::FourierCoeffs:
            j["coeffs"] = w.fourier_data();
            break;
        case Potential::Kind::GridSamples:
            j["values"] = w.grid_values();
            break;
        case Potential::Kind::DeltaApprox:
            j["epsilon"] = w.delta_epsilon();
            j["profile"] =
                w.profile().shape == DeltaProfile::Shape::Triangle ? "triangle" : "box";
            j["half_width"] = w.profile().half_width;
            j["values"] = w.grid_values();
            break;
        case Potential::Kind::ExactDelta:
            j["sign"] = -1;
            break;
        case Potential::Kind::L1Clip:
            j["epsilon"] = w.clip_epsilon();
            j["values"] = w.grid_values();
            break;
    }
    return j;
}

Potential potential_from_json(const json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "constant") return Potential::constant(j.at("c").get<double>());
    if (type == "fourier") return Potential::fourier(j.at("coeffs").get<std::vector<double>>());
    if (type == "grid") return Potential::grid(j.at("values").get<std::vector<double>>());
    if (type == "exact_delta") return Potential::exact_delta();
    if (type == "delta_approx") {
        DeltaProfile p;
        p.shape = j.value("profile", "triangle") == std::string("box")
                      ? DeltaProfile::Shape::Box
                      : DeltaProfile::Shape::Triangle;
        p.half_width = j.value("half_width", 0.5);
        return Potential::delta_approx(p, j.at("epsilon").get<double>());
    }
    if (type == "l1_clip") {
        // clipped samples are already materialized; reload as a grid potential
        return Potential::grid(j.at("values").get<std::vector<double>>());
    }
    if (type == "inverse_sqrt_spike")
        return Potential::inverse_sqrt_spike(j.at("amplitude").get<double>(),
                                             j.value("resolution", 4096));
    throw std::invalid_argument("potential_from_json: unknown type " + type);
}

void save_free_ensemble(const FieldEnsemble& ens, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_free_ensemble: cannot open " + path.string());
    out << json{{"seed", ens.seed},
                {"k_max", ens.modes.k_max},
                {"kappa", ens.kappa},
                {"count", ens.size()}}
               .dump()
        << '\n';
    for (std::size_t i = 0; i < ens.size(); ++i)
        out << field_to_json(ens.field(i), ens.kappa).dump() << '\n';
}

FieldEnsemble load_free_ensemble(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_free_ensemble: cannot open " + path.string());
    std::string line;
    std::getline(in, line);
    const json hdr = json::parse(line);
    FieldEnsemble ens;
    ens.modes = ModeSet(hdr.at("k_max").get<int>());
    ens.kappa = hdr.at("kappa").get<double>();
    ens.seed = hdr.at("seed").get<std::uint64_t>();
    const std::size_t count = hdr.at("count").get<std::size_t>();
    ens.samples.resize(ens.modes.size(), static_cast<Eigen::Index>(count));
    for (std::size_t i = 0; i < count; ++i) {
        std::getline(in, line);
        ens.samples.col(static_cast<Eigen::Index>(i)) =
            field_from_json(json::parse(line)).first.coeffs;
    }
    return ens;
}

void save_gibbs_ensemble(const GibbsEnsemble& ens, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_gibbs_ensemble: cannot open " + path.string());
    out << json{{"seed", ens.seed},
                {"k_max", ens.modes.k_max},
                {"kappa", ens.kappa},
                {"count", ens.size()},
                {"potential", potential_to_json(ens.w)},
                {"K", ens.f.support_radius()},
                {"plateau", ens.f.plateau_fraction()},
                {"diagnostic_one", ens.f.is_diagnostic_one()},
                {"z", ens.z.value},
                {"z_se", ens.z.std_error}}
               .dump()
        << '\n';
    for (std::size_t i = 0; i < ens.size(); ++i) {
        json rec = field_to_json(ens.field(i), ens.kappa);
        rec["weight"] = ens.weights[static_cast<Eigen::Index>(i)];
        out << rec.dump() << '\n';
    }
}

GibbsEnsemble load_gibbs_ensemble(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_gibbs_ensemble: cannot open " + path.string());
    std::string line;
    std::getline(in, line);
    const json hdr = json::parse(line);
    GibbsEnsemble ens;
    ens.modes = ModeSet(hdr.at("k_max").get<int>());
    ens.kappa = hdr.at("kappa").get<double>();
    ens.seed = hdr.at("seed").get<std::uint64_t>();
    ens.w = potential_from_json(hdr.at("potential"));
    ens.f = hdr.at("diagnostic_one").get<bool>()
                ? CutoffFunction::diagnostic_one()
                : CutoffFunction::plateau_bump(hdr.at("K").get<double>(),
                                               hdr.at("plateau").get<double>());
    const std::size_t count = hdr.at("count").get<std::size_t>();
    ens.samples.resize(ens.modes.size(), static_cast<Eigen::Index>(count));
    ens.weights.resize(static_cast<Eigen::Index>(count));
    for (std::size_t i = 0; i < count; ++i) {
        std::getline(in, line);
        const json rec = json::parse(line);
        ens.samples.col(static_cast<Eigen::Index>(i)) = field_from_json(rec).first.coeffs;
        ens.weights[static_cast<Eigen::Index>(i)] = rec.at("weight").get<double>();
    }
    ens.z = mean_se(std::span<const double>(ens.weights.data(), count));
    return ens;
}

void save_block_operator(const BlockOperator& op, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_block_operator: cannot open " + path.string());
    out.write("NLSGBLK1", 8);
    const std::int64_t nb = static_cast<std::int64_t>(op.blocks.size());
    out.write(reinterpret_cast<const char*>(&nb), 8);
    for (std::size_t i = 0; i < op.blocks.size(); ++i) {
        const auto& blk = op.basis->blocks[i];
        const std::int64_t n = blk.n, mom = blk.momentum;
        const std::int64_t dim = static_cast<std::int64_t>(op.blocks[i].rows());
        out.write(reinterpret_cast<const char*>(&n), 8);
        out.write(reinterpret_cast<const char*>(&mom), 8);
        out.write(reinterpret_cast<const char*>(&dim), 8);
        // row-major complex doubles
        for (std::int64_t r = 0; r < dim; ++r)
            for (std::int64_t c = 0; c < dim; ++c) {
                const double re = op.blocks[i](r, c).real(), im = op.blocks[i](r, c).imag();
                out.write(reinterpret_cast<const char*>(&re), 8);
                out.write(reinterpret_cast<const char*>(&im), 8);
            }
    }
}

void write_estimates_csv(const std::filesystem::path& path,
                         const std::vector<std::tuple<std::string, double, double,
                                                      std::size_t, std::uint64_t>>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_estimates_csv: cannot open " + path.string());
    out << "name,value,std_error,n_samples,seed\n";
    char buf[64];
    for (const auto& [name, value, se, n, seed] : rows) {
        std::snprintf(buf, sizeof buf, "%.17g", value);
        out << name << ',' << buf << ',';
        std::snprintf(buf, sizeof buf, "%.17g", se);
        out << buf << ',' << n << ',' << seed << '\n';
    }
}

void write_report_csv(const ExperimentReport& rep, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_report_csv: cannot open " + path.string());
    out << "sweep_value,metric,estimate,std_error,runtime_s\n";
    char buf[64];
    for (const auto& pt : rep.points) {
        for (const auto& [name, value] : pt.metrics) {
            std::snprintf(buf, sizeof buf, "%.17g", pt.sweep_value);
            out << buf << ',' << name << ',';
            std::snprintf(buf, sizeof buf, "%.17g", value);
            out << buf << ',';
            const auto it = pt.errors.find(name);
            std::snprintf(buf, sizeof buf, "%.17g", it == pt.errors.end() ? 0.0 : it->second);
            out << buf << ',';
            std::snprintf(buf, sizeof buf, "%.6g", pt.runtime_s);
            out << buf << '\n';
        }
    }
}

json report_to_json(const ExperimentReport& rep) {
    json points = json::array();
    for (const auto& pt : rep.points) {
        json metrics = json::object(), errors = json::object();
        for (const auto& [k, v] : pt.metrics) metrics[k] = v;
        for (const auto& [k, v] : pt.errors) errors[k] = v;
        points.push_back({{"sweep_value", pt.sweep_value},
                          {"metrics", std::move(metrics)},
                          {"errors", std::move(errors)},
                          {"runtime_s", pt.runtime_s}});
    }
    json scenario = json::object();
    for (const auto& [k, v] : rep.scenario) scenario[k] = v;
    return json{{"experiment", rep.experiment},
                {"scenario", std::move(scenario)},
                {"points", std::move(points)},
                {"flags", rep.flags}};
}

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    EVP_DigestUpdate(ctx, data.data(), data.size());
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

json matrix_to_json(const Eigen::MatrixXcd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            row.push_back({m(r, c).real(), m(r, c).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace nlsgibbs::io
