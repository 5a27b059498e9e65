#include "msgp/io.hpp"

#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>
#include <stdexcept>

namespace msgp {

using nlohmann::json;

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows) {
    if (!rows.is_array()) throw std::runtime_error("expected a matrix (array of arrays)");
    const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
    if (n == 0) return {};
    const Eigen::Index m = static_cast<Eigen::Index>(rows[0].size());
    Eigen::MatrixXd out(n, m);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (static_cast<Eigen::Index>(rows[i].size()) != m)
            throw std::runtime_error("ragged matrix rows in JSON");
        for (Eigen::Index j = 0; j < m; ++j) out(i, j) = rows[i][j].get<double>();
    }
    return out;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

Eigen::VectorXd vector_from_json(const json& arr) {
    Eigen::VectorXd v(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) v(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
    return v;
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
    for (const auto& [key, _] : obj.items())
        if (!allowed.count(key))
            throw std::runtime_error("unknown key \"" + key + "\" in " + where);
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write file: " + path);
    return f;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read file: " + path);
    return f;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

json kernel_to_json(const KernelSpec& k) {
    json out;
    out["family"] = to_string(k.family);
    out["alpha"] = k.alpha;
    out["nu"] = k.nu;
    out["taper_k"] = k.taper_k;
    out["taper_s"] = k.taper_s;
    out["omega"] = k.omega;
    out["nugget"] = k.nugget;
    out["literal_quantile"] = k.literal_quantile;
    if (k.phi.size()) out["phi"] = vector_to_json(k.phi);
    return out;
}

KernelSpec kernel_from_json(const json& obj) {
    reject_unknown(obj, {"family", "alpha", "nu", "taper_k", "taper_s", "phi", "omega", "nugget",
                         "literal_quantile"},
                   "kernel");
    KernelSpec k;
    if (obj.contains("family")) k.family = kernel_family_from_string(obj["family"].get<std::string>());
    if (obj.contains("alpha")) k.alpha = obj["alpha"].get<double>();
    if (obj.contains("nu")) k.nu = obj["nu"].get<double>();
    if (obj.contains("taper_k")) k.taper_k = obj["taper_k"].get<int>();
    if (obj.contains("taper_s")) k.taper_s = obj["taper_s"].get<int>();
    if (obj.contains("omega")) k.omega = obj["omega"].get<double>();
    if (obj.contains("nugget")) k.nugget = obj["nugget"].get<double>();
    if (obj.contains("literal_quantile")) k.literal_quantile = obj["literal_quantile"].get<bool>();
    if (obj.contains("phi")) k.phi = vector_from_json(obj["phi"]);
    return k;
}

json mcmc_to_json(const McmcConfig& c) {
    json out;
    out["iterations"] = c.iterations;
    out["burn_in"] = c.burn_in;
    out["thin"] = c.thin;
    out["chains"] = c.chains;
    out["target_accept"] = c.target_accept;
    out["gamma"] = c.gamma;
    out["init_upsilon"] = c.init_upsilon;
    out["seeds"] = c.seeds;
    return out;
}

McmcConfig mcmc_from_json(const json& obj) {
    reject_unknown(obj, {"iterations", "burn_in", "thin", "chains", "target_accept", "gamma",
                         "init_upsilon", "seeds"},
                   "mcmc");
    McmcConfig c;
    if (obj.contains("iterations")) c.iterations = obj["iterations"].get<long>();
    if (obj.contains("burn_in")) c.burn_in = obj["burn_in"].get<long>();
    if (obj.contains("thin")) c.thin = obj["thin"].get<long>();
    if (obj.contains("chains")) c.chains = obj["chains"].get<int>();
    if (obj.contains("target_accept")) c.target_accept = obj["target_accept"].get<double>();
    if (obj.contains("gamma")) c.gamma = obj["gamma"].get<double>();
    if (obj.contains("init_upsilon")) c.init_upsilon = obj["init_upsilon"].get<double>();
    if (obj.contains("seeds")) c.seeds = obj["seeds"].get<std::vector<std::uint64_t>>();
    return c;
}

json config_to_json(const RunConfig& config) {
    json out;
    out["kernel"] = kernel_to_json(config.kernel);
    out["basis"] = to_string(config.basis);
    out["mcmc"] = mcmc_to_json(config.mcmc);
    json prior;
    prior["lambda0"] = config.prior_lambda0;
    prior["delta0"] = config.prior_delta0;
    out["prior"] = prior;
    return out;
}

}  // namespace

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& values,
                      const std::vector<std::string>& header) {
    if (static_cast<Eigen::Index>(header.size()) != values.cols())
        throw std::invalid_argument("write_matrix_csv: header width mismatch");
    auto f = open_out(path);
    for (std::size_t j = 0; j < header.size(); ++j) f << (j ? "," : "") << header[j];
    f << "\n";
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        for (Eigen::Index j = 0; j < values.cols(); ++j) f << (j ? "," : "") << fmt(values(i, j));
        f << "\n";
    }
}

Eigen::MatrixXd read_matrix_csv(const std::string& path, std::vector<std::string>* header) {
    auto f = open_in(path);
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error("empty CSV: " + path);
    std::vector<std::string> head = split_csv_line(line);
    if (header) *header = head;
    std::vector<std::vector<double>> rows;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != head.size())
            throw std::runtime_error("CSV row width mismatch in " + path);
        std::vector<double> row;
        row.reserve(fields.size());
        for (const auto& s : fields) row.push_back(std::stod(s));
        rows.push_back(std::move(row));
    }
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(head.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < head.size(); ++j)
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return out;
}

void write_design_csv(const std::string& path, const DesignMatrix& design) {
    std::vector<std::string> header;
    for (const auto& s : design.specs) header.push_back(s.name);
    write_matrix_csv(path, design.values, header);
}

DesignMatrix read_design_csv(const std::string& path, const std::vector<VariableSpec>& specs,
                             bool scaled) {
    std::vector<std::string> header;
    Eigen::MatrixXd values = read_matrix_csv(path, &header);
    if (header.size() != specs.size())
        throw std::runtime_error("design CSV column count does not match the variable specs");
    for (std::size_t j = 0; j < specs.size(); ++j)
        if (header[j] != specs[j].name)
            throw std::runtime_error("design CSV column \"" + header[j] +
                                     "\" does not match spec variable \"" + specs[j].name + "\"");
    DesignMatrix d;
    d.values = std::move(values);
    d.specs = specs;
    d.scaled = scaled;
    return d;
}

void write_outputs_csv(const std::string& path, const OutputMatrix& outputs) {
    std::vector<std::string> header;
    for (Eigen::Index j = 0; j < outputs.m(); ++j) header.push_back("y" + std::to_string(j + 1));
    write_matrix_csv(path, outputs.values, header);
}

OutputMatrix read_outputs_csv(const std::string& path) {
    OutputMatrix out;
    out.values = read_matrix_csv(path);
    return out;
}

void write_variable_specs(const std::string& path, const std::vector<VariableSpec>& specs) {
    json arr = json::array();
    for (const auto& s : specs) {
        json v;
        v["name"] = s.name;
        if (s.kind == VariableKind::Continuous) {
            v["kind"] = "continuous";
            v["lower"] = s.lower;
            v["upper"] = s.upper;
        } else {
            v["kind"] = "categorical";
            v["levels"] = s.levels;
        }
        arr.push_back(std::move(v));
    }
    open_out(path) << arr.dump(2) << "\n";
}

std::vector<VariableSpec> read_variable_specs(const std::string& path) {
    json arr = json::parse(open_in(path));
    if (!arr.is_array()) throw std::runtime_error("variable spec file must be a JSON array");
    std::vector<VariableSpec> specs;
    for (const auto& v : arr) {
        reject_unknown(v, {"name", "kind", "lower", "upper", "levels"}, "variable spec");
        const std::string kind = v.at("kind").get<std::string>();
        if (kind == "continuous") {
            specs.push_back(VariableSpec::continuous(v.at("name").get<std::string>(),
                                                     v.at("lower").get<double>(),
                                                     v.at("upper").get<double>()));
        } else if (kind == "categorical") {
            specs.push_back(VariableSpec::categorical(
                v.at("name").get<std::string>(), v.at("levels").get<std::vector<std::string>>()));
        } else {
            throw std::runtime_error("unknown variable kind: " + kind);
        }
    }
    return specs;
}

std::string RunConfig::canonical_json() const { return config_to_json(*this).dump(); }

std::string RunConfig::digest() const {
    // FNV-1a, enough to tie artifacts to the config that produced them
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : canonical_json()) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

RunConfig run_config_from_json(const std::string& text) {
    json obj = json::parse(text);
    reject_unknown(obj, {"kernel", "basis", "mcmc", "prior"}, "run config");
    RunConfig config;
    if (obj.contains("kernel")) config.kernel = kernel_from_json(obj["kernel"]);
    if (obj.contains("basis")) config.basis = basis_kind_from_string(obj["basis"].get<std::string>());
    if (obj.contains("mcmc")) config.mcmc = mcmc_from_json(obj["mcmc"]);
    if (obj.contains("prior")) {
        reject_unknown(obj["prior"], {"lambda0", "delta0"}, "prior");
        if (obj["prior"].contains("lambda0")) config.prior_lambda0 = obj["prior"]["lambda0"].get<double>();
        if (obj["prior"].contains("delta0")) config.prior_delta0 = obj["prior"]["delta0"].get<double>();
    }
    config.kernel.validate();
    config.mcmc.validate();
    return config;
}

RunConfig read_run_config(const std::string& path) {
    std::stringstream ss;
    ss << open_in(path).rdbuf();
    return run_config_from_json(ss.str());
}

void write_run_config(const std::string& path, const RunConfig& config) {
    open_out(path) << config_to_json(config).dump(2) << "\n";
}

void write_model_archive(const std::string& path, const ModelArchive& archive) {
    auto f = open_out(path);
    const MsgpModel& model = archive.model;
    json head;
    head["type"] = "msgp-model";
    head["config"] = config_to_json(archive.config);
    head["digest"] = archive.config.digest();
    head["cutoff_c"] = model.cutoff_c;
    head["basis"] = to_string(model.basis_kind);
    head["design"] = matrix_to_json(model.design.values);
    head["design_scaled"] = model.design.scaled;
    json specs = json::array();
    {
        std::stringstream ss;
        // reuse the sidecar writer's schema inline
        for (const auto& s : model.design.specs) {
            json v;
            v["name"] = s.name;
            if (s.kind == VariableKind::Continuous) {
                v["kind"] = "continuous";
                v["lower"] = s.lower;
                v["upper"] = s.upper;
            } else {
                v["kind"] = "categorical";
                v["levels"] = s.levels;
            }
            specs.push_back(std::move(v));
        }
    }
    head["specs"] = specs;
    head["outputs"] = matrix_to_json(model.outputs.values);
    head["output_means"] = vector_to_json(model.outputs.column_means);
    head["output_sds"] = vector_to_json(model.outputs.column_sds);
    head["outputs_standardized"] = model.outputs.standardized;
    head["accept_rates"] = archive.accept_rates;
    head["draws"] = archive.draws.size();
    f << head.dump() << "\n";
    for (const auto& draw : archive.draws) {
        json d;
        d["B"] = matrix_to_json(draw.B);
        d["Sigma"] = matrix_to_json(draw.Sigma);
        d["tau"] = vector_to_json(draw.tau.tau);
        f << d.dump() << "\n";
    }
}

ModelArchive read_model_archive(const std::string& path) {
    auto f = open_in(path);
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error("empty model archive: " + path);
    json head = json::parse(line);
    if (head.value("type", "") != "msgp-model")
        throw std::runtime_error("not a model archive: " + path);

    ModelArchive archive;
    archive.config = run_config_from_json(head["config"].dump());
    if (head.contains("accept_rates"))
        archive.accept_rates = head["accept_rates"].get<std::vector<double>>();

    MsgpModel& model = archive.model;
    model.design.values = matrix_from_json(head["design"]);
    model.design.scaled = head.value("design_scaled", true);
    for (const auto& v : head["specs"]) {
        if (v["kind"] == "continuous")
            model.design.specs.push_back(VariableSpec::continuous(
                v["name"].get<std::string>(), v["lower"].get<double>(), v["upper"].get<double>()));
        else
            model.design.specs.push_back(VariableSpec::categorical(
                v["name"].get<std::string>(), v["levels"].get<std::vector<std::string>>()));
    }
    model.outputs.values = matrix_from_json(head["outputs"]);
    model.outputs.column_means = vector_from_json(head["output_means"]);
    model.outputs.column_sds = vector_from_json(head["output_sds"]);
    model.outputs.standardized = head.value("outputs_standardized", true);
    model.basis_kind = basis_kind_from_string(head["basis"].get<std::string>());
    model.basis = build_basis(model.design, model.basis_kind);
    model.kernel = archive.config.kernel;
    model.cutoff_c = head["cutoff_c"].get<double>();
    model.prior = MniwPrior::vague(model.q(), model.m());
    if (archive.config.prior_lambda0 > 0.0)
        model.prior.Lambda0 =
            archive.config.prior_lambda0 * Eigen::MatrixXd::Identity(model.q(), model.q());
    if (archive.config.prior_delta0 > 0.0) model.prior.delta0 = archive.config.prior_delta0;

    const std::size_t ndraws = head.value("draws", std::size_t{0});
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        json d = json::parse(line);
        PosteriorDraw draw;
        draw.B = matrix_from_json(d["B"]);
        draw.Sigma = matrix_from_json(d["Sigma"]);
        draw.tau.tau = vector_from_json(d["tau"]);
        draw.tau.c = model.cutoff_c;
        draw.tau.omega = model.kernel.omega;
        archive.draws.push_back(std::move(draw));
    }
    if (ndraws != archive.draws.size())
        throw std::runtime_error("model archive truncated: expected " + std::to_string(ndraws) +
                                 " draws, found " + std::to_string(archive.draws.size()));
    return archive;
}

std::string cv_report_json(const CvReport& report) {
    json out;
    out["digest"] = report.config_digest;
    json levels = json::array();
    for (std::size_t i = 0; i < report.omegas.size(); ++i) {
        json lvl;
        lvl["omega"] = report.omegas[i];
        lvl["fit_seconds"] = report.fit_seconds[i];
        lvl["p"] = vector_to_json(report.aggregate_p[i]);
        lvl["rho"] = vector_to_json(report.aggregate_rho[i]);
        json folds = json::array();
        for (std::size_t k = 0; k < report.fold_p[i].size(); ++k) {
            json fold;
            fold["p"] = vector_to_json(report.fold_p[i][k]);
            fold["rho"] = vector_to_json(report.fold_rho[i][k]);
            folds.push_back(std::move(fold));
        }
        lvl["folds"] = folds;
        levels.push_back(std::move(lvl));
    }
    out["levels"] = levels;
    return out.dump(2);
}

void write_cv_report(const std::string& path, const CvReport& report) {
    open_out(path) << cv_report_json(report) << "\n";
}

}  // namespace msgp
