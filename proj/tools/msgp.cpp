#include <CLI11.hpp>
#include <Eigen/Core>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <string>
#include <vector>

#include "msgp/io.hpp"
#include "msgp/pipeline.hpp"
#include "msgp/sensitivity.hpp"
#include "msgp/testfns.hpp"

using namespace msgp;
using nlohmann::json;

namespace {

// 0 = success, 1 = numerical failure, 2 = I/O or config error
int guarded(const std::function<void()>& load, const std::function<void()>& compute) {
    try {
        load();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    try {
        compute();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}

ModelArchive load_archive(const std::string& path) { return read_model_archive(path); }

std::vector<ChainResult> split_chains(const ModelArchive& archive) {
    const std::size_t nchains = archive.accept_rates.size();
    if (nchains == 0 || archive.draws.size() % nchains != 0)
        throw std::runtime_error("model archive does not contain evenly sized chains");
    const std::size_t per = archive.draws.size() / nchains;
    std::vector<ChainResult> chains(nchains);
    for (std::size_t c = 0; c < nchains; ++c) {
        chains[c].accept_rate = archive.accept_rates[c];
        chains[c].draws.assign(archive.draws.begin() + static_cast<long>(c * per),
                               archive.draws.begin() + static_cast<long>((c + 1) * per));
    }
    return chains;
}

ModelArchive fit_model(const RunConfig& config, const DesignMatrix& design,
                       const OutputMatrix& raw, std::uint64_t seed) {
    DesignMatrix scaled = scale_inputs(design);
    OutputMatrix standardized = standardize_outputs(raw);
    MsgpModel model = MsgpModel::build(scaled, standardized, config.kernel, config.basis);
    McmcConfig mcmc = config.mcmc;
    std::vector<std::uint64_t> seeds = mcmc.seeds;
    if (seeds.empty())
        for (int c = 0; c < mcmc.chains; ++c)
            seeds.push_back(split_seed(seed, static_cast<std::uint64_t>(c + 1)));
    std::vector<ChainResult> chains = run_parallel_chains(model, mcmc, mcmc.chains, seeds);
    ModelArchive archive;
    archive.config = config;
    archive.model = model;
    for (const auto& c : chains) {
        archive.accept_rates.push_back(c.accept_rate);
        archive.draws.insert(archive.draws.end(), c.draws.begin(), c.draws.end());
    }
    return archive;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multivariate sparse GP emulation and global sensitivity analysis"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    int threads = 0;
    std::string config_path;
    app.add_option("--seed", seed, "base random seed");
    app.add_option("--threads", threads, "worker thread cap (0 = library default)");
    app.add_option("--config", config_path, "run configuration JSON");
    app.fallthrough();  // allow the global flags after a subcommand name

    // design
    auto* cmd_design = app.add_subcommand("design", "generate a Latin hypercube design");
    std::string d_spec, d_out = "design.csv";
    long d_n = 128;
    bool d_optimize = false;
    cmd_design->add_option("--spec", d_spec, "variable spec JSON")->required();
    cmd_design->add_option("--n", d_n, "number of design points");
    cmd_design->add_flag("--optimize", d_optimize, "maximin hill-climb");
    cmd_design->add_option("--out", d_out, "output CSV path");

    // testfn
    auto* cmd_testfn = app.add_subcommand("testfn", "emit a benchmark bundle");
    std::string t_name = "sobol-g", t_out = "bench";
    std::vector<double> t_a = {0, 1, 4.5, 9, 99, 99, 99, 99};
    long t_n = 512, t_q = 100;
    cmd_testfn->add_option("--name", t_name, "sobol-g or arctan");
    cmd_testfn->add_option("--a", t_a, "g-function coefficients")->delimiter(',');
    cmd_testfn->add_option("--n", t_n, "number of design points");
    cmd_testfn->add_option("--q", t_q, "time steps (arctan)");
    cmd_testfn->add_option("--out", t_out, "output directory");

    // fit
    auto* cmd_fit = app.add_subcommand("fit", "fit the emulator by MCMC");
    std::string f_design, f_specs, f_outputs, f_out = "model.jsonl";
    cmd_fit->add_option("--design", f_design, "design CSV")->required();
    cmd_fit->add_option("--specs", f_specs, "variable spec JSON")->required();
    cmd_fit->add_option("--outputs", f_outputs, "outputs CSV")->required();
    cmd_fit->add_option("--out", f_out, "model archive path");

    // cv
    auto* cmd_cv = app.add_subcommand("cv", "cross-validate sparsity levels");
    std::string c_design, c_specs, c_outputs, c_out = "cv.json";
    int c_k = 5;
    std::vector<double> c_omegas = {0.8, 0.9, 0.95, 0.99};
    cmd_cv->add_option("--design", c_design, "design CSV")->required();
    cmd_cv->add_option("--specs", c_specs, "variable spec JSON")->required();
    cmd_cv->add_option("--outputs", c_outputs, "outputs CSV")->required();
    cmd_cv->add_option("--k", c_k, "number of folds");
    cmd_cv->add_option("--omegas", c_omegas, "sparsity levels")->delimiter(',');
    cmd_cv->add_option("--out", c_out, "report path");

    // predict
    auto* cmd_predict = app.add_subcommand("predict", "predict at new points");
    std::string p_model, p_design, p_out = "predictions.csv";
    cmd_predict->add_option("--model", p_model, "model archive")->required();
    cmd_predict->add_option("--design", p_design, "test design CSV (original units)")->required();
    cmd_predict->add_option("--out", p_out, "predictions CSV");

    // sa
    auto* cmd_sa = app.add_subcommand("sa", "sensitivity indices");
    std::string s_model, s_out = "indices.json";
    long s_s = 5000, s_max_draws = 0;
    cmd_sa->add_option("--model", s_model, "model archive")->required();
    cmd_sa->add_option("--s", s_s, "Monte Carlo sample size");
    cmd_sa->add_option("--max-draws", s_max_draws, "cap on posterior draws used (0 = all)");
    cmd_sa->add_option("--out", s_out, "index JSON path");

    // diag
    auto* cmd_diag = app.add_subcommand("diag", "convergence diagnostics");
    std::string g_model, g_out = "psrf.csv";
    cmd_diag->add_option("--model", g_model, "model archive")->required();
    cmd_diag->add_option("--out", g_out, "PSRF CSV path");

    CLI11_PARSE(app, argc, argv);
    if (threads > 0) Eigen::setNbThreads(threads);

    if (cmd_design->parsed()) {
        std::vector<VariableSpec> specs;
        return guarded([&] { specs = read_variable_specs(d_spec); },
                       [&] {
                           DesignMatrix cont = lhs_sample(specs, d_n, d_optimize, seed);
                           DesignMatrix full = mixed_design(cont, specs, split_seed(seed, 2));
                           write_design_csv(d_out, full);
                       });
    }

    if (cmd_testfn->parsed()) {
        return guarded([] {},
                       [&] {
                           std::filesystem::create_directories(t_out);
                           std::vector<VariableSpec> specs;
                           Eigen::MatrixXd outputs;
                           json oracle;
                           if (t_name == "sobol-g") {
                               const Eigen::Index p = static_cast<Eigen::Index>(t_a.size());
                               Eigen::VectorXd a(p);
                               for (Eigen::Index i = 0; i < p; ++i) a(i) = t_a[static_cast<std::size_t>(i)];
                               for (Eigen::Index i = 0; i < p; ++i)
                                   specs.push_back(VariableSpec::continuous("x" + std::to_string(i + 1), 0.0, 1.0));
                               DesignMatrix d = lhs_sample(specs, t_n, true, seed);
                               outputs.resize(t_n, 1);
                               for (Eigen::Index i = 0; i < t_n; ++i)
                                   outputs(i, 0) = sobol_g(d.values.row(i).transpose(), a);
                               SobolGOracle o = sobol_g_oracle(a);
                               json s = json::array(), st = json::array();
                               for (Eigen::Index i = 0; i < p; ++i) {
                                   s.push_back(o.S(i));
                                   st.push_back(o.St(i));
                               }
                               oracle["S"] = s;
                               oracle["St"] = st;
                               write_design_csv(t_out + "/design.csv", d);
                           } else if (t_name == "arctan") {
                               specs.push_back(VariableSpec::continuous("x1", -7.0, 7.0));
                               specs.push_back(VariableSpec::continuous("x2", -7.0, 7.0));
                               DesignMatrix d = lhs_sample(specs, t_n, true, seed);
                               outputs.resize(t_n, t_q);
                               for (Eigen::Index i = 0; i < t_n; ++i)
                                   outputs.row(i) = arctan_temporal(d.values.row(i).transpose(), t_q).transpose();
                               oracle["note"] = "run a direct Saltelli pass on the true function for reference values";
                               write_design_csv(t_out + "/design.csv", d);
                           } else {
                               throw std::runtime_error("unknown test function: " + t_name);
                           }
                           write_variable_specs(t_out + "/specs.json", specs);
                           OutputMatrix y;
                           y.values = outputs;
                           write_outputs_csv(t_out + "/outputs.csv", y);
                           std::ofstream(t_out + "/oracle.json") << oracle.dump(2) << "\n";
                           RunConfig rc;
                           rc.mcmc.iterations = 10000;
                           rc.mcmc.burn_in = 1000;
                           rc.mcmc.thin = 25;
                           write_run_config(t_out + "/run.json", rc);
                       });
    }

    if (cmd_fit->parsed()) {
        RunConfig config;
        DesignMatrix design;
        OutputMatrix raw;
        return guarded(
            [&] {
                if (config_path.empty()) throw std::runtime_error("fit requires --config");
                config = read_run_config(config_path);
                design = read_design_csv(f_design, read_variable_specs(f_specs));
                raw = read_outputs_csv(f_outputs);
            },
            [&] { write_model_archive(f_out, fit_model(config, design, raw, seed)); });
    }

    if (cmd_cv->parsed()) {
        RunConfig config;
        DesignMatrix design;
        OutputMatrix raw;
        return guarded(
            [&] {
                if (config_path.empty()) throw std::runtime_error("cv requires --config");
                config = read_run_config(config_path);
                design = read_design_csv(c_design, read_variable_specs(c_specs));
                raw = read_outputs_csv(c_outputs);
            },
            [&] {
                CvReport report =
                    cross_validate(scale_inputs(design), raw, config, c_k, c_omegas, seed);
                write_cv_report(c_out, report);
            });
    }

    if (cmd_predict->parsed()) {
        ModelArchive archive;
        DesignMatrix test;
        return guarded(
            [&] {
                archive = load_archive(p_model);
                test = read_design_csv(p_design, archive.model.design.specs);
            },
            [&] {
                DesignMatrix scaled_test = scale_inputs(test);
                // posterior-mean tau for the predictive scale
                Eigen::VectorXd tau_mean =
                    Eigen::VectorXd::Zero(archive.model.p());
                for (const auto& d : archive.draws) tau_mean += d.tau.tau;
                tau_mean /= static_cast<double>(archive.draws.size());
                CutoffVector tau;
                tau.tau = tau_mean;
                tau.c = archive.model.cutoff_c;
                tau.omega = archive.model.kernel.omega;
                PredictiveDistribution pred = predict_matrix_t(archive.model, tau, scaled_test);
                Eigen::MatrixXd mean =
                    destandardize_predictions(pred.location, archive.model.outputs);
                const Eigen::Index m = archive.model.m();
                Eigen::MatrixXd table(test.n(), 3 * m);
                std::vector<std::string> header;
                for (Eigen::Index s = 0; s < m; ++s) {
                    header.push_back("y" + std::to_string(s + 1) + "_mean");
                    header.push_back("y" + std::to_string(s + 1) + "_lo");
                    header.push_back("y" + std::to_string(s + 1) + "_hi");
                    for (Eigen::Index i = 0; i < test.n(); ++i) {
                        auto [lo, hi] = pred.marginal_interval(i, s);
                        const double mu = archive.model.outputs.column_means(s);
                        const double sd = archive.model.outputs.column_sds(s);
                        table(i, 3 * s) = mean(i, s);
                        table(i, 3 * s + 1) = mu + sd * lo;
                        table(i, 3 * s + 2) = mu + sd * hi;
                    }
                }
                write_matrix_csv(p_out, table, header);
            });
    }

    if (cmd_sa->parsed()) {
        ModelArchive archive;
        return guarded([&] { archive = load_archive(s_model); },
                       [&] {
                           std::vector<PosteriorDraw> draws = archive.draws;
                           if (s_max_draws > 0 &&
                               draws.size() > static_cast<std::size_t>(s_max_draws)) {
                               // evenly spaced subsample keeps chain coverage
                               std::vector<PosteriorDraw> kept;
                               const double step = static_cast<double>(draws.size()) /
                                                   static_cast<double>(s_max_draws);
                               for (long i = 0; i < s_max_draws; ++i)
                                   kept.push_back(draws[static_cast<std::size_t>(
                                       static_cast<double>(i) * step)]);
                               draws = std::move(kept);
                           }
                           SaltelliMatrices mats = build_saltelli(
                               archive.model.p(), s_s, split_seed(seed, 97));
                           IndexPosterior posterior =
                               index_posterior(archive.model, draws, mats);
                           std::ofstream(s_out)
                               << index_posterior_json(posterior, archive.config.digest()) << "\n";
                       });
    }

    if (cmd_diag->parsed()) {
        ModelArchive archive;
        return guarded([&] { archive = load_archive(g_model); },
                       [&] {
                           PsrfReport psrf = compute_psrf(split_chains(archive));
                           std::ofstream f(g_out);
                           f << "name,point,upper\n";
                           for (std::size_t i = 0; i < psrf.names.size(); ++i)
                               f << psrf.names[i] << ","
                                 << psrf.point(static_cast<Eigen::Index>(i)) << ","
                                 << psrf.upper(static_cast<Eigen::Index>(i)) << "\n";
                       });
    }

    return 0;
}
