#include "msgp/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <numeric>
#include <stdexcept>

namespace msgp {

using nlohmann::json;

namespace {

std::vector<std::vector<Eigen::Index>> make_folds(Eigen::Index n, int k, std::uint64_t seed) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    Rng rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<std::vector<Eigen::Index>> folds(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < idx.size(); ++i) folds[i % static_cast<std::size_t>(k)].push_back(idx[i]);
    return folds;
}

DesignMatrix subset_design(const DesignMatrix& d, const std::vector<Eigen::Index>& rows) {
    DesignMatrix out;
    out.specs = d.specs;
    out.scaled = d.scaled;
    out.values.resize(static_cast<Eigen::Index>(rows.size()), d.p());
    for (std::size_t i = 0; i < rows.size(); ++i) out.values.row(static_cast<Eigen::Index>(i)) = d.values.row(rows[i]);
    return out;
}

Eigen::MatrixXd subset_rows(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
    return out;
}

json summary_to_json(const IndexSummary& s) {
    json out;
    auto arr = [](const Eigen::VectorXd& v) {
        json a = json::array();
        for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
        return a;
    };
    out["mean"] = arr(s.mean);
    out["sd"] = arr(s.sd);
    out["q025"] = arr(s.q025);
    out["q975"] = arr(s.q975);
    return out;
}

}  // namespace

CvReport cross_validate(const DesignMatrix& scaled_design, const OutputMatrix& raw_outputs,
                        const RunConfig& config, int folds, const std::vector<double>& omegas,
                        std::uint64_t seed) {
    if (folds < 2) throw std::invalid_argument("cross_validate: need at least 2 folds");
    const Eigen::Index n = scaled_design.n();
    if (n < 2 * folds) throw std::invalid_argument("cross_validate: too few rows for the fold count");
    if (omegas.empty()) throw std::invalid_argument("cross_validate: no sparsity levels");

    const auto fold_rows = make_folds(n, folds, seed);
    const Eigen::Index m = raw_outputs.m();

    CvReport report;
    report.omegas = omegas;
    report.config_digest = config.digest();

    for (std::size_t w = 0; w < omegas.size(); ++w) {
        const double omega = omegas[w];
        KernelSpec kernel = config.kernel;
        kernel.omega = omega;
        std::vector<Eigen::VectorXd> fold_p, fold_rho;
        Eigen::VectorXd sse_total = Eigen::VectorXd::Zero(m);
        Eigen::VectorXd sst_total = Eigen::VectorXd::Zero(m);
        Eigen::Index held_total = 0;
        double seconds = 0.0;

        for (int k = 0; k < folds; ++k) {
            std::vector<Eigen::Index> train_rows;
            for (int k2 = 0; k2 < folds; ++k2)
                if (k2 != k)
                    train_rows.insert(train_rows.end(), fold_rows[static_cast<std::size_t>(k2)].begin(),
                                      fold_rows[static_cast<std::size_t>(k2)].end());
            const auto& test_rows = fold_rows[static_cast<std::size_t>(k)];

            DesignMatrix train_d = subset_design(scaled_design, train_rows);
            DesignMatrix test_d = subset_design(scaled_design, test_rows);
            OutputMatrix train_y;
            train_y.values = subset_rows(raw_outputs.values, train_rows);
            OutputMatrix train_std = standardize_outputs(train_y);

            McmcConfig cv_mcmc = config.mcmc;
            cv_mcmc.iterations = std::min<long>(config.mcmc.iterations, 400);
            cv_mcmc.burn_in = std::min<long>(config.mcmc.burn_in, cv_mcmc.iterations / 4);
            cv_mcmc.thin = std::min<long>(config.mcmc.thin, 10);
            cv_mcmc.fix_tau = false;
            cv_mcmc.seeds.clear();

            const auto t0 = std::chrono::steady_clock::now();
            MsgpModel model = MsgpModel::build(train_d, train_std, kernel, config.basis);
            ChainResult chain = run_chain(
                model, cv_mcmc,
                split_seed(seed, static_cast<std::uint64_t>(w * static_cast<std::size_t>(folds) +
                                                            static_cast<std::size_t>(k) + 1)));
            CutoffVector tau = CutoffVector::centered(model.cutoff_c, model.p(), omega);
            if (!chain.draws.empty()) {
                Eigen::VectorXd mean_tau = Eigen::VectorXd::Zero(model.p());
                for (const auto& draw : chain.draws) mean_tau += draw.tau.tau;
                tau.tau = mean_tau / static_cast<double>(chain.draws.size());
            }
            PredictiveDistribution pred = predict_matrix_t(model, tau, test_d);
            seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

            // held-out outputs on the fold-training standardized scale
            Eigen::MatrixXd test_y = subset_rows(raw_outputs.values, test_rows);
            for (Eigen::Index s = 0; s < m; ++s)
                test_y.col(s) =
                    (test_y.col(s).array() - train_std.column_means(s)) / train_std.column_sds(s);

            const Eigen::MatrixXd resid = pred.location - test_y;
            Eigen::VectorXd p(m), rho(m);
            for (Eigen::Index s = 0; s < m; ++s) {
                const double sse = resid.col(s).squaredNorm();
                const double sst = test_y.col(s).squaredNorm();  // training mean is 0 here
                rho(s) = std::sqrt(sse / static_cast<double>(test_y.rows()));
                p(s) = sst > 0.0 ? 1.0 - sse / sst : 0.0;
                sse_total(s) += sse;
                sst_total(s) += sst;
            }
            held_total += test_y.rows();
            fold_p.push_back(std::move(p));
            fold_rho.push_back(std::move(rho));
        }

        Eigen::VectorXd agg_p(m), agg_rho(m);
        for (Eigen::Index s = 0; s < m; ++s) {
            agg_p(s) = sst_total(s) > 0.0 ? 1.0 - sse_total(s) / sst_total(s) : 0.0;
            agg_rho(s) = std::sqrt(sse_total(s) / static_cast<double>(held_total));
        }
        report.fold_p.push_back(std::move(fold_p));
        report.fold_rho.push_back(std::move(fold_rho));
        report.aggregate_p.push_back(std::move(agg_p));
        report.aggregate_rho.push_back(std::move(agg_rho));
        report.fit_seconds.push_back(seconds);
    }
    return report;
}

OutputMatrix aggregate_outputs(const OutputMatrix& outputs, const std::vector<int>& groups) {
    const Eigen::Index m = outputs.m();
    if (static_cast<Eigen::Index>(groups.size()) != m)
        throw std::invalid_argument("aggregate_outputs: every output column needs a group");
    const int ngroups = groups.empty() ? 0 : *std::max_element(groups.begin(), groups.end()) + 1;
    std::vector<int> counts(static_cast<std::size_t>(ngroups), 0);
    for (int g : groups) {
        if (g < 0 || g >= ngroups) throw std::invalid_argument("aggregate_outputs: bad group id");
        counts[static_cast<std::size_t>(g)]++;
    }
    for (int c : counts)
        if (c == 0) throw std::invalid_argument("aggregate_outputs: empty group");

    OutputMatrix out;
    out.values = Eigen::MatrixXd::Zero(outputs.n(), ngroups);
    for (Eigen::Index j = 0; j < m; ++j)
        out.values.col(groups[static_cast<std::size_t>(j)]) += outputs.values.col(j);
    for (int g = 0; g < ngroups; ++g)
        out.values.col(g) /= static_cast<double>(counts[static_cast<std::size_t>(g)]);
    return out;
}

std::string index_posterior_json(const IndexPosterior& posterior, const std::string& digest) {
    json out;
    out["digest"] = digest;
    out["first_order"] = summary_to_json(posterior.S);
    out["total"] = summary_to_json(posterior.St);
    out["projection"] = summary_to_json(posterior.P);
    out["projection_total"] = summary_to_json(posterior.Pt);
    out["correlation_floored"] = posterior.correlation_floored;

    // per-output posterior means of the univariate indices
    if (!posterior.per_draw.empty()) {
        const Eigen::Index p = posterior.per_draw.front().univariate.S.rows();
        const Eigen::Index m = posterior.per_draw.front().univariate.S.cols();
        Eigen::MatrixXd s_mean = Eigen::MatrixXd::Zero(p, m);
        Eigen::MatrixXd st_mean = Eigen::MatrixXd::Zero(p, m);
        for (const auto& d : posterior.per_draw) {
            s_mean += d.univariate.S;
            st_mean += d.univariate.St;
        }
        s_mean /= static_cast<double>(posterior.per_draw.size());
        st_mean /= static_cast<double>(posterior.per_draw.size());
        json per_output = json::array();
        for (Eigen::Index j = 0; j < p; ++j) {
            json row;
            json s = json::array(), st = json::array();
            for (Eigen::Index k = 0; k < m; ++k) {
                s.push_back(s_mean(j, k));
                st.push_back(st_mean(j, k));
            }
            row["S"] = s;
            row["St"] = st;
            per_output.push_back(std::move(row));
        }
        out["per_output_mean"] = per_output;
    }
    return out.dump(2);
}

int run_pipeline(const PipelineOptions& options) {
    std::string stage = "config";
    try {
        RunConfig config = read_run_config(options.config_path);

        stage = "design";
        std::vector<VariableSpec> specs = read_variable_specs(options.specs_path);
        DesignMatrix design = read_design_csv(options.design_path, specs);
        for (const auto& s : specs) s.validate();
        DesignMatrix scaled = scale_inputs(design);

        stage = "outputs";
        OutputMatrix raw = read_outputs_csv(options.outputs_path);
        if (raw.n() != scaled.n())
            throw std::runtime_error("design and output row counts differ");

        std::filesystem::create_directories(options.out_dir);

        try {
            stage = "standardize";
            OutputMatrix standardized = standardize_outputs(raw);

            stage = "fit";
            MsgpModel model = MsgpModel::build(scaled, standardized, config.kernel, config.basis);
            McmcConfig mcmc = config.mcmc;
            std::vector<std::uint64_t> seeds = mcmc.seeds;
            if (seeds.empty())
                for (int c = 0; c < mcmc.chains; ++c)
                    seeds.push_back(split_seed(options.seed, static_cast<std::uint64_t>(c + 1)));
            std::vector<ChainResult> chains = run_parallel_chains(model, mcmc, mcmc.chains, seeds);

            ModelArchive archive;
            archive.config = config;
            archive.model = model;
            for (const auto& c : chains) {
                archive.accept_rates.push_back(c.accept_rate);
                archive.draws.insert(archive.draws.end(), c.draws.begin(), c.draws.end());
            }
            write_model_archive(options.out_dir + "/model.jsonl", archive);

            stage = "diag";
            PsrfReport psrf = compute_psrf(chains);
            std::ofstream pf(options.out_dir + "/psrf.csv");
            pf << "name,point,upper\n";
            for (std::size_t i = 0; i < psrf.names.size(); ++i)
                pf << psrf.names[i] << "," << psrf.point(static_cast<Eigen::Index>(i)) << ","
                   << psrf.upper(static_cast<Eigen::Index>(i)) << "\n";

            stage = "sa";
            SaltelliMatrices mats =
                build_saltelli(model.p(), options.saltelli_s, split_seed(options.seed, 97));
            IndexPosterior posterior = index_posterior(model, archive.draws, mats);
            std::ofstream jf(options.out_dir + "/indices.json");
            jf << index_posterior_json(posterior, config.digest()) << "\n";
        } catch (const std::exception& e) {
            std::fprintf(stderr, "error [%s]: %s\n", stage.c_str(), e.what());
            return 1;
        }
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error [%s]: %s\n", stage.c_str(), e.what());
        return 2;
    }
}

}  // namespace msgp
