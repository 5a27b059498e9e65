#include "msgp/mcmc.hpp"

#include <algorithm>
#include <boost/math/distributions/fisher_f.hpp>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <set>
#include <stdexcept>
#include <thread>

namespace msgp {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

}  // namespace

Eigen::VectorXd SimplexTransform::to_simplex(const Eigen::VectorXd& z) const {
    Eigen::VectorXd tau(d_);
    double rem = 1.0;
    for (Eigen::Index k = 0; k < d_; ++k) {
        const double v = sigmoid(z(k) - std::log(static_cast<double>(d_ - k)));
        tau(k) = c_ * rem * v;
        rem *= (1.0 - v);
    }
    return tau;
}

Eigen::VectorXd SimplexTransform::to_unconstrained(const Eigen::VectorXd& tau) const {
    Eigen::VectorXd z(d_);
    double rem = 1.0;
    for (Eigen::Index k = 0; k < d_; ++k) {
        const double w = tau(k) / c_;
        const double v = std::clamp(w / rem, 1e-12, 1.0 - 1e-12);
        z(k) = logit(v) + std::log(static_cast<double>(d_ - k));
        rem -= w;
    }
    return z;
}

double SimplexTransform::log_jacobian(const Eigen::VectorXd& z) const {
    double lj = 0.0;
    double rem = 1.0;
    for (Eigen::Index k = 0; k < d_; ++k) {
        const double v = sigmoid(z(k) - std::log(static_cast<double>(d_ - k)));
        lj += std::log(v) + std::log1p(-v) + std::log(rem);
        rem *= (1.0 - v);
    }
    return lj;
}

bool chol_rank_one(Eigen::MatrixXd& L, Eigen::VectorXd x, double sign) {
    const Eigen::Index d = L.rows();
    for (Eigen::Index k = 0; k < d; ++k) {
        const double a = L(k, k);
        const double r2 = a * a + sign * x(k) * x(k);
        if (!(r2 > 0.0)) return false;
        const double r = std::sqrt(r2);
        const double c = r / a;
        const double s = x(k) / a;
        L(k, k) = r;
        for (Eigen::Index i = k + 1; i < d; ++i) {
            L(i, k) = (L(i, k) + sign * s * x(i)) / c;
            x(i) = c * x(i) - s * L(i, k);
        }
    }
    return true;
}

RamState RamState::init(Eigen::Index d, double target_accept, double gamma, double scale) {
    RamState s;
    s.z = Eigen::VectorXd::Zero(d);
    s.chol = scale * Eigen::MatrixXd::Identity(d, d);
    s.step = 0;
    s.target_accept = target_accept;
    s.gamma = gamma;
    return s;
}

bool ram_step(RamState& state, double& log_target_value,
              const std::function<double(const Eigen::VectorXd&)>& log_target, Rng& rng,
              bool adapt) {
    const Eigen::Index d = state.z.size();
    state.step += 1;
    const Eigen::VectorXd u = randn_vector(rng, d);
    const Eigen::VectorXd proposal =
        state.z + state.chol.triangularView<Eigen::Lower>() * u;
    const double lt_prop = log_target(proposal);
    double alpha = 0.0;
    if (std::isfinite(lt_prop))
        alpha = std::min(1.0, std::exp(std::min(0.0, lt_prop - log_target_value)));
    const bool accepted = rand_uniform(rng) < alpha;
    if (accepted) {
        state.z = proposal;
        log_target_value = lt_prop;
    }
    if (adapt) {
        const double omega = std::pow(static_cast<double>(state.step), -state.gamma);
        const double coef = omega * (alpha - state.target_accept);
        const double unorm = u.norm();
        if (unorm > 0.0 && coef != 0.0) {
            Eigen::VectorXd v = state.chol.triangularView<Eigen::Lower>() * u;
            v *= std::sqrt(std::abs(coef)) / unorm;
            if (!chol_rank_one(state.chol, v, coef > 0.0 ? 1.0 : -1.0)) {
                // Downdate lost positive definiteness; rebuild from the product.
                Eigen::MatrixXd prod =
                    state.chol * state.chol.transpose() - v * v.transpose();
                Eigen::LLT<Eigen::MatrixXd> llt(prod);
                if (llt.info() == Eigen::Success)
                    state.chol = llt.matrixL();
                // else keep the previous factor
            }
        }
    }
    return accepted;
}

void McmcConfig::validate() const {
    if (iterations < 0 || burn_in < 0 || thin <= 0)
        throw std::invalid_argument("mcmc config: invalid iteration/burn-in/thin values");
    if (burn_in > iterations) throw std::invalid_argument("mcmc config: burn-in exceeds iterations");
    if (!(target_accept > 0.0 && target_accept < 1.0))
        throw std::invalid_argument("mcmc config: target_accept must lie in (0, 1)");
    if (!(gamma > 0.0 && gamma <= 1.0))
        throw std::invalid_argument("mcmc config: gamma must lie in (0, 1]");
    if (chains < 1) throw std::invalid_argument("mcmc config: need at least one chain");
}

namespace {

struct TargetEval {
    double log_target = -std::numeric_limits<double>::infinity();
    std::optional<ConjugateStats> stats;
};

TargetEval eval_target(const MsgpModel& model, const SimplexTransform& transform,
                       const Eigen::VectorXd& z) {
    TargetEval out;
    CutoffVector cv;
    cv.c = model.cutoff_c;
    cv.omega = model.kernel.omega;
    cv.tau = transform.to_simplex(z);
    try {
        ConjugateStats stats = conjugate_stats(model, cv);
        const double m = static_cast<double>(model.m());
        out.log_target = -0.5 * m * stats.log_det_R + 0.5 * m * stats.log_det_LambdaHat -
                         0.5 * (stats.delta_hat + m - 1.0) * stats.log_det_Shat +
                         transform.log_jacobian(z);
        out.stats = std::move(stats);
    } catch (const std::runtime_error&) {
        // non-PD correlation: reject by -inf target
    }
    return out;
}

}  // namespace

ChainResult run_chain(const MsgpModel& model, const McmcConfig& config, std::uint64_t seed) {
    config.validate();
    Rng rng(seed);
    const Eigen::Index d = model.p();
    const SimplexTransform transform(d, model.cutoff_c);

    CutoffVector tau;
    tau.c = model.cutoff_c;
    tau.omega = model.kernel.omega;
    tau.tau = config.fix_tau && config.fixed_tau.size() == d
                  ? config.fixed_tau
                  : Eigen::VectorXd::Constant(d, model.cutoff_c / static_cast<double>(d + 1));

    RamState state = RamState::init(d, config.target_accept, config.gamma, config.init_upsilon);
    state.z = transform.to_unconstrained(tau.tau);
    TargetEval current = eval_target(model, transform, state.z);
    if (!current.stats)
        throw std::runtime_error("run_chain: initial tau gives a non-positive-definite correlation");

    ChainResult result;
    result.seed = seed;
    long accepted = 0;
    for (long iter = 1; iter <= config.iterations; ++iter) {
        if (!config.fix_tau) {
            // RAM step on tau using the marginal posterior (B, Sigma integrated out).
            TargetEval proposal_eval;
            auto target = [&](const Eigen::VectorXd& z) {
                proposal_eval = eval_target(model, transform, z);
                return proposal_eval.log_target;
            };
            if (ram_step(state, current.log_target, target, rng, true)) {
                current.stats = std::move(proposal_eval.stats);
                tau.tau = transform.to_simplex(state.z);
                ++accepted;
            }
        } else {
            ++accepted;
        }

        if (iter > config.burn_in && (iter - config.burn_in) % config.thin == 0) {
            // Gibbs draws: Sigma from its marginal given tau, then B given Sigma.
            const ConjugateStats& stats = *current.stats;
            Eigen::MatrixXd Sigma = sample_inverse_wishart(stats.Shat, stats.delta_hat, rng);
            Eigen::MatrixXd B = sample_matrix_normal(stats.Bhat, stats.LambdaHat, Sigma, rng);
            PosteriorDraw draw;
            draw.B = std::move(B);
            draw.Sigma = std::move(Sigma);
            draw.tau = tau;
            draw.cached = stats.factor;
            result.draws.push_back(std::move(draw));
        }
    }
    result.accept_rate =
        config.iterations > 0 ? static_cast<double>(accepted) / static_cast<double>(config.iterations) : 0.0;
    if (!config.fix_tau && config.iterations >= 1000 && result.accept_rate < 0.01)
        std::fprintf(stderr, "warning: MCMC acceptance rate %.4f; chain may be stuck\n",
                     result.accept_rate);
    return result;
}

std::vector<ChainResult> run_parallel_chains(const MsgpModel& model, const McmcConfig& config,
                                             int chains, const std::vector<std::uint64_t>& seeds) {
    if (chains < 1) throw std::invalid_argument("run_parallel_chains: chains must be >= 1");
    if (static_cast<int>(seeds.size()) != chains)
        throw std::invalid_argument("run_parallel_chains: need one seed per chain");
    if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size())
        throw std::invalid_argument("run_parallel_chains: duplicate seeds");

    std::vector<ChainResult> results(static_cast<std::size_t>(chains));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(chains));
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(chains));
    for (int c = 0; c < chains; ++c) {
        workers.emplace_back([&, c]() {
            try {
                results[static_cast<std::size_t>(c)] =
                    run_chain(model, config, seeds[static_cast<std::size_t>(c)]);
            } catch (...) {
                errors[static_cast<std::size_t>(c)] = std::current_exception();
            }
        });
    }
    for (auto& w : workers) w.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return results;
}

PsrfReport compute_psrf(const std::vector<Eigen::MatrixXd>& chains,
                        const std::vector<std::string>& names) {
    if (chains.size() < 2) throw std::invalid_argument("compute_psrf: need at least 2 chains");
    const Eigen::Index n = chains.front().rows();
    const Eigen::Index npar = chains.front().cols();
    if (n < 10) throw std::invalid_argument("compute_psrf: chains too short (need >= 10 draws)");
    for (const auto& c : chains)
        if (c.rows() != n || c.cols() != npar)
            throw std::invalid_argument("compute_psrf: chains must have equal shapes");
    const double nc = static_cast<double>(chains.size());
    const double nd = static_cast<double>(n);

    PsrfReport report;
    report.names = names;
    if (report.names.empty())
        for (Eigen::Index j = 0; j < npar; ++j) report.names.push_back("param" + std::to_string(j));
    report.point.resize(npar);
    report.upper.resize(npar);

    for (Eigen::Index j = 0; j < npar; ++j) {
        Eigen::VectorXd xbar(chains.size()), s2(chains.size());
        for (std::size_t c = 0; c < chains.size(); ++c) {
            const auto col = chains[c].col(j);
            xbar(static_cast<Eigen::Index>(c)) = col.mean();
            s2(static_cast<Eigen::Index>(c)) =
                (col.array() - xbar(static_cast<Eigen::Index>(c))).square().sum() / (nd - 1.0);
        }
        const double W = s2.mean();
        const double mu = xbar.mean();
        const double B = nd * (xbar.array() - mu).square().sum() / (nc - 1.0);
        if (!(W > 0.0) || !(B > W * 1e-12)) {
            // degenerate chains (constant, or identical across chains)
            report.point(j) = 1.0;
            report.upper(j) = 1.0;
            continue;
        }
        const double var_w = (s2.array() - W).square().sum() / (nc - 1.0) / nc;
        const double var_b = 2.0 * B * B / (nc - 1.0);
        const Eigen::ArrayXd xbar2 = xbar.array().square();
        const double cov_s2_xbar2 =
            ((s2.array() - W) * (xbar2 - xbar2.mean())).sum() / (nc - 1.0);
        const double cov_s2_xbar = ((s2.array() - W) * (xbar.array() - mu)).sum() / (nc - 1.0);
        const double cov_wb = (nd / nc) * (cov_s2_xbar2 - 2.0 * mu * cov_s2_xbar);
        const double sig2 = (nd - 1.0) / nd * W + B / nd;
        const double V = sig2 + B / (nc * nd);
        const double var_v = ((nd - 1.0) * (nd - 1.0) * var_w + std::pow(1.0 + 1.0 / nc, 2) * var_b +
                              2.0 * (nd - 1.0) * (1.0 + 1.0 / nc) * cov_wb) /
                             (nd * nd);
        const double r2_fixed = (nd - 1.0) / nd;
        const double r2_random = (1.0 + 1.0 / nc) * B / (nd * W);
        double df_adj = 1.0;
        double upper_random = r2_random;
        if (var_v > 0.0 && V > 0.0) {
            const double df_v = 2.0 * V * V / var_v;
            df_adj = (df_v + 3.0) / (df_v + 1.0);
        }
        if (var_w > 0.0 && B > 0.0) {
            const double df2 = 2.0 * W * W / var_w;
            boost::math::fisher_f f(nc - 1.0, df2);
            upper_random = boost::math::quantile(f, 0.975) * (1.0 + 1.0 / nc) *
                           ((B / nd) / W) * ((nc - 1.0) / nc);
        }
        report.point(j) = std::sqrt(df_adj * (r2_fixed + r2_random));
        report.upper(j) = std::sqrt(df_adj * (r2_fixed + upper_random));
    }
    return report;
}

PsrfReport compute_psrf(const std::vector<ChainResult>& chains) {
    if (chains.size() < 2) throw std::invalid_argument("compute_psrf: need at least 2 chains");
    const std::size_t ndraws = chains.front().draws.size();
    for (const auto& c : chains)
        if (c.draws.size() != ndraws)
            throw std::invalid_argument("compute_psrf: unequal chain lengths");
    if (ndraws == 0) throw std::invalid_argument("compute_psrf: empty chains");
    const Eigen::Index d = chains.front().draws.front().tau.tau.size();
    const Eigen::Index q = chains.front().draws.front().B.rows();
    const Eigen::Index m = chains.front().draws.front().B.cols();

    std::vector<std::string> names;
    for (Eigen::Index k = 0; k < d; ++k) names.push_back("tau[" + std::to_string(k) + "]");
    for (Eigen::Index j = 0; j < m; ++j)
        for (Eigen::Index i = 0; i < q; ++i)
            names.push_back("B[" + std::to_string(i) + "," + std::to_string(j) + "]");

    std::vector<Eigen::MatrixXd> mats;
    for (const auto& c : chains) {
        Eigen::MatrixXd mat(static_cast<Eigen::Index>(ndraws), d + q * m);
        for (std::size_t t = 0; t < ndraws; ++t) {
            const auto& draw = c.draws[t];
            mat.block(static_cast<Eigen::Index>(t), 0, 1, d) = draw.tau.tau.transpose();
            Eigen::Map<const Eigen::VectorXd> bflat(draw.B.data(), q * m);
            mat.block(static_cast<Eigen::Index>(t), d, 1, q * m) = bflat.transpose();
        }
        mats.push_back(std::move(mat));
    }
    return compute_psrf(mats, names);
}

}  // namespace msgp
