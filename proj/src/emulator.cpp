#include "msgp/emulator.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace msgp {

std::string to_string(BasisKind kind) {
    return kind == BasisKind::Constant ? "constant" : "linear";
}

BasisKind basis_kind_from_string(const std::string& name) {
    if (name == "constant") return BasisKind::Constant;
    if (name == "linear") return BasisKind::Linear;
    throw std::invalid_argument("unknown basis kind '" + name + "'");
}

Eigen::MatrixXd build_basis(const DesignMatrix& design, BasisKind kind) {
    if (!design.scaled) throw std::invalid_argument("build_basis: design must be scaled");
    const Eigen::Index n = design.n();
    if (kind == BasisKind::Constant) return Eigen::MatrixXd::Ones(n, 1);
    Eigen::MatrixXd h(n, design.p() + 1);
    h.col(0).setOnes();
    h.rightCols(design.p()) = design.values;
    return h;
}

void MniwPrior::validate(Eigen::Index q, Eigen::Index m) const {
    if (B0.rows() != q || B0.cols() != m) throw std::invalid_argument("prior: B0 shape mismatch");
    if (Lambda0.rows() != q || Lambda0.cols() != q)
        throw std::invalid_argument("prior: Lambda0 shape mismatch");
    if (S0.rows() != m || S0.cols() != m) throw std::invalid_argument("prior: S0 shape mismatch");
    if (!(delta0 > static_cast<double>(m) - 1.0))
        throw std::invalid_argument("prior: delta0 must exceed m - 1");
    if (Eigen::LLT<Eigen::MatrixXd>(Lambda0).info() != Eigen::Success)
        throw std::invalid_argument("prior: Lambda0 not positive definite");
    if (Eigen::LLT<Eigen::MatrixXd>(S0).info() != Eigen::Success)
        throw std::invalid_argument("prior: S0 not positive definite");
}

MniwPrior MniwPrior::vague(Eigen::Index q, Eigen::Index m) {
    MniwPrior prior;
    prior.B0 = Eigen::MatrixXd::Zero(q, m);
    prior.Lambda0 = 1e-4 * Eigen::MatrixXd::Identity(q, q);
    prior.S0 = Eigen::MatrixXd::Identity(m, m);
    prior.delta0 = static_cast<double>(m) + 2.0;
    return prior;
}

MsgpModel MsgpModel::build(DesignMatrix scaled_design, OutputMatrix standardized_outputs,
                           KernelSpec kernel, BasisKind basis) {
    const Eigen::Index q = basis == BasisKind::Constant ? 1 : scaled_design.p() + 1;
    MniwPrior prior = MniwPrior::vague(q, standardized_outputs.m());
    return build(std::move(scaled_design), std::move(standardized_outputs), std::move(kernel), basis,
                 std::move(prior));
}

MsgpModel MsgpModel::build(DesignMatrix scaled_design, OutputMatrix standardized_outputs,
                           KernelSpec kernel, BasisKind basis, MniwPrior prior) {
    if (!scaled_design.scaled) throw std::invalid_argument("MsgpModel: design must be scaled");
    if (scaled_design.n() != standardized_outputs.n())
        throw std::invalid_argument("MsgpModel: design/output row mismatch");
    kernel.validate();
    MsgpModel model;
    model.design = std::move(scaled_design);
    model.outputs = std::move(standardized_outputs);
    model.basis = build_basis(model.design, basis);
    model.basis_kind = basis;
    model.kernel = std::move(kernel);
    model.prior = std::move(prior);
    model.prior.validate(model.q(), model.m());
    model.cutoff_c = calibrate_cutoff(model.design, model.kernel.omega, model.kernel.literal_quantile);
    if (Eigen::FullPivLU<Eigen::MatrixXd>(model.basis).rank() < model.q())
        throw std::invalid_argument("MsgpModel: basis matrix H is rank deficient");
    return model;
}

MatrixNormalParams conditional_posterior_b(const MsgpModel& model, const CholeskyFactor& factor) {
    const Eigen::MatrixXd HtRiH = factor.quad_form(model.basis);
    const Eigen::MatrixXd HtRiY = factor.quad_form(model.basis, model.outputs.values);
    const Eigen::MatrixXd precision = HtRiH + model.prior.Lambda0;
    Eigen::LLT<Eigen::MatrixXd> llt(precision);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("conditional_posterior_b: H^T R^-1 H + Lambda0 is singular");
    MatrixNormalParams out;
    out.LambdaHat = llt.solve(Eigen::MatrixXd::Identity(model.q(), model.q()));
    out.LambdaHat = 0.5 * (out.LambdaHat + out.LambdaHat.transpose());
    out.Bhat = llt.solve(HtRiY + model.prior.Lambda0 * model.prior.B0);
    return out;
}

InverseWishartParams conditional_posterior_sigma(const MsgpModel& model, const Eigen::MatrixXd& Bhat,
                                                 const Eigen::MatrixXd& LambdaHat,
                                                 const CholeskyFactor& factor) {
    const Eigen::MatrixXd YtRiY = factor.quad_form(model.outputs.values);
    Eigen::LLT<Eigen::MatrixXd> lam(LambdaHat);
    const Eigen::MatrixXd BtLamInvB = Bhat.transpose() * lam.solve(Bhat);
    Eigen::MatrixXd Shat = model.prior.S0 + YtRiY +
                           model.prior.B0.transpose() * model.prior.Lambda0 * model.prior.B0 -
                           BtLamInvB;
    Shat = 0.5 * (Shat + Shat.transpose());
    if (Eigen::LLT<Eigen::MatrixXd>(Shat).info() != Eigen::Success)
        throw std::runtime_error("conditional_posterior_sigma: Shat lost positive definiteness");
    return {Shat, model.prior.delta0 + static_cast<double>(model.n())};
}

ConjugateStats conjugate_stats(const MsgpModel& model, const CutoffVector& tau) {
    return conjugate_stats(model, tau,
                           factorize(assemble_sparse_correlation(model.design, model.kernel, tau)));
}

ConjugateStats conjugate_stats(const MsgpModel& model, const CutoffVector& tau, FactorPtr factor) {
    ConjugateStats stats;
    stats.factor = std::move(factor);
    auto mn = conditional_posterior_b(model, *stats.factor);
    stats.Bhat = std::move(mn.Bhat);
    stats.LambdaHat = std::move(mn.LambdaHat);
    auto iw = conditional_posterior_sigma(model, stats.Bhat, stats.LambdaHat, *stats.factor);
    stats.Shat = std::move(iw.Shat);
    stats.delta_hat = iw.delta_hat;
    stats.log_det_R = stats.factor->log_det();
    Eigen::LLT<Eigen::MatrixXd> lam(stats.LambdaHat);
    stats.log_det_LambdaHat =
        2.0 * Eigen::MatrixXd(lam.matrixL()).diagonal().array().log().sum();
    Eigen::LLT<Eigen::MatrixXd> sh(stats.Shat);
    stats.log_det_Shat = 2.0 * Eigen::MatrixXd(sh.matrixL()).diagonal().array().log().sum();
    return stats;
}

Eigen::MatrixXd sample_matrix_normal(const Eigen::MatrixXd& Bhat, const Eigen::MatrixXd& LambdaHat,
                                     const Eigen::MatrixXd& Sigma, Rng& rng) {
    Eigen::LLT<Eigen::MatrixXd> lrow(LambdaHat);
    Eigen::LLT<Eigen::MatrixXd> lcol(Sigma);
    if (lrow.info() != Eigen::Success || lcol.info() != Eigen::Success)
        throw std::runtime_error("sample_matrix_normal: scale matrix not positive definite");
    const Eigen::MatrixXd z = randn_matrix(rng, Bhat.rows(), Bhat.cols());
    return Bhat + Eigen::MatrixXd(lrow.matrixL()) * z * Eigen::MatrixXd(lcol.matrixL()).transpose();
}

Eigen::MatrixXd sample_inverse_wishart(const Eigen::MatrixXd& S, double delta, Rng& rng) {
    const Eigen::Index m = S.rows();
    if (!(delta > static_cast<double>(m) - 1.0))
        throw std::invalid_argument("sample_inverse_wishart: delta too small");
    // Bartlett decomposition of W ~ Wishart(S^{-1}, delta); Sigma = W^{-1}.
    Eigen::LLT<Eigen::MatrixXd> sllt(S);
    if (sllt.info() != Eigen::Success)
        throw std::runtime_error("sample_inverse_wishart: S not positive definite");
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        std::chi_squared_distribution<double> chi(delta - static_cast<double>(i));
        A(i, i) = std::sqrt(chi(rng));
        for (Eigen::Index j = 0; j < i; ++j) A(i, j) = rand_normal(rng);
    }
    // chol(S^{-1}) = L_S^{-T}; X = chol(S^{-1}) A has XX^T ~ W(S^{-1}, delta).
    const Eigen::MatrixXd Ls = sllt.matrixL();
    const Eigen::MatrixXd X = Ls.transpose().triangularView<Eigen::Upper>().solve(A);
    Eigen::MatrixXd W = X * X.transpose();
    Eigen::MatrixXd Sigma = W.llt().solve(Eigen::MatrixXd::Identity(m, m));
    return 0.5 * (Sigma + Sigma.transpose());
}

double log_marginal_tau(const MsgpModel& model, const CutoffVector& tau) {
    if ((tau.tau.array() < 0.0).any() || tau.tau.sum() > tau.c * (1.0 + 1e-12))
        return -std::numeric_limits<double>::infinity();
    try {
        const ConjugateStats stats = conjugate_stats(model, tau);
        const double m = static_cast<double>(model.m());
        // Uniform prior on the simplex contributes a constant.
        return -0.5 * m * stats.log_det_R + 0.5 * m * stats.log_det_LambdaHat -
               0.5 * (stats.delta_hat + m - 1.0) * stats.log_det_Shat;
    } catch (const std::runtime_error&) {
        return -std::numeric_limits<double>::infinity();
    }
}

namespace {

Eigen::MatrixXd dense_test_correlation(const DesignMatrix& test, const KernelSpec& spec,
                                       const CutoffVector& tau) {
    const Eigen::Index ns = test.n();
    Eigen::MatrixXd rstar = Eigen::MatrixXd::Identity(ns, ns);
    for (Eigen::Index i = 0; i < ns; ++i)
        for (Eigen::Index j = i + 1; j < ns; ++j)
            rstar(i, j) = rstar(j, i) =
                product_kernel(test.values.row(i), test.values.row(j), spec, tau);
    return rstar;
}

Eigen::MatrixXd basis_at(const DesignMatrix& test, BasisKind kind) {
    return build_basis(test, kind);
}

}  // namespace

MatrixNormalPrediction predict_matrix_normal(const PosteriorDraw& draw, const MsgpModel& model,
                                             const DesignMatrix& test_design) {
    if (test_design.p() != model.p())
        throw std::invalid_argument("predict_matrix_normal: test design dimension mismatch");
    FactorPtr factor = draw.cached;
    if (!factor)
        factor = factorize(assemble_sparse_correlation(model.design, model.kernel, draw.tau));
    const Eigen::SparseMatrix<double> r =
        cross_correlation(model.design, test_design, model.kernel, draw.tau);
    const Eigen::MatrixXd Hstar = basis_at(test_design, model.basis_kind);
    const Eigen::MatrixXd resid = model.outputs.values - model.basis * draw.B;
    const Eigen::MatrixXd Ri_r = factor->solve(Eigen::MatrixXd(r));
    MatrixNormalPrediction out;
    out.mean = Hstar * draw.B + r.transpose() * factor->solve(resid);
    out.row_cov = dense_test_correlation(test_design, model.kernel, draw.tau) -
                  Eigen::MatrixXd(r).transpose() * Ri_r;
    out.row_cov = 0.5 * (out.row_cov + out.row_cov.transpose());
    return out;
}

PredictiveDistribution predict_matrix_t(const MsgpModel& model, const CutoffVector& tau,
                                        const DesignMatrix& test_design) {
    if (test_design.p() != model.p())
        throw std::invalid_argument("predict_matrix_t: test design dimension mismatch");
    const ConjugateStats stats = conjugate_stats(model, tau);
    const Eigen::SparseMatrix<double> r =
        cross_correlation(model.design, test_design, model.kernel, tau);
    const Eigen::MatrixXd rd(r);
    const Eigen::MatrixXd Hstar = basis_at(test_design, model.basis_kind);
    const Eigen::MatrixXd Ri_r = stats.factor->solve(rd);
    const Eigen::MatrixXd Ri_H = stats.factor->solve(model.basis);
    const Eigen::MatrixXd G = Hstar - rd.transpose() * Ri_H;

    PredictiveDistribution out;
    out.location = Hstar * stats.Bhat +
                   rd.transpose() * stats.factor->solve(model.outputs.values - model.basis * stats.Bhat);
    out.row_scale = dense_test_correlation(test_design, model.kernel, tau) - rd.transpose() * Ri_r +
                    G * stats.LambdaHat * G.transpose();
    out.row_scale = 0.5 * (out.row_scale + out.row_scale.transpose());
    out.col_scale = stats.Shat;
    out.dof = stats.delta_hat;
    return out;
}

std::pair<double, double> PredictiveDistribution::marginal_interval(Eigen::Index i, Eigen::Index s,
                                                                    double level) const {
    boost::math::students_t dist(dof);
    const double tq = boost::math::quantile(dist, 0.5 + level / 2.0);
    const double scale = std::sqrt(std::max(0.0, row_scale(i, i) * col_scale(s, s) / dof));
    return {location(i, s) - tq * scale, location(i, s) + tq * scale};
}

MeanPredictor::MeanPredictor(const MsgpModel& model, const PosteriorDraw& draw)
    : model_(model), B_(draw.B), tau_(draw.tau) {
    FactorPtr factor = draw.cached;
    if (!factor)
        factor = factorize(assemble_sparse_correlation(model.design, model.kernel, draw.tau));
    alpha_ = factor->solve(model.outputs.values - model.basis * draw.B);
}

Eigen::MatrixXd MeanPredictor::predict(const Eigen::MatrixXd& X) const {
    const Eigen::Index ns = X.rows();
    const Eigen::Index n = model_.n();
    const Eigen::Index p = model_.p();
    const Eigen::Index m = model_.m();
    if (X.cols() != p) throw std::invalid_argument("MeanPredictor: dimension mismatch");
    Eigen::MatrixXd out(ns, m);
    const bool linear = model_.basis_kind == BasisKind::Linear;
    const Eigen::MatrixXd& train = model_.design.values;
    for (Eigen::Index t = 0; t < ns; ++t) {
        Eigen::RowVectorXd mean = B_.row(0);
        if (linear) mean += X.row(t) * B_.bottomRows(p);
        for (Eigen::Index i = 0; i < n; ++i) {
            double r = 1.0;
            for (Eigen::Index k = 0; k < p; ++k) {
                const double d = std::abs(train(i, k) - X(t, k));
                if (d >= tau_.tau(k)) {
                    r = 0.0;
                    break;
                }
            }
            if (r == 0.0) continue;
            r = product_kernel(train.row(i), X.row(t), model_.kernel, tau_);
            if (r != 0.0) mean += r * alpha_.row(i);
        }
        out.row(t) = mean;
    }
    return out;
}

}  // namespace msgp
