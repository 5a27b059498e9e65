#include "msgp/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace msgp {

namespace {

constexpr double kVarFloor = 1e-12;

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& a) { return 0.5 * (a + a.transpose()); }

double quantile_sorted(std::vector<double>& v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const std::size_t i = static_cast<std::size_t>(pos);
    if (i + 1 >= v.size()) return v.back();
    const double frac = pos - static_cast<double>(i);
    return v[i] * (1.0 - frac) + v[i + 1] * frac;
}

}  // namespace

SaltelliMatrices build_saltelli(Eigen::Index p, Eigen::Index s, std::uint64_t seed,
                                const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
    if (p < 1) throw std::invalid_argument("build_saltelli: need at least one input");
    if (s < 100) throw std::invalid_argument("build_saltelli: sample size must be >= 100");
    Eigen::VectorXd lo_ = lo.size() ? lo : Eigen::VectorXd::Constant(p, -1.0);
    Eigen::VectorXd hi_ = hi.size() ? hi : Eigen::VectorXd::Constant(p, 1.0);
    if (lo_.size() != p || hi_.size() != p)
        throw std::invalid_argument("build_saltelli: bounds length mismatch");
    for (Eigen::Index k = 0; k < p; ++k)
        if (!(lo_(k) < hi_(k))) throw std::invalid_argument("build_saltelli: empty input range");

    Rng rng(seed);
    auto draw = [&](Eigen::MatrixXd& m) {
        m.resize(s, p);
        for (Eigen::Index i = 0; i < s; ++i)
            for (Eigen::Index k = 0; k < p; ++k)
                m(i, k) = lo_(k) + (hi_(k) - lo_(k)) * rand_uniform(rng);
    };
    Eigen::MatrixXd A0, B;
    draw(A0);
    draw(B);

    SaltelliMatrices mats;
    mats.A0 = A0;
    mats.s = s;
    mats.Aj.reserve(static_cast<std::size_t>(p));
    mats.Anotj.reserve(static_cast<std::size_t>(p));
    for (Eigen::Index j = 0; j < p; ++j) {
        Eigen::MatrixXd aj = B;
        aj.col(j) = A0.col(j);
        mats.Aj.push_back(std::move(aj));
        Eigen::MatrixXd anj = A0;
        anj.col(j) = B.col(j);
        mats.Anotj.push_back(std::move(anj));
    }
    return mats;
}

CovDecomposition covariance_decomposition(const Predictor& predict, const SaltelliMatrices& mats,
                                          bool centered) {
    const Eigen::Index p = mats.p();
    const double s = static_cast<double>(mats.s);

    const Eigen::MatrixXd Y0 = predict(mats.A0);
    const Eigen::Index m = Y0.cols();
    const Eigen::RowVectorXd mu0 = Y0.colwise().mean();

    CovDecomposition out;
    out.Omega = symmetrize(Y0.transpose() * Y0 / s - mu0.transpose() * mu0);
    out.OmegaJ.reserve(static_cast<std::size_t>(p));
    out.OmegaNotJ.reserve(static_cast<std::size_t>(p));
    out.OmegaInteraction.reserve(static_cast<std::size_t>(p));

    for (Eigen::Index j = 0; j < p; ++j) {
        const Eigen::MatrixXd Yj = predict(mats.Aj[static_cast<std::size_t>(j)]);
        const Eigen::MatrixXd Ynj = predict(mats.Anotj[static_cast<std::size_t>(j)]);
        if (Yj.cols() != m || Ynj.cols() != m)
            throw std::invalid_argument("covariance_decomposition: predictor output width changed");
        const Eigen::RowVectorXd muj = Yj.colwise().mean();
        const Eigen::RowVectorXd munj = Ynj.colwise().mean();
        // Cross moments between companion predictions estimate the
        // conditional-expectation second moments; the centered form corrects
        // with the product of the two sample means.
        const Eigen::MatrixXd meanJ = centered ? (muj.transpose() * mu0).eval()
                                               : (mu0.transpose() * mu0).eval();
        const Eigen::MatrixXd meanNJ = centered ? (munj.transpose() * mu0).eval()
                                                : (mu0.transpose() * mu0).eval();
        Eigen::MatrixXd oj = symmetrize(Yj.transpose() * Y0 / s - meanJ);
        Eigen::MatrixXd onj = symmetrize(Ynj.transpose() * Y0 / s - meanNJ);
        out.OmegaInteraction.push_back(out.Omega - oj - onj);
        out.OmegaJ.push_back(std::move(oj));
        out.OmegaNotJ.push_back(std::move(onj));
    }
    return out;
}

UnivariateIndices indices_from_decomposition(const CovDecomposition& decomp) {
    const Eigen::Index p = static_cast<Eigen::Index>(decomp.OmegaJ.size());
    const Eigen::Index m = decomp.Omega.rows();
    UnivariateIndices out;
    out.S.resize(p, m);
    out.St.resize(p, m);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (Eigen::Index k = 0; k < m; ++k) {
        const double v = decomp.Omega(k, k);
        for (Eigen::Index j = 0; j < p; ++j) {
            if (v < kVarFloor) {
                out.S(j, k) = nan;
                out.St(j, k) = nan;
            } else {
                out.S(j, k) = decomp.OmegaJ[static_cast<std::size_t>(j)](k, k) / v;
                out.St(j, k) = 1.0 - decomp.OmegaNotJ[static_cast<std::size_t>(j)](k, k) / v;
            }
        }
    }
    return out;
}

UnivariateIndices estimate_indices_univariate(const Predictor& predict,
                                              const SaltelliMatrices& mats, bool centered) {
    return indices_from_decomposition(covariance_decomposition(predict, mats, centered));
}

GeneralizedIndices generalized_indices(const CovDecomposition& decomp) {
    const Eigen::Index p = static_cast<Eigen::Index>(decomp.OmegaJ.size());
    const double total = decomp.Omega.trace();
    if (!(total > 0.0)) throw std::invalid_argument("generalized_indices: zero total variance");
    GeneralizedIndices out;
    out.S.resize(p);
    out.St.resize(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        const auto& oj = decomp.OmegaJ[static_cast<std::size_t>(j)];
        const auto& oint = decomp.OmegaInteraction[static_cast<std::size_t>(j)];
        out.S(j) = oj.trace() / total;
        out.St(j) = (oj.trace() + oint.trace()) / total;
    }
    return out;
}

ProjectionIndices projection_indices(const CovDecomposition& decomp, const Eigen::MatrixXd& R) {
    const Eigen::Index p = static_cast<Eigen::Index>(decomp.OmegaJ.size());
    const Eigen::Index m = decomp.Omega.rows();
    if (R.rows() != m || R.cols() != m)
        throw std::invalid_argument("projection_indices: correlation matrix size mismatch");
    for (Eigen::Index k = 0; k < m; ++k)
        if (std::abs(R(k, k) - 1.0) > 1e-8)
            throw std::invalid_argument("projection_indices: correlation diagonal must be 1");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(R);
    if (es.eigenvalues().minCoeff() < -1e-8)
        throw std::invalid_argument("projection_indices: correlation matrix not PSD");

    const Eigen::VectorXd a = decomp.Omega.diagonal();
    const double denom = a.dot(R * a);
    if (!(denom > 0.0)) throw std::invalid_argument("projection_indices: zero total variance");

    ProjectionIndices out;
    out.P.resize(p);
    out.Pinteraction.resize(p);
    out.Pt.resize(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        const Eigen::VectorXd aj = decomp.OmegaJ[static_cast<std::size_t>(j)].diagonal();
        const Eigen::VectorXd ai = decomp.OmegaInteraction[static_cast<std::size_t>(j)].diagonal();
        out.P(j) = aj.dot(R * a) / denom;
        out.Pinteraction(j) = ai.dot(R * a) / denom;
        out.Pt(j) = out.P(j) + out.Pinteraction(j);
    }
    return out;
}

Eigen::MatrixXd output_correlation_matrix(const OutputMatrix& outputs, bool* floored) {
    const Eigen::MatrixXd& Y = outputs.values;
    const Eigen::Index n = Y.rows();
    const Eigen::Index m = Y.cols();
    if (n < 3) throw std::invalid_argument("output_correlation_matrix: need at least 3 rows");
    Eigen::MatrixXd centered = Y.rowwise() - Y.colwise().mean();
    Eigen::VectorXd sd(m);
    for (Eigen::Index k = 0; k < m; ++k) {
        sd(k) = std::sqrt(centered.col(k).squaredNorm() / static_cast<double>(n - 1));
        if (!(sd(k) > 0.0))
            throw std::invalid_argument("output_correlation_matrix: constant output column " +
                                        std::to_string(k));
    }
    Eigen::MatrixXd R = centered.transpose() * centered / static_cast<double>(n - 1);
    R = (sd.cwiseInverse().asDiagonal() * R * sd.cwiseInverse().asDiagonal()).eval();
    R = 0.5 * (R + R.transpose());
    R.diagonal().setOnes();

    bool did_floor = false;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(R);
    if (es.eigenvalues().minCoeff() < 0.0) {
        did_floor = true;
        Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
        R = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
        // restore the unit diagonal after flooring
        Eigen::VectorXd d = R.diagonal().cwiseSqrt().cwiseInverse();
        R = (d.asDiagonal() * R * d.asDiagonal()).eval();
        R.diagonal().setOnes();
    }
    if (floored) *floored = did_floor;
    return R;
}

MainEffectCurve main_effects(const std::vector<Predictor>& predict_draws, Eigen::Index p,
                             Eigen::Index j, Eigen::Index grid_size, Eigen::Index s,
                             std::uint64_t seed, double lo, double hi) {
    if (predict_draws.empty()) throw std::invalid_argument("main_effects: no posterior draws");
    if (grid_size < 2) throw std::invalid_argument("main_effects: grid needs >= 2 points");
    if (j < 0 || j >= p) throw std::invalid_argument("main_effects: input index out of range");
    if (s < 10) throw std::invalid_argument("main_effects: marginalization sample too small");

    Rng rng(seed);
    Eigen::MatrixXd base(s, p);
    for (Eigen::Index i = 0; i < s; ++i)
        for (Eigen::Index k = 0; k < p; ++k) base(i, k) = lo + (hi - lo) * rand_uniform(rng);

    MainEffectCurve curve;
    curve.grid = Eigen::VectorXd::LinSpaced(grid_size, lo, hi);

    const std::size_t ndraws = predict_draws.size();
    // per draw: g x m curve of E(Y|x_j) - E(Y)
    std::vector<Eigen::MatrixXd> per_draw(ndraws);
    Eigen::Index m = 0;
    for (std::size_t t = 0; t < ndraws; ++t) {
        const Eigen::RowVectorXd overall = predict_draws[t](base).colwise().mean();
        if (t == 0) m = overall.size();
        Eigen::MatrixXd c(grid_size, m);
        Eigen::MatrixXd X = base;
        for (Eigen::Index g = 0; g < grid_size; ++g) {
            X.col(j).setConstant(curve.grid(g));
            c.row(g) = predict_draws[t](X).colwise().mean() - overall;
        }
        per_draw[t] = std::move(c);
    }

    curve.mean = Eigen::MatrixXd::Zero(grid_size, m);
    for (const auto& c : per_draw) curve.mean += c;
    curve.mean /= static_cast<double>(ndraws);
    curve.lo.resize(grid_size, m);
    curve.hi.resize(grid_size, m);
    for (Eigen::Index g = 0; g < grid_size; ++g)
        for (Eigen::Index k = 0; k < m; ++k) {
            std::vector<double> vals(ndraws);
            for (std::size_t t = 0; t < ndraws; ++t) vals[t] = per_draw[t](g, k);
            std::vector<double> tmp = vals;
            curve.lo(g, k) = quantile_sorted(tmp, 0.025);
            tmp = vals;
            curve.hi(g, k) = quantile_sorted(tmp, 0.975);
        }
    return curve;
}

IndexSummary summarize_draws(const std::vector<Eigen::VectorXd>& draws) {
    if (draws.empty()) throw std::invalid_argument("summarize_draws: empty");
    const Eigen::Index p = draws.front().size();
    IndexSummary out;
    out.mean = Eigen::VectorXd::Zero(p);
    out.sd = Eigen::VectorXd::Zero(p);
    out.q025.resize(p);
    out.q975.resize(p);
    for (const auto& d : draws) out.mean += d;
    out.mean /= static_cast<double>(draws.size());
    if (draws.size() > 1) {
        for (const auto& d : draws) out.sd += (d - out.mean).cwiseAbs2();
        out.sd = (out.sd / static_cast<double>(draws.size() - 1)).cwiseSqrt();
    }
    for (Eigen::Index j = 0; j < p; ++j) {
        std::vector<double> vals;
        vals.reserve(draws.size());
        for (const auto& d : draws) vals.push_back(d(j));
        std::vector<double> tmp = vals;
        out.q025(j) = quantile_sorted(tmp, 0.025);
        tmp = vals;
        out.q975(j) = quantile_sorted(tmp, 0.975);
    }
    return out;
}

IndexPosterior index_posterior(const MsgpModel& model, const std::vector<PosteriorDraw>& draws,
                               const SaltelliMatrices& mats, bool centered) {
    if (draws.empty()) throw std::invalid_argument("index_posterior: no posterior draws");
    if (mats.p() != model.p())
        throw std::invalid_argument("index_posterior: input dimension mismatch");

    IndexPosterior out;
    out.output_correlation = output_correlation_matrix(model.outputs, &out.correlation_floored);

    std::vector<Eigen::VectorXd> sdraws, stdraws, pdraws, ptdraws;
    for (const auto& draw : draws) {
        MeanPredictor pred(model, draw);
        Predictor fn = [&](const Eigen::MatrixXd& X) { return pred.predict(X); };
        IndexDraw idx;
        CovDecomposition decomp = covariance_decomposition(fn, mats, centered);
        idx.univariate = indices_from_decomposition(decomp);
        idx.generalized = generalized_indices(decomp);
        idx.projection = projection_indices(decomp, out.output_correlation);
        sdraws.push_back(idx.generalized.S);
        stdraws.push_back(idx.generalized.St);
        pdraws.push_back(idx.projection.P);
        ptdraws.push_back(idx.projection.Pt);
        out.per_draw.push_back(std::move(idx));
    }
    out.S = summarize_draws(sdraws);
    out.St = summarize_draws(stdraws);
    out.P = summarize_draws(pdraws);
    out.Pt = summarize_draws(ptdraws);
    return out;
}

}  // namespace msgp
