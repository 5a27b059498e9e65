#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "msgp/emulator.hpp"
#include "msgp/mcmc.hpp"
#include "msgp/random.hpp"

namespace msgp {

// Base sample A0 plus the column-swapped companions used by the Saltelli
// pick-freeze estimators.  Aj[j] shares only column j with A0; Anotj[j]
// shares every column except j.
struct SaltelliMatrices {
    Eigen::MatrixXd A0;                  // s x p
    std::vector<Eigen::MatrixXd> Aj;     // p matrices, s x p
    std::vector<Eigen::MatrixXd> Anotj;  // p matrices, s x p
    Eigen::Index s = 0;

    Eigen::Index p() const { return A0.cols(); }
};

// Inputs drawn i.i.d. uniform on [lo_k, hi_k] (defaults to [-1, 1] on every
// coordinate, matching the scaled design space).  Requires s >= 100.
SaltelliMatrices build_saltelli(Eigen::Index p, Eigen::Index s, std::uint64_t seed,
                                const Eigen::VectorXd& lo = Eigen::VectorXd(),
                                const Eigen::VectorXd& hi = Eigen::VectorXd());

// Maps an s x p input matrix to an s x m matrix of predicted outputs.
using Predictor = std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>;

struct CovDecomposition {
    Eigen::MatrixXd Omega;                          // m x m total covariance
    std::vector<Eigen::MatrixXd> OmegaJ;            // first-order block per input
    std::vector<Eigen::MatrixXd> OmegaNotJ;         // complement block per input
    std::vector<Eigen::MatrixXd> OmegaInteraction;  // Omega - OmegaJ - OmegaNotJ
};

struct UnivariateIndices {
    Eigen::MatrixXd S;   // p x m first-order, NaN where var(Y) ~ 0
    Eigen::MatrixXd St;  // p x m total
};

struct GeneralizedIndices {
    Eigen::VectorXd S;   // trace-ratio first-order per input
    Eigen::VectorXd St;  // trace-ratio total per input
};

struct ProjectionIndices {
    Eigen::VectorXd P;             // projection index per input
    Eigen::VectorXd Pinteraction;  // interaction share per input
    Eigen::VectorXd Pt;            // P + Pinteraction
};

// All pick-freeze moment estimates for one set of predictions.  With
// `centered` the squared-mean correction uses the product of the two
// companion sample means; otherwise the plain squared base-sample mean.
CovDecomposition covariance_decomposition(const Predictor& predict, const SaltelliMatrices& mats,
                                          bool centered = true);

UnivariateIndices estimate_indices_univariate(const Predictor& predict,
                                              const SaltelliMatrices& mats, bool centered = true);
UnivariateIndices indices_from_decomposition(const CovDecomposition& decomp);

GeneralizedIndices generalized_indices(const CovDecomposition& decomp);

// R is the m x m output correlation matrix defining the inner product on
// per-output variance-contribution vectors (the block diagonals).
ProjectionIndices projection_indices(const CovDecomposition& decomp, const Eigen::MatrixXd& R);

// Pearson correlation of the output columns; eigenvalues floored at zero when
// rounding pushes the matrix indefinite (reported through `floored`).
Eigen::MatrixXd output_correlation_matrix(const OutputMatrix& outputs, bool* floored = nullptr);

struct MainEffectCurve {
    Eigen::VectorXd grid;  // g values of input j, strictly increasing
    Eigen::MatrixXd mean;  // g x m posterior mean of E(Y|x_j) - E(Y)
    Eigen::MatrixXd lo;    // g x m lower 95% band
    Eigen::MatrixXd hi;    // g x m upper 95% band
};

// One predictor per retained posterior draw; inputs other than j are
// marginalized by a common Monte Carlo sample of size s.
MainEffectCurve main_effects(const std::vector<Predictor>& predict_draws, Eigen::Index p,
                             Eigen::Index j, Eigen::Index grid_size, Eigen::Index s,
                             std::uint64_t seed, double lo = -1.0, double hi = 1.0);

struct IndexDraw {
    UnivariateIndices univariate;
    GeneralizedIndices generalized;
    ProjectionIndices projection;
};

struct IndexSummary {
    Eigen::VectorXd mean;
    Eigen::VectorXd sd;
    Eigen::VectorXd q025;
    Eigen::VectorXd q975;
};
IndexSummary summarize_draws(const std::vector<Eigen::VectorXd>& draws);

struct IndexPosterior {
    std::vector<IndexDraw> per_draw;
    IndexSummary S;   // aggregated first-order
    IndexSummary St;  // aggregated total
    IndexSummary P;   // projection
    IndexSummary Pt;  // projection total
    Eigen::MatrixXd output_correlation;
    bool correlation_floored = false;
};

// Full posterior of the sensitivity indices: one pick-freeze pass per
// retained MCMC draw using that draw's posterior-mean predictor.
IndexPosterior index_posterior(const MsgpModel& model, const std::vector<PosteriorDraw>& draws,
                               const SaltelliMatrices& mats, bool centered = true);

}  // namespace msgp
