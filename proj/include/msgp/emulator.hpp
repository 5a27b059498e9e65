#pragma once

#include <Eigen/Dense>

#include "msgp/design.hpp"
#include "msgp/kernels.hpp"
#include "msgp/random.hpp"
#include "msgp/sparse_linalg.hpp"

namespace msgp {

enum class BasisKind { Constant, Linear };

std::string to_string(BasisKind kind);
BasisKind basis_kind_from_string(const std::string& name);

// Regression matrix H: a column of ones, plus the scaled inputs for the
// linear basis.
Eigen::MatrixXd build_basis(const DesignMatrix& design, BasisKind kind);

struct MniwPrior {
    Eigen::MatrixXd B0;       // q x m
    Eigen::MatrixXd Lambda0;  // q x q precision
    Eigen::MatrixXd S0;       // m x m scale
    double delta0 = 0.0;

    void validate(Eigen::Index q, Eigen::Index m) const;
    // B0 = 0, Lambda0 = 1e-4 I, S0 = I, delta0 = m + 2
    static MniwPrior vague(Eigen::Index q, Eigen::Index m);
};

struct MsgpModel {
    DesignMatrix design;    // scaled
    OutputMatrix outputs;   // standardized
    Eigen::MatrixXd basis;  // n x q
    BasisKind basis_kind = BasisKind::Linear;
    KernelSpec kernel;
    MniwPrior prior;
    double cutoff_c = 0.0;  // simplex budget from calibrate_cutoff

    Eigen::Index n() const { return design.n(); }
    Eigen::Index p() const { return design.p(); }
    Eigen::Index m() const { return outputs.m(); }
    Eigen::Index q() const { return basis.cols(); }

    static MsgpModel build(DesignMatrix scaled_design, OutputMatrix standardized_outputs,
                           KernelSpec kernel, BasisKind basis = BasisKind::Linear);
    static MsgpModel build(DesignMatrix scaled_design, OutputMatrix standardized_outputs,
                           KernelSpec kernel, BasisKind basis, MniwPrior prior);
};

struct PosteriorDraw {
    Eigen::MatrixXd B;      // q x m
    Eigen::MatrixXd Sigma;  // m x m
    CutoffVector tau;
    FactorPtr cached;  // factorization of R(tau); may be null
};

// Sufficient statistics of the conjugate MNIW update at a fixed tau.
struct ConjugateStats {
    FactorPtr factor;
    Eigen::MatrixXd Bhat;        // q x m
    Eigen::MatrixXd LambdaHat;   // q x q posterior row covariance
    Eigen::MatrixXd Shat;        // m x m
    double delta_hat = 0.0;
    double log_det_R = 0.0;
    double log_det_LambdaHat = 0.0;
    double log_det_Shat = 0.0;
};

ConjugateStats conjugate_stats(const MsgpModel& model, const CutoffVector& tau);
ConjugateStats conjugate_stats(const MsgpModel& model, const CutoffVector& tau, FactorPtr factor);

struct MatrixNormalParams {
    Eigen::MatrixXd Bhat;
    Eigen::MatrixXd LambdaHat;
};
MatrixNormalParams conditional_posterior_b(const MsgpModel& model, const CholeskyFactor& factor);

struct InverseWishartParams {
    Eigen::MatrixXd Shat;
    double delta_hat;
};
InverseWishartParams conditional_posterior_sigma(const MsgpModel& model, const Eigen::MatrixXd& Bhat,
                                                 const Eigen::MatrixXd& LambdaHat,
                                                 const CholeskyFactor& factor);

// B ~ MN(Bhat, LambdaHat, Sigma)
Eigen::MatrixXd sample_matrix_normal(const Eigen::MatrixXd& Bhat, const Eigen::MatrixXd& LambdaHat,
                                     const Eigen::MatrixXd& Sigma, Rng& rng);
// Sigma ~ W^{-1}(S, delta), E[Sigma] = S / (delta - m - 1)
Eigen::MatrixXd sample_inverse_wishart(const Eigen::MatrixXd& S, double delta, Rng& rng);

// Log of the marginal posterior density of tau (B, Sigma integrated out), up
// to an additive constant; -inf when R(tau) is not positive definite.
double log_marginal_tau(const MsgpModel& model, const CutoffVector& tau);

struct MatrixNormalPrediction {
    Eigen::MatrixXd mean;     // n* x m
    Eigen::MatrixXd row_cov;  // n* x n*
};
MatrixNormalPrediction predict_matrix_normal(const PosteriorDraw& draw, const MsgpModel& model,
                                             const DesignMatrix& test_design);

struct PredictiveDistribution {
    Eigen::MatrixXd location;   // Q, n* x m
    Eigen::MatrixXd row_scale;  // n* x n*
    Eigen::MatrixXd col_scale;  // m x m
    double dof = 0.0;

    // Central interval for output s at test point i from the marginal
    // Student-t with `dof` degrees of freedom.
    std::pair<double, double> marginal_interval(Eigen::Index i, Eigen::Index s,
                                                double level = 0.95) const;
};
PredictiveDistribution predict_matrix_t(const MsgpModel& model, const CutoffVector& tau,
                                        const DesignMatrix& test_design);

// Fast per-draw mean prediction, reusing alpha = R^{-1}(Y - H B).
class MeanPredictor {
  public:
    MeanPredictor(const MsgpModel& model, const PosteriorDraw& draw);

    // Rows of X are scaled test points; returns n* x m posterior means.
    Eigen::MatrixXd predict(const Eigen::MatrixXd& X) const;

  private:
    const MsgpModel& model_;
    Eigen::MatrixXd B_;
    CutoffVector tau_;
    Eigen::MatrixXd alpha_;  // n x m
};

}  // namespace msgp
