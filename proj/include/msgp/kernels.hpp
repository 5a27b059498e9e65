#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <string>

#include "msgp/design.hpp"

namespace msgp {

enum class KernelFamily { PowerExponential, Bohman, TruncatedPower, MaternWendland };

struct KernelSpec {
    KernelFamily family = KernelFamily::Bohman;
    double alpha = 1.5;  // truncated power
    double nu = 2.0;
    int taper_k = 2;  // Matern-Wendland taper parameters
    int taper_s = 1;
    Eigen::VectorXd phi;  // Matern inverse length scales, one per dimension (default 1)
    double omega = 0.9;   // target sparsity fraction
    double nugget = 1e-8;
    bool literal_quantile = false;  // cut-off read as the omega-quantile instead of (1-omega)

    void validate() const;
};

std::string to_string(KernelFamily family);
KernelFamily kernel_family_from_string(const std::string& name);

// Lower bound on nu keeping the truncated power family positive definite.
double trunc_power_nu_bound(double alpha);

// Scalar correlation families.  All are 1 at t = 0 and exactly 0 for t >= tau.
double corr_bohman(double t, double tau);
double corr_trunc_power(double t, double tau, double alpha, double nu);
double corr_matern52(double t, double phi);
double wendland_normalized(double u, int k, int s);  // u = t / tau
double corr_matern_wendland(double t, double phi, double tau, int k, int s);
double corr_power_exponential(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                              const Eigen::VectorXd& phi);

struct CutoffVector {
    Eigen::VectorXd tau;
    double c = 0.0;
    double omega = 0.9;

    void validate() const;
    static CutoffVector centered(double c, Eigen::Index p, double omega);
};

// Chooses c so that at least a fraction omega of the n(n-1)/2 pair L1
// distances are >= c.  Any tau with sum <= c then forces those pairs to be
// structural zeros of the product kernel.
double calibrate_cutoff(const DesignMatrix& design, double omega, bool literal_quantile = false);

// Symmetric n x n correlation, lower triangle stored, unit diagonal plus nugget.
struct SparseCorrelation {
    Eigen::Index n = 0;
    Eigen::SparseMatrix<double> lower;  // includes diagonal
    double nugget = 0.0;

    Eigen::Index stored_nonzeros() const { return lower.nonZeros(); }
    Eigen::MatrixXd dense() const;  // full symmetric matrix
};

SparseCorrelation assemble_sparse_correlation(const DesignMatrix& design, const KernelSpec& spec,
                                              const CutoffVector& tau);

// Per-dimension product kernel between two scaled points; zero as soon as any
// dimension reaches its cut-off.
double product_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const KernelSpec& spec,
                      const CutoffVector& tau);

// Cross-correlation matrix (n x n*) between training and test designs.
Eigen::SparseMatrix<double> cross_correlation(const DesignMatrix& train, const DesignMatrix& test,
                                              const KernelSpec& spec, const CutoffVector& tau);

}  // namespace msgp
