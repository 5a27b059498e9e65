#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <memory>

#include "msgp/kernels.hpp"

namespace msgp {

// Sparse Cholesky of a SparseCorrelation with fill-reducing (AMD) ordering.
// The symbolic analysis is reused across factorizations that share a sparsity
// pattern, which is the common case while the MCMC proposes new tau values
// inside one structural-zero pattern.
class CholeskyFactor {
  public:
    // Throws std::runtime_error carrying the failing pivot index when the
    // matrix is not positive definite even after one nugget x10 retry.
    explicit CholeskyFactor(const SparseCorrelation& R);

    Eigen::Index n() const { return n_; }
    double log_det() const { return log_det_; }
    double nugget_used() const { return nugget_used_; }
    Eigen::Index factor_nonzeros() const;

    // R^{-1} B
    Eigen::MatrixXd solve(const Eigen::MatrixXd& B) const;
    // A^T R^{-1} B
    Eigen::MatrixXd quad_form(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) const;
    // A^T R^{-1} A, explicitly symmetrized
    Eigen::MatrixXd quad_form(const Eigen::MatrixXd& A) const;

  private:
    Eigen::Index n_ = 0;
    double log_det_ = 0.0;
    double nugget_used_ = 0.0;
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>, Eigen::Lower,
                         Eigen::AMDOrdering<int>> llt_;
};

using FactorPtr = std::shared_ptr<const CholeskyFactor>;

FactorPtr factorize(const SparseCorrelation& R);

}  // namespace msgp
