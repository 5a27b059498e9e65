#include "msgp/sparse_linalg.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace msgp {

namespace {

Eigen::SparseMatrix<double> with_nugget(const SparseCorrelation& R, double extra) {
    Eigen::SparseMatrix<double> m = R.lower;
    for (Eigen::Index j = 0; j < m.outerSize(); ++j)
        for (Eigen::SparseMatrix<double>::InnerIterator it(m, j); it; ++it)
            if (it.row() == it.col()) it.valueRef() += extra;
    return m;
}

// Locates the failing pivot for the error message via an LDLT pass.
Eigen::Index failing_pivot(const Eigen::SparseMatrix<double>& lower) {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt;
    ldlt.compute(lower);
    const Eigen::VectorXd d = ldlt.vectorD();
    for (Eigen::Index i = 0; i < d.size(); ++i)
        if (!(d(i) > 0.0)) return i;
    return d.size() - 1;
}

}  // namespace

CholeskyFactor::CholeskyFactor(const SparseCorrelation& R) : n_(R.n), nugget_used_(R.nugget) {
    llt_.compute(R.lower);
    if (llt_.info() != Eigen::Success) {
        // Compact kernels at extreme tau can be numerically borderline; retry
        // once with a ten-fold nugget before giving up.
        const double extra = 9.0 * (R.nugget > 0.0 ? R.nugget : 1e-8) + (R.nugget > 0.0 ? 0.0 : 1e-8);
        Eigen::SparseMatrix<double> bumped = with_nugget(R, extra);
        nugget_used_ = R.nugget + extra;
        llt_.compute(bumped);
        if (llt_.info() != Eigen::Success) {
            throw std::runtime_error("correlation matrix not positive definite (pivot " +
                                     std::to_string(failing_pivot(bumped)) + ")");
        }
    }
    log_det_ = 2.0 * llt_.matrixL().nestedExpression().diagonal().array().log().sum();
}

Eigen::Index CholeskyFactor::factor_nonzeros() const {
    return llt_.matrixL().nestedExpression().nonZeros();
}

Eigen::MatrixXd CholeskyFactor::solve(const Eigen::MatrixXd& B) const {
    if (B.rows() != n_) throw std::invalid_argument("CholeskyFactor::solve: dimension mismatch");
    return llt_.solve(B);
}

Eigen::MatrixXd CholeskyFactor::quad_form(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) const {
    if (A.rows() != n_ || B.rows() != n_)
        throw std::invalid_argument("CholeskyFactor::quad_form: dimension mismatch");
    return A.transpose() * llt_.solve(B);
}

Eigen::MatrixXd CholeskyFactor::quad_form(const Eigen::MatrixXd& A) const {
    Eigen::MatrixXd q = quad_form(A, A);
    return 0.5 * (q + q.transpose());
}

FactorPtr factorize(const SparseCorrelation& R) {
    return std::make_shared<const CholeskyFactor>(R);
}

}  // namespace msgp
