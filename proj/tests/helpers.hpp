#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "msgp/design.hpp"
#include "msgp/kernels.hpp"
#include "msgp/random.hpp"

namespace testutil {

// Hand-rolled dense lower Cholesky, independent of the sparse solver path.
inline bool dense_chol(const Eigen::MatrixXd& a, Eigen::MatrixXd& l) {
    const Eigen::Index n = a.rows();
    l = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        double d = a(j, j);
        for (Eigen::Index k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (d <= 0.0) return false;
        l(j, j) = std::sqrt(d);
        for (Eigen::Index i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (Eigen::Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / l(j, j);
        }
    }
    return true;
}

inline double dense_logdet(const Eigen::MatrixXd& l) {
    double ld = 0.0;
    for (Eigen::Index i = 0; i < l.rows(); ++i) ld += 2.0 * std::log(l(i, i));
    return ld;
}

// Solves A x = b given the dense Cholesky factor (forward then backward).
inline Eigen::MatrixXd dense_solve(const Eigen::MatrixXd& l, const Eigen::MatrixXd& b) {
    const Eigen::Index n = l.rows();
    Eigen::MatrixXd y = b;
    for (Eigen::Index c = 0; c < b.cols(); ++c) {
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index k = 0; k < i; ++k) y(i, c) -= l(i, k) * y(k, c);
            y(i, c) /= l(i, i);
        }
        for (Eigen::Index i = n - 1; i >= 0; --i) {
            for (Eigen::Index k = i + 1; k < n; ++k) y(i, c) -= l(k, i) * y(k, c);
            y(i, c) /= l(i, i);
        }
    }
    return y;
}

// Brute-force dense correlation from the scalar kernel functions: plain
// double loop, no support pre-checks or early exits.
inline Eigen::MatrixXd brute_correlation(const msgp::DesignMatrix& design,
                                         const msgp::KernelSpec& spec,
                                         const msgp::CutoffVector& tau) {
    const Eigen::Index n = design.n();
    const Eigen::Index p = design.p();
    Eigen::MatrixXd r(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            double v = 1.0;
            for (Eigen::Index k = 0; k < p; ++k) {
                const double t = std::abs(design.values(i, k) - design.values(j, k));
                switch (spec.family) {
                    case msgp::KernelFamily::Bohman:
                        v *= msgp::corr_bohman(t, tau.tau(k));
                        break;
                    case msgp::KernelFamily::TruncatedPower:
                        v *= msgp::corr_trunc_power(t, tau.tau(k), spec.alpha, spec.nu);
                        break;
                    case msgp::KernelFamily::MaternWendland: {
                        const double phi = spec.phi.size() > k ? spec.phi(k) : 1.0;
                        v *= msgp::corr_matern_wendland(t, phi, tau.tau(k), spec.taper_k,
                                                        spec.taper_s);
                        break;
                    }
                    case msgp::KernelFamily::PowerExponential: {
                        const double phi = spec.phi.size() > k ? spec.phi(k) : 1.0;
                        v *= std::exp(-phi * t * t);
                        break;
                    }
                }
            }
            r(i, j) = v;
            if (i == j) r(i, j) += spec.nugget;
        }
    return r;
}

// Random design already on the [-1, 1] scale.
inline msgp::DesignMatrix random_scaled_design(Eigen::Index n, Eigen::Index p,
                                               std::uint64_t seed) {
    msgp::DesignMatrix d;
    d.values.resize(n, p);
    msgp::Rng rng(seed);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index k = 0; k < p; ++k) d.values(i, k) = msgp::rand_uniform(rng, -1.0, 1.0);
    for (Eigen::Index k = 0; k < p; ++k)
        d.specs.push_back(msgp::VariableSpec::continuous("x" + std::to_string(k + 1), -1.0, 1.0));
    d.scaled = true;
    return d;
}

}  // namespace testutil
