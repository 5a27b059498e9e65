#include "msgp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace msgp {

std::string to_string(KernelFamily family) {
    switch (family) {
        case KernelFamily::PowerExponential: return "power_exponential";
        case KernelFamily::Bohman: return "bohman";
        case KernelFamily::TruncatedPower: return "truncated_power";
        case KernelFamily::MaternWendland: return "matern_wendland";
    }
    return "unknown";
}

KernelFamily kernel_family_from_string(const std::string& name) {
    if (name == "power_exponential") return KernelFamily::PowerExponential;
    if (name == "bohman") return KernelFamily::Bohman;
    if (name == "truncated_power") return KernelFamily::TruncatedPower;
    if (name == "matern_wendland") return KernelFamily::MaternWendland;
    throw std::invalid_argument("unknown kernel family '" + name + "'");
}

double trunc_power_nu_bound(double alpha) {
    if (!(alpha > 0.0 && alpha < 2.0))
        throw std::invalid_argument("truncated power: alpha must lie in (0, 2)");
    if (alpha <= 1.5) return 2.0;
    if (alpha > 1.955)
        throw std::invalid_argument("truncated power: no validity bound tabulated for alpha > 1.955");
    // Known bounds at alpha = 3/2 and 5/3; conservative tail point at 1.955.
    struct Entry { double a, bound; };
    static const Entry table[] = {{1.5, 2.0}, {5.0 / 3.0, 3.0}, {1.955, 20.0}};
    for (int i = 0; i < 2; ++i) {
        if (alpha <= table[i + 1].a) {
            const double w = (alpha - table[i].a) / (table[i + 1].a - table[i].a);
            return table[i].bound + w * (table[i + 1].bound - table[i].bound);
        }
    }
    return table[2].bound;
}

double corr_bohman(double t, double tau) {
    if (!(tau > 0.0)) throw std::invalid_argument("bohman: tau must be positive");
    if (t < 0.0) throw std::invalid_argument("bohman: t must be nonnegative");
    if (t >= tau) return 0.0;
    const double u = t / tau;
    const double pi = std::numbers::pi;
    return (1.0 - u) * std::cos(pi * u) + std::sin(pi * u) / pi;
}

double corr_trunc_power(double t, double tau, double alpha, double nu) {
    if (!(tau > 0.0)) throw std::invalid_argument("truncated power: tau must be positive");
    const double bound = trunc_power_nu_bound(alpha);
    if (nu < bound)
        throw std::invalid_argument("truncated power: nu below validity bound nu_p(alpha) = " +
                                    std::to_string(bound));
    if (t >= tau) return 0.0;
    return std::pow(1.0 - std::pow(t / tau, alpha), nu);
}

double corr_matern52(double t, double phi) {
    if (!(phi > 0.0)) throw std::invalid_argument("matern: phi must be positive");
    const double a = std::sqrt(5.0) * t * phi;
    return (1.0 + a + a * a / 3.0) * std::exp(-a);
}

double wendland_normalized(double u, int k, int s) {
    if (u >= 1.0) return 0.0;
    const double ell = std::floor(s / 2.0) + k + 1;
    if (ell < 1.0) throw std::invalid_argument("wendland: floor(s/2) + k + 1 must be >= 1");
    const double poly = (ell * ell + 4.0 * ell + 3.0) * u * u + (3.0 * ell + 6.0) * u + 3.0;
    return std::pow(1.0 - u, ell + 2.0) * poly / 3.0;  // value at u = 0 is 3
}

double corr_matern_wendland(double t, double phi, double tau, int k, int s) {
    if (!(tau > 0.0)) throw std::invalid_argument("matern_wendland: tau must be positive");
    if (t >= tau) return 0.0;
    return corr_matern52(t, phi) * wendland_normalized(t / tau, k, s);
}

double corr_power_exponential(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                              const Eigen::VectorXd& phi) {
    if (x.size() != y.size() || x.size() != phi.size())
        throw std::invalid_argument("power exponential: dimension mismatch");
    double e = 0.0;
    for (Eigen::Index k = 0; k < x.size(); ++k) e += phi(k) * (x(k) - y(k)) * (x(k) - y(k));
    return std::exp(-e);
}

void KernelSpec::validate() const {
    if (!(omega > 0.0 && omega < 1.0))
        throw std::invalid_argument("kernel spec: omega must lie in (0, 1)");
    if (nugget < 0.0) throw std::invalid_argument("kernel spec: negative nugget");
    if (family == KernelFamily::TruncatedPower) {
        const double bound = trunc_power_nu_bound(alpha);
        if (nu < bound)
            throw std::invalid_argument("kernel spec: nu = " + std::to_string(nu) +
                                        " below nu_p(alpha) = " + std::to_string(bound));
    }
    if (family == KernelFamily::MaternWendland) {
        if (std::floor(taper_s / 2.0) + taper_k + 1 < 1)
            throw std::invalid_argument("kernel spec: invalid Wendland taper parameters");
    }
}

void CutoffVector::validate() const {
    if ((tau.array() < 0.0).any())
        throw std::invalid_argument("cutoff vector: tau components must be nonnegative");
    if (tau.sum() > c * (1.0 + 1e-12))
        throw std::invalid_argument("cutoff vector: sum of tau exceeds budget c");
}

CutoffVector CutoffVector::centered(double c, Eigen::Index p, double omega) {
    CutoffVector cv;
    cv.c = c;
    cv.omega = omega;
    cv.tau = Eigen::VectorXd::Constant(p, c / static_cast<double>(p + 1));
    return cv;
}

double calibrate_cutoff(const DesignMatrix& design, double omega, bool literal_quantile) {
    if (!design.scaled) throw std::invalid_argument("calibrate_cutoff: design must be scaled");
    if (!(omega > 0.0 && omega < 1.0)) throw std::invalid_argument("calibrate_cutoff: omega in (0,1)");
    const Eigen::Index n = design.n();
    if (n < 2) throw std::invalid_argument("calibrate_cutoff: need n >= 2");
    std::vector<double> d;
    d.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            d.push_back((design.values.row(i) - design.values.row(j)).cwiseAbs().sum());
    std::sort(d.begin(), d.end());
    const double frac = literal_quantile ? omega : 1.0 - omega;
    const std::size_t idx = static_cast<std::size_t>(std::floor(static_cast<double>(d.size()) * frac));
    if (idx >= d.size()) return std::nextafter(d.back(), std::numeric_limits<double>::infinity());
    return d[idx];
}

double product_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const KernelSpec& spec,
                      const CutoffVector& tau) {
    const Eigen::Index p = a.size();
    double r = 1.0;
    for (Eigen::Index k = 0; k < p; ++k) {
        const double t = std::abs(a(k) - b(k));
        const double tk = tau.tau(k);
        if (t >= tk) return 0.0;
        switch (spec.family) {
            case KernelFamily::Bohman:
                r *= corr_bohman(t, tk);
                break;
            case KernelFamily::TruncatedPower:
                r *= std::pow(1.0 - std::pow(t / tk, spec.alpha), spec.nu);
                break;
            case KernelFamily::MaternWendland: {
                const double phi = spec.phi.size() > k ? spec.phi(k) : 1.0;
                r *= corr_matern52(t, phi) * wendland_normalized(t / tk, spec.taper_k, spec.taper_s);
                break;
            }
            case KernelFamily::PowerExponential: {
                const double phi = spec.phi.size() > k ? spec.phi(k) : 1.0;
                r *= std::exp(-phi * t * t);
                break;
            }
        }
        if (r == 0.0) return 0.0;
    }
    return r;
}

Eigen::MatrixXd SparseCorrelation::dense() const {
    Eigen::MatrixXd full = Eigen::MatrixXd(lower);
    full.triangularView<Eigen::StrictlyUpper>() =
        full.triangularView<Eigen::StrictlyLower>().transpose();
    return full;
}

SparseCorrelation assemble_sparse_correlation(const DesignMatrix& design, const KernelSpec& spec,
                                              const CutoffVector& tau) {
    if (!design.scaled) throw std::invalid_argument("assemble_sparse_correlation: design must be scaled");
    spec.validate();
    tau.validate();
    if (tau.tau.size() != design.p())
        throw std::invalid_argument("assemble_sparse_correlation: tau dimension mismatch");
    const Eigen::Index n = design.n();
    const Eigen::Index p = design.p();

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(n) * 8);
    for (Eigen::Index i = 0; i < n; ++i) trip.emplace_back(i, i, 1.0 + spec.nugget);

    // Lower triangle only; rows scanned in order so entries come out sorted by
    // (col, row) which keeps assembly deterministic.
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = j + 1; i < n; ++i) {
            double r = 1.0;
            for (Eigen::Index k = 0; k < p; ++k) {
                const double t = std::abs(design.values(i, k) - design.values(j, k));
                if (t >= tau.tau(k)) {
                    r = 0.0;
                    break;
                }
            }
            if (r == 0.0) continue;
            r = product_kernel(design.values.row(i), design.values.row(j), spec, tau);
            if (r != 0.0) trip.emplace_back(i, j, r);
        }
    }

    SparseCorrelation out;
    out.n = n;
    out.nugget = spec.nugget;
    out.lower.resize(n, n);
    out.lower.setFromTriplets(trip.begin(), trip.end());
    out.lower.makeCompressed();
    return out;
}

Eigen::SparseMatrix<double> cross_correlation(const DesignMatrix& train, const DesignMatrix& test,
                                              const KernelSpec& spec, const CutoffVector& tau) {
    if (!train.scaled || !test.scaled)
        throw std::invalid_argument("cross_correlation: designs must be scaled");
    if (train.p() != test.p()) throw std::invalid_argument("cross_correlation: dimension mismatch");
    const Eigen::Index n = train.n();
    const Eigen::Index ns = test.n();
    std::vector<Eigen::Triplet<double>> trip;
    for (Eigen::Index j = 0; j < ns; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const double r = product_kernel(train.values.row(i), test.values.row(j), spec, tau);
            if (r != 0.0) trip.emplace_back(i, j, r);
        }
    }
    Eigen::SparseMatrix<double> r(n, ns);
    r.setFromTriplets(trip.begin(), trip.end());
    r.makeCompressed();
    return r;
}

}  // namespace msgp
