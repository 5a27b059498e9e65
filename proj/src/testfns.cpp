#include "msgp/testfns.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace msgp {

double sobol_g(const Eigen::VectorXd& x, const Eigen::VectorXd& a) {
    if (x.size() != a.size()) throw std::invalid_argument("sobol_g: dimension mismatch");
    double g = 1.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (x(i) < 0.0 || x(i) > 1.0) throw std::domain_error("sobol_g: x outside the unit cube");
        if (a(i) < 0.0) throw std::invalid_argument("sobol_g: coefficients must be nonnegative");
        g *= (std::abs(4.0 * x(i) - 2.0) + a(i)) / (1.0 + a(i));
    }
    return g;
}

SobolGOracle sobol_g_oracle(const Eigen::VectorXd& a) {
    const Eigen::Index p = a.size();
    Eigen::VectorXd Vi(p);
    for (Eigen::Index i = 0; i < p; ++i) {
        if (a(i) < 0.0) throw std::invalid_argument("sobol_g_oracle: coefficients must be nonnegative");
        Vi(i) = (1.0 / 3.0) / ((1.0 + a(i)) * (1.0 + a(i)));
    }
    double prod = 1.0;
    for (Eigen::Index i = 0; i < p; ++i) prod *= 1.0 + Vi(i);
    SobolGOracle oracle;
    oracle.V = prod - 1.0;
    oracle.S.resize(p);
    oracle.St.resize(p);
    for (Eigen::Index i = 0; i < p; ++i) {
        oracle.S(i) = Vi(i) / oracle.V;
        oracle.St(i) = Vi(i) * (prod / (1.0 + Vi(i))) / oracle.V;
    }
    return oracle;
}

Eigen::VectorXd arctan_time_grid(Eigen::Index q) {
    if (q < 2) throw std::invalid_argument("arctan_time_grid: need at least 2 time steps");
    return Eigen::VectorXd::LinSpaced(q, 0.0, 2.0 * std::numbers::pi);
}

Eigen::VectorXd arctan_temporal(const Eigen::VectorXd& x, Eigen::Index q) {
    if (x.size() != 2) throw std::invalid_argument("arctan_temporal: expects two inputs");
    if (x.minCoeff() < -7.0 || x.maxCoeff() > 7.0)
        throw std::domain_error("arctan_temporal: x outside [-7, 7]^2");
    const Eigen::VectorXd t = arctan_time_grid(q);
    const double a1 = std::atan(x(0));
    const double a2 = std::atan(x(1));
    return a1 * t.array().cos() + a2 * t.array().sin();
}

}  // namespace msgp
