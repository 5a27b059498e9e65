#pragma once

#include <Eigen/Dense>
#include <vector>

namespace msgp {

// Product of |4x - 2| factors on the unit cube; a_i controls how active
// input i is (larger = less active).  E[g] = 1 for any a.
double sobol_g(const Eigen::VectorXd& x, const Eigen::VectorXd& a);

struct SobolGOracle {
    Eigen::VectorXd S;   // exact first-order indices
    Eigen::VectorXd St;  // exact total indices
    double V = 0.0;      // total variance
};
SobolGOracle sobol_g_oracle(const Eigen::VectorXd& a);

// y(t_l) = atan(x1) cos(t_l) + atan(x2) sin(t_l) on a uniform grid of q
// points over [0, 2pi]; x in [-7, 7]^2.
Eigen::VectorXd arctan_temporal(const Eigen::VectorXd& x, Eigen::Index q = 100);
Eigen::VectorXd arctan_time_grid(Eigen::Index q = 100);

}  // namespace msgp
