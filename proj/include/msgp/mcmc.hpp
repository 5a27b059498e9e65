#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "msgp/emulator.hpp"
#include "msgp/random.hpp"

namespace msgp {

// Stick-breaking map between unconstrained z in R^d and the corner simplex
// {tau_k >= 0, sum tau_k <= c}.  z = 0 maps to the centroid.
class SimplexTransform {
  public:
    SimplexTransform(Eigen::Index d, double c) : d_(d), c_(c) {}

    Eigen::VectorXd to_simplex(const Eigen::VectorXd& z) const;
    Eigen::VectorXd to_unconstrained(const Eigen::VectorXd& tau) const;
    double log_jacobian(const Eigen::VectorXd& z) const;
    double budget() const { return c_; }

  private:
    Eigen::Index d_;
    double c_;
};

// In-place rank-one Cholesky update: L L^T + sign * x x^T.  Returns false when
// a downdate would lose positive definiteness.
bool chol_rank_one(Eigen::MatrixXd& L, Eigen::VectorXd x, double sign);

struct RamState {
    Eigen::VectorXd z;      // unconstrained parameter
    Eigen::MatrixXd chol;   // lower-triangular adaptation factor
    long step = 0;
    double target_accept = 0.234;
    double gamma = 2.0 / 3.0;

    static RamState init(Eigen::Index d, double target_accept = 0.234, double gamma = 2.0 / 3.0,
                         double scale = 0.1);
};

// One robust adaptive Metropolis step on log_target over the unconstrained
// space.  Adapts the proposal factor toward the target acceptance rate.
bool ram_step(RamState& state, double& log_target_value,
              const std::function<double(const Eigen::VectorXd&)>& log_target, Rng& rng,
              bool adapt = true);

struct McmcConfig {
    long iterations = 50000;
    long burn_in = 1000;
    long thin = 25;
    int chains = 3;
    double target_accept = 0.234;
    double gamma = 2.0 / 3.0;
    double init_upsilon = 0.1;
    bool fix_tau = false;
    Eigen::VectorXd fixed_tau;  // used when fix_tau; empty means simplex centroid
    std::vector<std::uint64_t> seeds;

    void validate() const;
    long stored_draws() const { return thin > 0 ? (iterations - burn_in) / thin : 0; }
};

struct ChainResult {
    std::vector<PosteriorDraw> draws;
    double accept_rate = 0.0;
    std::uint64_t seed = 0;
};

ChainResult run_chain(const MsgpModel& model, const McmcConfig& config, std::uint64_t seed);
std::vector<ChainResult> run_parallel_chains(const MsgpModel& model, const McmcConfig& config,
                                             int chains, const std::vector<std::uint64_t>& seeds);

struct PsrfReport {
    std::vector<std::string> names;
    Eigen::VectorXd point;
    Eigen::VectorXd upper;
};

// Gelman-Rubin diagnostic per scalar parameter; one matrix per chain, draws
// in rows.
PsrfReport compute_psrf(const std::vector<Eigen::MatrixXd>& chains,
                        const std::vector<std::string>& names = {});
// Over tau components and B entries of posterior draws.
PsrfReport compute_psrf(const std::vector<ChainResult>& chains);

}  // namespace msgp
