#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace msgp {

enum class VariableKind { Continuous, Categorical };

struct VariableSpec {
    std::string name;
    VariableKind kind = VariableKind::Continuous;
    double lower = 0.0;  // continuous range
    double upper = 1.0;
    std::vector<std::string> levels;  // categorical labels

    static VariableSpec continuous(std::string name, double lower, double upper);
    static VariableSpec categorical(std::string name, std::vector<std::string> levels);

    int level_count() const { return static_cast<int>(levels.size()); }
    void validate() const;
};

// n x p input sample.  Categorical columns hold integer level codes.
struct DesignMatrix {
    Eigen::MatrixXd values;
    std::vector<VariableSpec> specs;
    bool scaled = false;

    Eigen::Index n() const { return values.rows(); }
    Eigen::Index p() const { return values.cols(); }
};

struct OutputMatrix {
    Eigen::MatrixXd values;
    Eigen::VectorXd column_means;
    Eigen::VectorXd column_sds;
    bool standardized = false;

    Eigen::Index n() const { return values.rows(); }
    Eigen::Index m() const { return values.cols(); }
};

struct LhsOptions {
    bool optimize = false;
    int swap_budget = 2000;  // hill-climbing iterations per restart
    int restarts = 4;
};

// Latin Hypercube over the continuous variables in `specs` (one column per
// continuous spec, in spec order).  Categorical variables are attached later
// by mixed_design.
DesignMatrix lhs_sample(const std::vector<VariableSpec>& specs, Eigen::Index n,
                        const LhsOptions& opts, std::uint64_t seed);

inline DesignMatrix lhs_sample(const std::vector<VariableSpec>& specs, Eigen::Index n,
                               bool optimize, std::uint64_t seed) {
    LhsOptions opts;
    opts.optimize = optimize;
    return lhs_sample(specs, n, opts, seed);
}

// Crosses the continuous rows with the categorical level combinations: full
// Cartesian product when it has at most `cross_cap` rows, otherwise a uniform
// random assignment of level combinations to the continuous rows.
DesignMatrix mixed_design(const DesignMatrix& continuous, const std::vector<VariableSpec>& specs,
                          std::uint64_t seed, Eigen::Index cross_cap = 10000);

// Affine map of every continuous column onto [-1, 1] using the spec range;
// categorical level codes are mapped the same way from {0..L-1}.
DesignMatrix scale_inputs(const DesignMatrix& design);
DesignMatrix unscale_inputs(const DesignMatrix& design);

OutputMatrix standardize_outputs(const OutputMatrix& outputs);
OutputMatrix destandardize_outputs(const OutputMatrix& outputs);
// Applies stored means/sds of `reference` to a prediction matrix.
Eigen::MatrixXd destandardize_predictions(const Eigen::MatrixXd& pred, const OutputMatrix& reference);

// Minimum pairwise L2 distance between rows; used by the maximin optimizer.
double min_pairwise_distance(const Eigen::MatrixXd& values);

}  // namespace msgp
