#pragma once

#include <string>
#include <vector>

#include "msgp/io.hpp"
#include "msgp/sensitivity.hpp"

namespace msgp {

// K-fold cross-validation over sparsity levels.  Each fold runs a short
// adaptive chain for the cut-off vector (capped at 400 iterations so the
// sweep stays cheap) and predicts the held-out fold with the matrix-t mean
// at the posterior-mean cut-offs; metrics are on the standardized scale.
CvReport cross_validate(const DesignMatrix& scaled_design, const OutputMatrix& raw_outputs,
                        const RunConfig& config, int folds, const std::vector<double>& omegas,
                        std::uint64_t seed);

// Group-wise row means: one output column per group.  `groups[j]` is the
// group id of output column j; ids must form 0..G-1 with no empty group.
OutputMatrix aggregate_outputs(const OutputMatrix& outputs, const std::vector<int>& groups);

struct PipelineOptions {
    std::string config_path;
    std::string design_path;
    std::string specs_path;  // sidecar variable specs for the design CSV
    std::string outputs_path;
    std::string out_dir = ".";
    Eigen::Index saltelli_s = 1000;
    std::uint64_t seed = 0;
};

// design validation -> standardize -> fit -> diag -> sa.  Writes model.jsonl,
// psrf.csv and indices.json into out_dir.  Returns 0 on success, 1 on a
// numerical failure, 2 on an I/O or config error.
int run_pipeline(const PipelineOptions& options);

// Serialization of a fitted index posterior (summaries plus per-output
// breakdown), embedding the config digest.
std::string index_posterior_json(const IndexPosterior& posterior, const std::string& digest);

}  // namespace msgp
