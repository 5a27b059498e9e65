#pragma once

#include <string>
#include <vector>

#include "msgp/design.hpp"
#include "msgp/emulator.hpp"
#include "msgp/mcmc.hpp"

namespace msgp {

// --- CSV ---------------------------------------------------------------

// Design CSV: header row of variable names, one row per point.  The sidecar
// JSON spec file describes each variable's kind/range/levels.
void write_design_csv(const std::string& path, const DesignMatrix& design);
DesignMatrix read_design_csv(const std::string& path, const std::vector<VariableSpec>& specs,
                             bool scaled = false);

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& values,
                      const std::vector<std::string>& header);
Eigen::MatrixXd read_matrix_csv(const std::string& path, std::vector<std::string>* header = nullptr);

void write_outputs_csv(const std::string& path, const OutputMatrix& outputs);
OutputMatrix read_outputs_csv(const std::string& path);

// --- Variable spec sidecar ---------------------------------------------

void write_variable_specs(const std::string& path, const std::vector<VariableSpec>& specs);
std::vector<VariableSpec> read_variable_specs(const std::string& path);

// --- Run configuration --------------------------------------------------

struct RunConfig {
    KernelSpec kernel;
    BasisKind basis = BasisKind::Linear;
    McmcConfig mcmc;
    // Prior overrides; negative delta0 means "use the vague default".
    double prior_lambda0 = 1e-4;
    double prior_delta0 = -1.0;

    std::string canonical_json() const;
    std::string digest() const;  // short hex hash of canonical_json
};

RunConfig run_config_from_json(const std::string& text);  // unknown keys rejected
RunConfig read_run_config(const std::string& path);
void write_run_config(const std::string& path, const RunConfig& config);

// --- Model archive -------------------------------------------------------

// JSON-lines: a header object (config, dimensions, cut-off, standardization
// constants, training data) followed by one object per posterior draw.
struct ModelArchive {
    RunConfig config;
    MsgpModel model;
    std::vector<PosteriorDraw> draws;
    std::vector<double> accept_rates;
};

void write_model_archive(const std::string& path, const ModelArchive& archive);
ModelArchive read_model_archive(const std::string& path);

// --- Cross-validation report ---------------------------------------------

struct CvReport {
    std::vector<double> omegas;
    // indexed [omega][fold], each entry holds per-output metrics
    std::vector<std::vector<Eigen::VectorXd>> fold_p;    // proportion of variance
    std::vector<std::vector<Eigen::VectorXd>> fold_rho;  // RMSE, standardized scale
    std::vector<Eigen::VectorXd> aggregate_p;            // per omega, per output
    std::vector<Eigen::VectorXd> aggregate_rho;
    std::vector<double> fit_seconds;  // per omega
    std::string config_digest;
};

std::string cv_report_json(const CvReport& report);
void write_cv_report(const std::string& path, const CvReport& report);

}  // namespace msgp
