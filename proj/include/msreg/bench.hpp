#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "msreg/adaptive.hpp"
#include "msreg/dataset.hpp"
#include "msreg/estimator.hpp"

namespace msreg {

/// How the partition is selected for a fit.
struct ModeSpec {
    enum class Kind { UniformJ, UniformJstar, Adaptive };
    Kind kind = Kind::Adaptive;
    int j = 0;             // UniformJ
    double s = 2.0;        // UniformJstar regularity input
    double mu = 1.0;       // UniformJstar scale constant
    std::optional<double> kappa;  // Adaptive; empty -> default policy
};

struct ExperimentConfig {
    SyntheticSpec data;          // n_samples is overridden by n_grid entries
    int order = 1;               // polynomial order, 0 or 1
    std::optional<double> M;     // truncation bound; empty -> max |y|
    ModeSpec mode;
    std::vector<int> n_grid;     // strictly increasing total sample counts
    int repetitions = 1;
    std::uint64_t seed = 0;
    double test_fraction = 0.5;  // held-out share of each run's samples
};

struct StageTimes {
    double split = 0, tree = 0, gmra = 0, fit = 0, select = 0, predict = 0;
    double total() const { return split + tree + gmra + fit + select + predict; }
};

struct RunResult {
    int n = 0;
    int rep = 0;
    double mse = 0.0;
    int cells = 0;          // partition cardinality
    StageTimes seconds;
};

struct SlopeFit {
    double m = 0.0;        // OLS slope of ln MSE on ln n
    double s_hat = 0.0;    // -m d / (2 (m+1)) when m in (-1, 0]
    bool defined = false;  // slope computable (>= 3 points, all MSE > 0)
    bool s_defined = false;
};

struct RateReport {
    std::vector<int> ns;
    std::vector<double> mean_mse;
    std::vector<double> std_mse;
    std::vector<double> mean_cells;
    SlopeFit slope;
    std::vector<RunResult> runs;
};

/// One fitted pipeline over an already-split dataset.
struct PipelineResult {
    GlobalEstimator estimator;
    StageTimes seconds;
    double kappa = 0.0;  // adaptive runs: the kappa actually used
    double tau = 0.0;
    std::optional<DeltaMap> deltas;
};

/// Build tree on the tree half, charts/fits on the regression half, select
/// the partition per mode. d is the intrinsic dimension driving chart rank
/// and leaf pruning.
PipelineResult fit_pipeline(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                            const SplitIndices& split, int d, int order,
                            const ModeSpec& mode, std::optional<double> M,
                            std::uint64_t seed);

/// Mean squared prediction error over a test set.
double evaluate_mse(const GlobalEstimator& est, const Eigen::MatrixXd& X,
                    const Eigen::VectorXd& y);

/// OLS slope of ln MSE on ln n and the implied regularity estimate.
/// Undefined (not a crash) when fewer than 3 points, any MSE <= 0, or the
/// slope falls outside (-1, 0).
SlopeFit fit_slope(const std::vector<double>& ns, const std::vector<double>& mses, int d);

/// Full grid experiment: fresh data per (n, repetition), deterministic in
/// cfg.seed; slope fitted on per-n means.
RateReport run_experiment(const ExperimentConfig& cfg);

/// Per-stage wall-clock rows for the config's grid (single repetition per
/// entry unless cfg.repetitions says otherwise).
std::vector<RunResult> timing_profile(const ExperimentConfig& cfg);

/// Report files: CSV rows n,rep,mse,cells,seconds_* and a JSON summary.
void write_report_csv(const RateReport& report, const std::string& path);
void write_report_json(const RateReport& report, const ExperimentConfig& cfg,
                       const std::string& path);

/// Reads a results CSV (any file with n and mse columns) and aggregates
/// repetitions by mean before fitting the slope.
SlopeFit slope_from_csv(const std::string& path, int d);

} // namespace msreg
