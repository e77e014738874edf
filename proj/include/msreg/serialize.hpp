#pragma once

#include <json.hpp>
#include <string>

#include "msreg/adaptive.hpp"
#include "msreg/bench.hpp"
#include "msreg/dataset.hpp"
#include "msreg/estimator.hpp"

namespace msreg {

using json = nlohmann::json;

// SyntheticSpec <-> JSON config block with keys manifold, function, n,
// sigma, seed.
json to_json(const SyntheticSpec& spec);
SyntheticSpec synthetic_spec_from_json(const json& j);

/// Full experiment description: {"data": <spec block>, "order", "mode",
/// "n_grid", "repetitions", "seed", "test_fraction", optional "M"}.
ExperimentConfig experiment_config_from_json(const json& j);

/// Debug dump: cells with j, k, parent, children, sample indices and net
/// point, plus charts when provided (pass nullptr to omit).
json tree_to_json(const MultiscaleTree& tree, const std::vector<LocalChart>* charts);

/// Model files carry the tree skeleton, charts, coefficients, partition and
/// truncation bound; enough to reload and predict. Optional delta/threshold
/// diagnostics are included for adaptive fits.
void save_model(const GlobalEstimator& est, const std::string& path,
                const DeltaMap* deltas = nullptr, double tau = 0.0);
GlobalEstimator load_model(const std::string& path);

} // namespace msreg
