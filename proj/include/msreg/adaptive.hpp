#pragma once

#include <vector>

#include "msreg/estimator.hpp"

namespace msreg {

/// Per-cell inter-scale approximation differences. delta[c] is the empirical
/// norm of (local fit at c) - (children's fits) over c's samples, normalized
/// by the full regression-half size; leaves get 0.
struct DeltaMap {
    std::vector<double> delta;  // indexed by cell id
    std::vector<int> count;     // samples contributing to each entry
};

DeltaMap compute_deltas(const MultiscaleTree& tree,
                        const std::vector<LocalChart>& charts,
                        const std::vector<LocalEstimator>& fits,
                        const Eigen::MatrixXd& points);

/// tau_n = kappa * sqrt(ln n / n).
double threshold(int n, double kappa);

/// Smallest set of cells containing the root, closed under taking parents,
/// and containing every flagged cell. Returned as a membership mask.
std::vector<char> smallest_proper_subtree(const MultiscaleTree& tree,
                                          const std::vector<char>& flags);

/// Outer leaves of a proper subtree: non-members whose parent is a member,
/// plus members that are leaves of the data tree (they have no refinement
/// to offer and stand for themselves).
std::vector<int> outer_leaves(const MultiscaleTree& tree, const std::vector<char>& subtree);

struct AdaptiveResult {
    Partition partition;
    DeltaMap deltas;
    double tau = 0.0;
    std::vector<char> subtree;
};

/// Full thresholding pass: deltas, tau_n from the regression-half size,
/// flags = {delta >= tau}, smallest proper subtree, outer-leaf partition.
AdaptiveResult adaptive_partition(const MultiscaleTree& tree,
                                  const std::vector<LocalChart>& charts,
                                  const std::vector<LocalEstimator>& fits,
                                  const Eigen::MatrixXd& points, double kappa);

/// Heuristic default: 0.5 * (max|y| + sigma_hat), with sigma_hat a MAD
/// estimate of the residual scale under the finest uniform fit.
double default_kappa(const MultiscaleTree& tree,
                     const std::vector<LocalChart>& charts,
                     const std::vector<LocalEstimator>& fits,
                     const Eigen::MatrixXd& points,
                     const Eigen::VectorXd& labels);

} // namespace msreg
