#pragma once

#include <string>
#include <vector>

#include "msreg/gmra.hpp"
#include "msreg/mstree.hpp"

namespace msreg {

struct AssumptionCheck {
    bool pass = false;
    double constant = 0.0;  // tightest empirical constant for the assumption
    std::string note;
};

/// Diagnostic report over the tree-decomposition assumptions. Never throws:
/// failures are recorded, not raised.
struct ValidationReport {
    AssumptionCheck nesting;      // children partition parents; theta-free
    AssumptionCheck cover;        // per-scale partitions cover the samples
    AssumptionCheck cell_count;   // constant = theta1_hat = min_j 2^{jd} / #Lambda_j
    AssumptionCheck radius;       // constant = theta2_hat = max ||x-c|| / r_j, pass iff <= 3
    AssumptionCheck spectrum_lo;  // constant = theta3_hat = min lambda_d d / r_j^2
    AssumptionCheck spectrum_gap; // constant = theta4_hat = max lambda_{d+1}/lambda_d, pass iff < 1
    int branching_min = 0;        // observed a_min over internal cells
    int branching_max = 0;        // observed a_max
    int first_validated_scale = 0;
    int validated_cells = 0;      // cells entering the spectral checks

    bool all_pass() const {
        return nesting.pass && cover.pass && cell_count.pass && radius.pass &&
               spectrum_lo.pass && spectrum_gap.pass;
    }
    std::string summary() const;
};

/// Empirically checks the tree against its structural assumptions.
/// Spectral checks use cells at scales >= 1 holding at least d+2 samples,
/// coarser and thinner cells being reported but not judged.
ValidationReport validate_assumptions(const MultiscaleTree& tree,
                                      const Eigen::MatrixXd& regression_points,
                                      const std::vector<LocalChart>& charts);

} // namespace msreg
