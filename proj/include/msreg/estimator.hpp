#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <memory>
#include <optional>
#include <vector>

#include "msreg/gmra.hpp"
#include "msreg/mstree.hpp"

namespace msreg {

/// Clamp to [-M, M].
inline double truncate(double v, double M) { return std::clamp(v, -M, M); }

/// Local polynomial fit on one cell, order 0 or 1. For order 1 the slopes
/// live in chart coordinates and the intercept pairs with the dimensional
/// scale column rho_j = r0 * 2^-j, so fits are invariant to global
/// rescaling of the data.
struct LocalEstimator {
    int cell = -1;
    int order = 0;
    double M = 0.0;
    double scale_radius = 1.0;     // rho_j
    double intercept_col = 0.0;    // order 0: the cell label mean;
                                   // order 1: mean(y) / rho_j (the beta entry
                                   // paired with the rho_j column)
    Eigen::VectorXd slopes;        // length d for order 1, empty otherwise

    /// Untruncated local prediction g(x).
    double raw_value(const LocalChart& chart, const Eigen::VectorXd& x) const {
        if (order == 0) return intercept_col;
        return slopes.dot(chart.coords(x)) + scale_radius * intercept_col;
    }
    double value(const LocalChart& chart, const Eigen::VectorXd& x) const {
        return truncate(raw_value(chart, x), M);
    }
    /// The full coefficient vector [slopes; intercept_col] (order 1).
    Eigen::VectorXd beta() const;
};

/// Relative eigenvalue floor below which a chart coordinate is dropped from
/// the order-1 fit (rank reduction, matching pseudoinverse semantics).
inline constexpr double kEigenvalueFloor = 1e-10;

/// Least squares per the diagonal closed form: slope_l = <y, pi_l> / lambda_l
/// over the cell's own samples, intercept from the scale column. Coordinates
/// with lambda_l <= kEigenvalueFloor * lambda_1 get slope 0.
LocalEstimator fit_local(const LocalChart& chart,
                         const Eigen::MatrixXd& cell_points,
                         const Eigen::VectorXd& cell_labels,
                         int order, double M, double scale_radius);

/// Fits every cell of the tree; result indexed by cell id.
std::vector<LocalEstimator> fit_all(const MultiscaleTree& tree,
                                    const std::vector<LocalChart>& charts,
                                    const Eigen::MatrixXd& points,
                                    const Eigen::VectorXd& labels,
                                    int order, double M);

enum class PartitionKind { Uniform, Adaptive };

/// Antichain of cells covering all retained samples.
struct Partition {
    PartitionKind kind = PartitionKind::Uniform;
    double param = 0.0;  // scale j for uniform, threshold tau for adaptive
    std::vector<int> cells;
};

/// Piecewise local estimator over a partition. Prediction routes a query
/// down the tree with the training-time assignment rule; queries farther
/// than 3 * r0 from the root center fall outside the explored set and
/// return out_of_support_value.
class GlobalEstimator {
public:
    GlobalEstimator() = default;
    GlobalEstimator(std::shared_ptr<const MultiscaleTree> tree,
                    std::shared_ptr<const std::vector<LocalChart>> charts,
                    std::vector<LocalEstimator> fits, Partition partition,
                    int order, double M, double out_of_support_value = 0.0);

    double predict(const Eigen::VectorXd& x) const;
    Eigen::VectorXd predict_all(const Eigen::MatrixXd& X) const;

    const MultiscaleTree& tree() const { return *tree_; }
    std::shared_ptr<const MultiscaleTree> tree_ptr() const { return tree_; }
    const std::vector<LocalChart>& charts() const { return *charts_; }
    std::shared_ptr<const std::vector<LocalChart>> charts_ptr() const { return charts_; }
    const std::vector<LocalEstimator>& fits() const { return fits_; }
    const Partition& partition() const { return partition_; }
    int order() const { return order_; }
    double bound() const { return M_; }
    double out_of_support_value() const { return oos_; }

private:
    std::shared_ptr<const MultiscaleTree> tree_;
    std::shared_ptr<const std::vector<LocalChart>> charts_;
    std::vector<LocalEstimator> fits_;
    Partition partition_;
    std::vector<char> in_partition_;
    int order_ = 0;
    double M_ = 0.0;
    double oos_ = 0.0;
};

/// Uniform-scale estimator on Lambda_j (leaves coarser than j stand in for
/// their missing refinements). j is clamped to [0, j_max].
GlobalEstimator assemble_uniform(std::shared_ptr<const MultiscaleTree> tree,
                                 std::shared_ptr<const std::vector<LocalChart>> charts,
                                 std::vector<LocalEstimator> fits, int j, double M);

/// Theorem-style operating scale: round(log2(r0 / (mu (ln n / n)^{1/(2s+d)}))),
/// clamped to [0, j_hi].
int choose_jstar(int n, double s, int d, double mu, double r0, int j_hi);

/// Default truncation bound: max |label| over the regression half.
double default_bound(const Eigen::VectorXd& labels);

} // namespace msreg
