#pragma once

#include <Eigen/Core>
#include <cmath>
#include <memory>
#include <vector>

#include "msreg/cover_tree.hpp"
#include "msreg/errors.hpp"

namespace msreg {

/// One cell C_{j,k} of the multiscale decomposition: the regression-half
/// samples assigned to a net point at scale j. Children partition the
/// parent's samples exactly.
struct Cell {
    int j = 0;  // scale
    int k = 0;  // location index within the scale
    int parent = -1;             // cell id
    int net_node = -1;           // cover-tree node anchoring the cell
    std::vector<int> children;   // cell ids, ordered by k
    std::vector<int> samples;    // regression-half row indices
    int count() const { return static_cast<int>(samples.size()); }
};

/// Nested cell hierarchy derived from a cover tree, pruned so every leaf
/// holds at least min_leaf samples. Immutable once built.
class MultiscaleTree {
public:
    /// Assigns every regression point to the cover-tree branch of its
    /// nearest net point: the cell of a point at scale j is keyed by the
    /// scale-j ancestor of that net point, which makes nesting exact and
    /// keeps cell extent tied to the scale radius. Scales where a cell's
    /// samples do not separate are collapsed, so each cell is recorded once,
    /// at the scale where it first appears. A cell subdivides only when
    /// every resulting group holds at least min_leaf points; otherwise it
    /// becomes a leaf. The cover tree is retained for routing queries.
    static MultiscaleTree derive(const CoverTree& ct,
                                 const Eigen::MatrixXd& regression_points,
                                 int min_leaf);

    /// Assembles a tree from raw parts (deserialization and toy fixtures).
    /// Cells must form a rooted tree with children partitioning parents
    /// wherever samples are present.
    static MultiscaleTree from_parts(std::vector<Cell> cells, int root,
                                     Eigen::MatrixXd net_points, double r0,
                                     int n_samples, int min_leaf);

    const std::vector<Cell>& cells() const { return cells_; }
    const Cell& cell(int id) const { return cells_[id]; }
    int size() const { return static_cast<int>(cells_.size()); }
    int root() const { return root_; }
    int j_max() const { return j_max_; }
    double base_radius() const { return r0_; }
    double radius_at(int j) const { return r0_ * std::pow(2.0, -j); }
    int n_samples() const { return n_samples_; }  // retained regression count
    int min_leaf() const { return min_leaf_; }

    Eigen::VectorXd net_point(int id) const { return net_points_.row(id); }
    const Eigen::MatrixXd& net_points() const { return net_points_; }

    bool is_leaf(int id) const { return cells_[id].children.empty(); }
    std::vector<int> leaves() const;

    /// Uniform partition Lambda_j: the cells active at scale j (born at or
    /// above j, not yet refined at j, leaves included once born). An
    /// antichain covering all retained samples.
    std::vector<int> partition_at(int j) const;

    /// Cell ids at exactly scale j.
    const std::vector<int>& scale_cells(int j) const { return by_scale_[j]; }

    /// One routing step: the child of cell_id that training assignment would
    /// give x. With the router present this follows the cover-tree branch of
    /// x's nearest net point (exact train/test consistency); queries whose
    /// branch holds no training samples, or trees restored without a router,
    /// fall back to the nearest child net point (ties toward the smaller k).
    int assign_child(int cell_id, const Eigen::VectorXd& x) const;

    /// Descends from the root until reaching a cell flagged in stop_mask or
    /// a leaf; returns that cell.
    int route(const Eigen::VectorXd& x, const std::vector<char>& stop_mask) const;

    const CoverTree* router() const { return router_.get(); }
    void set_router(std::shared_ptr<const CoverTree> ct) { router_ = std::move(ct); }

private:
    MultiscaleTree() = default;
    void index_scales();
    int assign_child_impl(int cell_id, const Eigen::VectorXd& x, int nn_node) const;

    std::vector<Cell> cells_;
    std::vector<std::vector<int>> by_scale_;
    Eigen::MatrixXd net_points_;  // one row per cell
    std::shared_ptr<const CoverTree> router_;
    int root_ = 0;
    int j_max_ = 0;
    double r0_ = 0.0;
    int n_samples_ = 0;
    int min_leaf_ = 1;
};

/// Exact antichain-and-cover check for a candidate partition.
bool is_valid_partition(const MultiscaleTree& tree, const std::vector<int>& cells);

} // namespace msreg
