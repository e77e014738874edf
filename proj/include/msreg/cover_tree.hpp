#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "msreg/errors.hpp"

namespace msreg {

/// Cover tree over a point set. Scales are indexed by a level j >= 0 with
/// radius r_j = r0 * 2^-j. Invariants:
///   nesting    — a net point at level j is a net point at every level > j;
///   covering   — a net point first appearing at level j+1 lies within r_j
///                of its parent at level j;
///   separation — net points at level j are pairwise more than r_j apart.
///
/// Nodes are stored explicitly only at the level where a point first becomes
/// a net point; it is implicitly its own child at every deeper level.
class CoverTree {
public:
    struct Node {
        int point;    // row index into the build points
        int level;    // level at which this point becomes a net point
        int parent;   // node id, -1 for the root
        std::vector<int> children;  // node ids, in creation order
    };

    /// Builds by sequential insertion; seed_order shuffles the insertion
    /// order deterministically. Points with an exact duplicate already in
    /// the tree do not become net points.
    static CoverTree build(const Eigen::MatrixXd& points, std::uint64_t seed_order);

    /// Reassembles a previously built tree (deserialization).
    static CoverTree from_parts(Eigen::MatrixXd points, std::vector<Node> nodes, double r0);

    /// Node id of the net point nearest to x. Exact branch-and-bound search;
    /// ties resolve to the smallest node id.
    int nearest_node(const Eigen::VectorXd& x) const;

    /// Deepest ancestor of u that is a net point at the given level (u
    /// itself when u.level <= level).
    int ancestor_at(int u, int level) const;

    const std::vector<Node>& nodes() const { return nodes_; }
    int root() const { return 0; }
    double base_radius() const { return r0_; }
    double radius_at(int j) const { return r0_ * std::pow(2.0, -j); }
    int j_min() const { return 0; }
    int j_max() const { return j_max_; }
    const Eigen::MatrixXd& points() const { return points_; }
    int duplicate_count() const { return duplicates_; }

    bool is_net_point_at(int node, int j) const { return nodes_[node].level <= j; }

    /// Children of node q when viewed at the given level: q itself (the
    /// self-child, when q is already a net point above) plus the explicit
    /// children introduced exactly at that level.
    void children_at(int q, int level, std::vector<int>& out) const;

    /// Deepest level at which anything below q (q included) first appears.
    int deepest_below(int q) const { return deepest_below_[q]; }

private:
    CoverTree() = default;
    void insert(int point_row);
    void finish();
    double dist(int point_row, int node) const;

    Eigen::MatrixXd points_;
    std::vector<Node> nodes_;
    double r0_ = 0.0;
    int j_max_ = 0;
    int duplicates_ = 0;
    std::vector<int> deepest_below_;
};

} // namespace msreg
