#include "msreg/mstree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace msreg {

namespace {

// Cell skeleton used during assignment, before compaction.
struct RawCell {
    int j = 0;
    int net_node = -1;
    int parent = -1;
    std::vector<int> children;
    std::vector<int> samples;
};

} // namespace

MultiscaleTree MultiscaleTree::derive(const CoverTree& ct,
                                      const Eigen::MatrixXd& regression_points,
                                      int min_leaf) {
    const int m = static_cast<int>(regression_points.rows());
    if (m < 1) throw ParameterError("derive_cells: no regression points");
    if (min_leaf < 1) throw ParameterError("derive_cells: min_leaf must be >= 1");
    if (m < min_leaf) throw ParameterError("derive_cells: fewer than min_leaf regression points");
    if (regression_points.cols() != ct.points().cols())
        throw ParameterError("derive_cells: ambient dimensions disagree");
    if (!regression_points.allFinite())
        throw ParameterError("derive_cells: non-finite regression coordinates");

    // Every sample keys to the cover-tree node of its nearest net point; its
    // cell at scale j is that node's scale-j ancestor.
    std::vector<int> nn(static_cast<size_t>(m));
    std::vector<int> nn_level(static_cast<size_t>(m));
    for (int s = 0; s < m; ++s) {
        nn[static_cast<size_t>(s)] = ct.nearest_node(regression_points.row(s).transpose());
        nn_level[static_cast<size_t>(s)] =
            ct.nodes()[static_cast<size_t>(nn[static_cast<size_t>(s)])].level;
    }

    // Top-down with chain collapsing: a cell subdivides at the first scale
    // where its samples' ancestors separate into at least two groups, and
    // only when every group holds at least min_leaf samples.
    std::vector<RawCell> raw;
    raw.push_back(RawCell{0, ct.root(), -1, {}, {}});
    raw[0].samples.resize(static_cast<size_t>(m));
    std::iota(raw[0].samples.begin(), raw[0].samples.end(), 0);

    for (int cid = 0; cid < static_cast<int>(raw.size()); ++cid) {
        const std::vector<int>& S = raw[static_cast<size_t>(cid)].samples;
        int deepest = 0;
        for (int s : S) deepest = std::max(deepest, nn_level[static_cast<size_t>(s)]);

        for (int jj = raw[static_cast<size_t>(cid)].j + 1; jj <= deepest; ++jj) {
            // group samples by their scale-jj ancestor, preserving first-seen
            // order for deterministic location indices
            std::vector<int> keys;
            std::vector<std::vector<int>> groups;
            for (int s : S) {
                const int a = ct.ancestor_at(nn[static_cast<size_t>(s)], jj);
                size_t g = 0;
                while (g < keys.size() && keys[g] != a) ++g;
                if (g == keys.size()) {
                    keys.push_back(a);
                    groups.emplace_back();
                }
                groups[g].push_back(s);
            }
            if (keys.size() == 1) continue;  // nothing separates at this scale
            bool all_big = true;
            for (const auto& g : groups)
                if (g.size() < static_cast<size_t>(min_leaf)) all_big = false;
            if (!all_big) break;  // pruning: refinement would starve a leaf

            // Admissibility: every new cell must fit in 3 r_jj around its
            // mean. A group that is still too spread out at this scale may
            // separate further down, so keep scanning instead of stopping.
            const double rjj = ct.base_radius() * std::pow(2.0, -jj);
            bool radius_ok = true;
            for (const auto& g : groups) {
                // same expressions as the chart builder, so the bound holds
                // bit-for-bit against the chart centers downstream
                Eigen::MatrixXd G(static_cast<int>(g.size()), regression_points.cols());
                for (size_t i = 0; i < g.size(); ++i)
                    G.row(static_cast<int>(i)) = regression_points.row(g[i]);
                const Eigen::VectorXd mean = G.colwise().mean().transpose();
                for (int i = 0; i < G.rows() && radius_ok; ++i)
                    if ((G.row(i).transpose() - mean).norm() > 3.0 * rjj) radius_ok = false;
                if (!radius_ok) break;
            }
            if (!radius_ok) continue;

            // deterministic child order: by cover-tree node id
            std::vector<size_t> ord(keys.size());
            std::iota(ord.begin(), ord.end(), 0);
            std::sort(ord.begin(), ord.end(),
                      [&](size_t a, size_t b) { return keys[a] < keys[b]; });
            for (size_t oi : ord) {
                raw.push_back(RawCell{jj, keys[oi], cid, {}, std::move(groups[oi])});
                raw[static_cast<size_t>(cid)].children.push_back(
                    static_cast<int>(raw.size()) - 1);
            }
            break;
        }
    }

    MultiscaleTree t;
    t.cells_.resize(raw.size());
    t.net_points_.resize(static_cast<int>(raw.size()), ct.points().cols());
    for (size_t i = 0; i < raw.size(); ++i) {
        Cell& cell = t.cells_[i];
        cell.j = raw[i].j;
        cell.parent = raw[i].parent;
        cell.net_node = raw[i].net_node;
        cell.children = std::move(raw[i].children);
        cell.samples = std::move(raw[i].samples);
        t.net_points_.row(static_cast<int>(i)) =
            ct.points().row(ct.nodes()[static_cast<size_t>(raw[i].net_node)].point);
    }

    t.root_ = 0;
    t.r0_ = ct.base_radius();
    t.n_samples_ = m;
    t.min_leaf_ = min_leaf;
    t.router_ = std::make_shared<const CoverTree>(ct);
    t.index_scales();
    return t;
}

MultiscaleTree MultiscaleTree::from_parts(std::vector<Cell> cells, int root,
                                          Eigen::MatrixXd net_points, double r0,
                                          int n_samples, int min_leaf) {
    MultiscaleTree t;
    t.cells_ = std::move(cells);
    t.net_points_ = std::move(net_points);
    t.root_ = root;
    t.r0_ = r0;
    t.n_samples_ = n_samples;
    t.min_leaf_ = min_leaf;
    t.index_scales();
    return t;
}

void MultiscaleTree::index_scales() {
    j_max_ = 0;
    for (const Cell& c : cells_) j_max_ = std::max(j_max_, c.j);
    by_scale_.assign(static_cast<size_t>(j_max_) + 1, {});
    for (int id = 0; id < size(); ++id)
        by_scale_[static_cast<size_t>(cells_[static_cast<size_t>(id)].j)].push_back(id);
    // location index k: order of appearance within the scale
    for (auto& scale : by_scale_) {
        int k = 0;
        for (int id : scale) cells_[static_cast<size_t>(id)].k = k++;
    }
}

std::vector<int> MultiscaleTree::leaves() const {
    std::vector<int> out;
    for (int id = 0; id < size(); ++id)
        if (cells_[static_cast<size_t>(id)].children.empty()) out.push_back(id);
    return out;
}

std::vector<int> MultiscaleTree::partition_at(int j) const {
    // A cell is active at scale j from its birth until its children appear;
    // leaves stay active from birth onward.
    std::vector<int> out;
    for (int id = 0; id < size(); ++id) {
        const Cell& c = cells_[static_cast<size_t>(id)];
        if (c.j > j) continue;
        if (c.children.empty() || cells_[static_cast<size_t>(c.children[0])].j > j)
            out.push_back(id);
    }
    return out;
}

int MultiscaleTree::assign_child_impl(int cell_id, const Eigen::VectorXd& x, int nn_node) const {
    const Cell& c = cells_[static_cast<size_t>(cell_id)];
    if (c.children.empty()) return -1;
    if (nn_node >= 0) {
        const int jj = cells_[static_cast<size_t>(c.children[0])].j;
        const int key = router_->ancestor_at(nn_node, jj);
        for (int ch : c.children)
            if (cells_[static_cast<size_t>(ch)].net_node == key) return ch;
        // branch unexplored by training samples: fall through to distances
    }
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int ch : c.children) {
        const double d = (net_points_.row(ch).transpose() - x).norm();
        if (d < best_d) { best = ch; best_d = d; }
    }
    return best;
}

int MultiscaleTree::assign_child(int cell_id, const Eigen::VectorXd& x) const {
    const int nn_node = router_ ? router_->nearest_node(x) : -1;
    return assign_child_impl(cell_id, x, nn_node);
}

int MultiscaleTree::route(const Eigen::VectorXd& x, const std::vector<char>& stop_mask) const {
    const int nn_node = router_ ? router_->nearest_node(x) : -1;
    int cur = root_;
    while (!stop_mask[static_cast<size_t>(cur)]) {
        const int next = assign_child_impl(cur, x, nn_node);
        if (next < 0) break;  // leaf outside the mask: partitions built here
        cur = next;           // always stop earlier, so this is a safeguard
    }
    return cur;
}

bool is_valid_partition(const MultiscaleTree& tree, const std::vector<int>& cells) {
    std::vector<char> seen(static_cast<size_t>(tree.n_samples()), 0);
    long covered = 0;
    for (int id : cells) {
        for (int s : tree.cell(id).samples) {
            if (seen[static_cast<size_t>(s)]) return false;  // overlap
            seen[static_cast<size_t>(s)] = 1;
            ++covered;
        }
    }
    if (covered != tree.n_samples()) return false;
    // Antichain: no member is an ancestor of another. Sample disjointness
    // already implies it for nonempty cells, but check structurally too.
    std::vector<char> in(static_cast<size_t>(tree.size()), 0);
    for (int id : cells) in[static_cast<size_t>(id)] = 1;
    for (int id : cells) {
        for (int p = tree.cell(id).parent; p >= 0; p = tree.cell(p).parent)
            if (in[static_cast<size_t>(p)]) return false;
    }
    return true;
}

} // namespace msreg
