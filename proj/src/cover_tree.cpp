#include "msreg/cover_tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace msreg {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Distinct points separate long before this depth; the cap only guards
// against degenerate near-duplicates.
constexpr int kMaxLevel = 64;

struct CandidateLevel {
    std::vector<int> ids;
    std::vector<double> dist;
};

} // namespace

double CoverTree::dist(int point_row, int node) const {
    return (points_.row(point_row) - points_.row(nodes_[node].point)).norm();
}

void CoverTree::children_at(int q, int level, std::vector<int>& out) const {
    if (nodes_[q].level < level) out.push_back(q);  // self-child
    for (int c : nodes_[q].children)
        if (nodes_[c].level == level) out.push_back(c);
}

CoverTree CoverTree::build(const Eigen::MatrixXd& points, std::uint64_t seed_order) {
    const int n = static_cast<int>(points.rows());
    if (n < 1) throw ParameterError("cover tree needs at least one point");
    if (!points.allFinite()) throw ParameterError("cover tree input has non-finite coordinates");

    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(splitmix64(seed_order));
    std::shuffle(order.begin(), order.end(), rng);

    CoverTree t;
    t.points_ = points;
    t.nodes_.push_back(Node{order[0], 0, -1, {}});

    // Base radius: max pairwise distance over a small subsample, raised to
    // at least the max distance from the root so the root covers everything.
    const int m = std::min(n, 256);
    double r0 = 0.0;
    for (int a = 0; a < m; ++a)
        for (int b = a + 1; b < m; ++b)
            r0 = std::max(r0, (points.row(order[static_cast<size_t>(a)]) -
                               points.row(order[static_cast<size_t>(b)])).norm());
    for (int i = 0; i < n; ++i)
        r0 = std::max(r0, (points.row(i) - points.row(order[0])).norm());
    t.r0_ = r0;

    for (int i = 1; i < n; ++i) t.insert(order[static_cast<size_t>(i)]);

    t.j_max_ = 0;
    for (const Node& nd : t.nodes_) t.j_max_ = std::max(t.j_max_, nd.level);

    t.finish();
    return t;
}

CoverTree CoverTree::from_parts(Eigen::MatrixXd points, std::vector<Node> nodes, double r0) {
    CoverTree t;
    t.points_ = std::move(points);
    t.nodes_ = std::move(nodes);
    t.r0_ = r0;
    t.j_max_ = 0;
    for (const Node& nd : t.nodes_) t.j_max_ = std::max(t.j_max_, nd.level);
    t.finish();
    return t;
}

void CoverTree::finish() {
    deepest_below_.assign(nodes_.size(), 0);
    for (int id = static_cast<int>(nodes_.size()) - 1; id >= 0; --id) {
        int deep = nodes_[static_cast<size_t>(id)].level;
        for (int c : nodes_[static_cast<size_t>(id)].children)
            deep = std::max(deep, deepest_below_[static_cast<size_t>(c)]);
        deepest_below_[static_cast<size_t>(id)] = deep;
    }
}

int CoverTree::nearest_node(const Eigen::VectorXd& x) const {
    int best = 0;
    double best_d = (x - points_.row(nodes_[0].point).transpose()).norm();
    std::vector<int> cand{0};
    std::vector<double> cand_d{best_d};
    std::vector<int> next;
    std::vector<double> next_d;
    double rj = r0_;
    for (int j = 0; j <= j_max_ && !cand.empty(); ++j) {
        const double rj1 = rj * 0.5;
        next.clear();
        next_d.clear();
        // children at level j+1; a subtree rooted there reaches at most
        // 2 r_{j+1} from its top node
        for (size_t qi = 0; qi < cand.size(); ++qi) {
            const int q = cand[qi];
            for (int c : nodes_[static_cast<size_t>(q)].children) {
                if (nodes_[static_cast<size_t>(c)].level != j + 1) continue;
                const double d =
                    (x - points_.row(nodes_[static_cast<size_t>(c)].point).transpose()).norm();
                if (d < best_d || (d == best_d && c < best)) { best = c; best_d = d; }
                next.push_back(c);
                next_d.push_back(d);
            }
            next.push_back(q);  // self-child
            next_d.push_back(cand_d[qi]);
        }
        cand.clear();
        cand_d.clear();
        for (size_t ci = 0; ci < next.size(); ++ci) {
            const int c = next[ci];
            if (deepest_below_[static_cast<size_t>(c)] <= j + 1) continue;  // subtree exhausted
            if (next_d[ci] <= best_d + 2 * rj1) {
                cand.push_back(c);
                cand_d.push_back(next_d[ci]);
            }
        }
        rj = rj1;
    }
    return best;
}

int CoverTree::ancestor_at(int u, int level) const {
    while (nodes_[static_cast<size_t>(u)].level > level) u = nodes_[static_cast<size_t>(u)].parent;
    return u;
}

void CoverTree::insert(int point_row) {
    // Standard sequential insertion. levels[j] holds every net point at
    // level j within 2 r_j of the new point; the parent-radius filter below
    // maintains that superset, which makes the separation tests exact.
    if (r0_ == 0.0) { ++duplicates_; return; }  // all points coincide

    std::vector<CandidateLevel> levels;
    levels.push_back({{0}, {dist(point_row, 0)}});
    if (levels[0].dist[0] == 0.0) { ++duplicates_; return; }

    int j = 0;
    double rj = r0_;
    while (j < kMaxLevel) {
        // Candidates at level j+1: self-children plus explicit children.
        CandidateLevel next;
        double dmin = std::numeric_limits<double>::infinity();
        const CandidateLevel& cur = levels[static_cast<size_t>(j)];
        for (size_t qi = 0; qi < cur.ids.size(); ++qi) {
            const int q = cur.ids[qi];
            if (nodes_[q].level < j + 1) {
                next.ids.push_back(q);
                next.dist.push_back(cur.dist[qi]);
                dmin = std::min(dmin, cur.dist[qi]);
            }
            for (int c : nodes_[q].children) {
                if (nodes_[c].level != j + 1) continue;
                const double dc = dist(point_row, c);
                if (dc == 0.0) { ++duplicates_; return; }
                next.ids.push_back(c);
                next.dist.push_back(dc);
                dmin = std::min(dmin, dc);
            }
        }
        if (dmin > rj) break;  // nothing below level j can cover the point

        // Keep candidates within the parent radius r_j.
        CandidateLevel kept;
        for (size_t idx = 0; idx < next.ids.size(); ++idx) {
            if (next.dist[idx] <= rj) {
                kept.ids.push_back(next.ids[idx]);
                kept.dist.push_back(next.dist[idx]);
            }
        }
        levels.push_back(std::move(kept));
        ++j;
        rj *= 0.5;
    }

    // Attach as deep as a covering parent allows: at level lvl+1 under the
    // nearest level-lvl candidate within r_lvl. The root qualifies at lvl 0.
    double rl = r0_ * std::pow(2.0, -j);
    for (int lvl = j; lvl >= 0; --lvl, rl *= 2.0) {
        const CandidateLevel& cl = levels[static_cast<size_t>(lvl)];
        int best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (size_t idx = 0; idx < cl.ids.size(); ++idx) {
            if (cl.dist[idx] <= rl &&
                (cl.dist[idx] < best_d || (cl.dist[idx] == best_d && cl.ids[idx] < best))) {
                best = cl.ids[idx];
                best_d = cl.dist[idx];
            }
        }
        if (best >= 0) {
            const int id = static_cast<int>(nodes_.size());
            nodes_.push_back(Node{point_row, lvl + 1, best, {}});
            nodes_[static_cast<size_t>(best)].children.push_back(id);
            return;
        }
    }
    throw std::logic_error("cover tree insertion found no covering parent");
}

} // namespace msreg
