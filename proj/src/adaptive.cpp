#include "msreg/adaptive.hpp"

#include <algorithm>
#include <cmath>

namespace msreg {

DeltaMap compute_deltas(const MultiscaleTree& tree,
                        const std::vector<LocalChart>& charts,
                        const std::vector<LocalEstimator>& fits,
                        const Eigen::MatrixXd& points) {
    DeltaMap dm;
    dm.delta.assign(static_cast<size_t>(tree.size()), 0.0);
    dm.count.assign(static_cast<size_t>(tree.size()), 0);
    const double n = tree.n_samples();
    for (int id = 0; id < tree.size(); ++id) {
        const Cell& c = tree.cell(id);
        if (c.children.empty()) continue;  // refinement impossible: delta stays 0
        double sq = 0.0;
        int cnt = 0;
        for (int ch : c.children) {
            for (int s : tree.cell(ch).samples) {
                const Eigen::VectorXd x = points.row(s).transpose();
                const double diff = fits[static_cast<size_t>(id)].value(charts[static_cast<size_t>(id)], x) -
                                    fits[static_cast<size_t>(ch)].value(charts[static_cast<size_t>(ch)], x);
                sq += diff * diff;
                ++cnt;
            }
        }
        dm.delta[static_cast<size_t>(id)] = std::sqrt(sq / n);
        dm.count[static_cast<size_t>(id)] = cnt;
    }
    return dm;
}

double threshold(int n, double kappa) {
    if (n < 2) throw ParameterError("threshold: n must be >= 2");
    if (kappa <= 0) throw ParameterError("threshold: kappa must be positive");
    return kappa * std::sqrt(std::log(static_cast<double>(n)) / n);
}

std::vector<char> smallest_proper_subtree(const MultiscaleTree& tree,
                                          const std::vector<char>& flags) {
    std::vector<char> in(static_cast<size_t>(tree.size()), 0);
    in[static_cast<size_t>(tree.root())] = 1;
    for (int id = 0; id < tree.size(); ++id) {
        if (!flags[static_cast<size_t>(id)]) continue;
        for (int c = id; c >= 0 && !in[static_cast<size_t>(c)]; c = tree.cell(c).parent)
            in[static_cast<size_t>(c)] = 1;
    }
    return in;
}

std::vector<int> outer_leaves(const MultiscaleTree& tree, const std::vector<char>& subtree) {
    std::vector<int> out;
    for (int id = 0; id < tree.size(); ++id) {
        if (subtree[static_cast<size_t>(id)]) {
            // members without refinements stand for themselves
            if (tree.cell(id).children.empty()) out.push_back(id);
            continue;
        }
        const int p = tree.cell(id).parent;
        if (p >= 0 && subtree[static_cast<size_t>(p)]) out.push_back(id);
    }
    return out;
}

AdaptiveResult adaptive_partition(const MultiscaleTree& tree,
                                  const std::vector<LocalChart>& charts,
                                  const std::vector<LocalEstimator>& fits,
                                  const Eigen::MatrixXd& points, double kappa) {
    AdaptiveResult res;
    res.deltas = compute_deltas(tree, charts, fits, points);
    res.tau = threshold(tree.n_samples() >= 2 ? tree.n_samples() : 2, kappa);
    std::vector<char> flags(static_cast<size_t>(tree.size()), 0);
    for (int id = 0; id < tree.size(); ++id)
        if (res.deltas.delta[static_cast<size_t>(id)] >= res.tau) flags[static_cast<size_t>(id)] = 1;
    res.subtree = smallest_proper_subtree(tree, flags);
    res.partition.kind = PartitionKind::Adaptive;
    res.partition.param = res.tau;
    res.partition.cells = outer_leaves(tree, res.subtree);
    return res;
}

double default_kappa(const MultiscaleTree& tree,
                     const std::vector<LocalChart>& charts,
                     const std::vector<LocalEstimator>& fits,
                     const Eigen::MatrixXd& points,
                     const Eigen::VectorXd& labels) {
    // Residual scale under the finest uniform fit, via the median absolute
    // deviation around the median.
    std::vector<int> part = tree.partition_at(tree.j_max());
    std::vector<double> resid;
    resid.reserve(static_cast<size_t>(tree.n_samples()));
    for (int id : part) {
        const Cell& c = tree.cell(id);
        for (int s : c.samples) {
            const Eigen::VectorXd x = points.row(s).transpose();
            resid.push_back(labels[s] -
                            fits[static_cast<size_t>(id)].value(charts[static_cast<size_t>(id)], x));
        }
    }
    auto median = [](std::vector<double>& v) {
        const size_t mid = v.size() / 2;
        std::nth_element(v.begin(), v.begin() + static_cast<long>(mid), v.end());
        return v[mid];
    };
    const double med = median(resid);
    for (double& r : resid) r = std::abs(r - med);
    const double sigma_hat = 1.4826 * median(resid);
    return 0.5 * (labels.cwiseAbs().maxCoeff() + sigma_hat);
}

} // namespace msreg
