#include "msreg/estimator.hpp"

#include <cmath>

namespace msreg {

Eigen::VectorXd LocalEstimator::beta() const {
    Eigen::VectorXd b(slopes.size() + 1);
    b.head(slopes.size()) = slopes;
    b[slopes.size()] = intercept_col;
    return b;
}

LocalEstimator fit_local(const LocalChart& chart, const Eigen::MatrixXd& cell_points,
                         const Eigen::VectorXd& cell_labels, int order, double M,
                         double scale_radius) {
    const int m = static_cast<int>(cell_points.rows());
    if (m < 1) throw ParameterError("fit_local: empty cell");
    if (cell_labels.size() != m) throw ParameterError("fit_local: points/labels mismatch");
    if (order != 0 && order != 1) throw ParameterError("fit_local: order must be 0 or 1");
    if (M <= 0) throw ParameterError("fit_local: M must be positive");
    if (scale_radius <= 0) throw ParameterError("fit_local: scale_radius must be positive");

    LocalEstimator est;
    est.cell = chart.cell;
    est.order = order;
    est.M = M;
    est.scale_radius = scale_radius;

    const double ymean = cell_labels.mean();
    if (order == 0) {
        est.intercept_col = ymean;
        return est;
    }

    const int d = static_cast<int>(chart.basis.cols());
    // moment vector (1/m) sum y_i pi(x_i)
    Eigen::VectorXd moment = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < m; ++i)
        moment += cell_labels[i] * chart.coords(cell_points.row(i).transpose());
    moment /= m;

    est.slopes = Eigen::VectorXd::Zero(d);
    const double lam1 = chart.eigenvalues.size() > 0 ? chart.eigenvalues[0] : 0.0;
    for (int l = 0; l < d; ++l) {
        const double lam = chart.eigenvalues[l];
        if (lam > kEigenvalueFloor * lam1 && lam > 0.0)
            est.slopes[l] = moment[l] / lam;  // dropped coordinates keep slope 0
    }
    est.intercept_col = ymean / scale_radius;
    return est;
}

std::vector<LocalEstimator> fit_all(const MultiscaleTree& tree,
                                    const std::vector<LocalChart>& charts,
                                    const Eigen::MatrixXd& points,
                                    const Eigen::VectorXd& labels, int order, double M) {
    std::vector<LocalEstimator> fits(static_cast<size_t>(tree.size()));
    const int D = static_cast<int>(points.cols());
    for (int id = 0; id < tree.size(); ++id) {
        const Cell& c = tree.cell(id);
        Eigen::MatrixXd P(c.count(), D);
        Eigen::VectorXd y(c.count());
        for (int i = 0; i < c.count(); ++i) {
            P.row(i) = points.row(c.samples[static_cast<size_t>(i)]);
            y[i] = labels[c.samples[static_cast<size_t>(i)]];
        }
        fits[static_cast<size_t>(id)] =
            fit_local(charts[static_cast<size_t>(id)], P, y, order, M, tree.radius_at(c.j));
    }
    return fits;
}

GlobalEstimator::GlobalEstimator(std::shared_ptr<const MultiscaleTree> tree,
                                 std::shared_ptr<const std::vector<LocalChart>> charts,
                                 std::vector<LocalEstimator> fits, Partition partition,
                                 int order, double M, double out_of_support_value)
    : tree_(std::move(tree)),
      charts_(std::move(charts)),
      fits_(std::move(fits)),
      partition_(std::move(partition)),
      order_(order),
      M_(M),
      oos_(out_of_support_value) {
    in_partition_.assign(static_cast<size_t>(tree_->size()), 0);
    for (int id : partition_.cells) in_partition_[static_cast<size_t>(id)] = 1;
}

double GlobalEstimator::predict(const Eigen::VectorXd& x) const {
    const auto& charts = *charts_;
    const int root = tree_->root();
    // Support check against the root chart center at the coarsest radius.
    if ((x - charts[static_cast<size_t>(root)].center).norm() > 3.0 * tree_->base_radius())
        return oos_;
    const int cur = tree_->route(x, in_partition_);
    return fits_[static_cast<size_t>(cur)].value(charts[static_cast<size_t>(cur)], x);
}

Eigen::VectorXd GlobalEstimator::predict_all(const Eigen::MatrixXd& X) const {
    Eigen::VectorXd out(X.rows());
    for (int i = 0; i < X.rows(); ++i) out[i] = predict(X.row(i).transpose());
    return out;
}

GlobalEstimator assemble_uniform(std::shared_ptr<const MultiscaleTree> tree,
                                 std::shared_ptr<const std::vector<LocalChart>> charts,
                                 std::vector<LocalEstimator> fits, int j, double M) {
    const int jc = std::clamp(j, 0, tree->j_max());
    Partition p;
    p.kind = PartitionKind::Uniform;
    p.param = jc;
    p.cells = tree->partition_at(jc);
    const int order = fits.empty() ? 0 : fits[0].order;
    return GlobalEstimator(std::move(tree), std::move(charts), std::move(fits),
                           std::move(p), order, M);
}

int choose_jstar(int n, double s, int d, double mu, double r0, int j_hi) {
    if (n < 2) throw ParameterError("choose_jstar: n must be >= 2");
    if (s <= 0 || mu <= 0 || d < 1) throw ParameterError("choose_jstar: bad parameters");
    const double target = mu * std::pow(std::log(n) / n, 1.0 / (2.0 * s + d));
    const int j = static_cast<int>(std::lround(std::log2(r0 / target)));
    return std::clamp(j, 0, j_hi);
}

double default_bound(const Eigen::VectorXd& labels) {
    if (labels.size() == 0) throw ParameterError("default_bound: empty labels");
    const double m = labels.cwiseAbs().maxCoeff();
    return m > 0 ? m : 1.0;
}

} // namespace msreg
