#include <doctest.h>

#include <memory>
#include <random>

#include "msreg/bench.hpp"
#include "msreg/dataset.hpp"
#include "msreg/estimator.hpp"
#include "oracles.hpp"

using namespace msreg;

namespace {

// A synthetic standalone cell: random orthonormal chart in R^D with the
// given spectrum realized empirically.
struct FakeCell {
    LocalChart chart;
    Eigen::MatrixXd pts;
    Eigen::VectorXd y;
};

FakeCell make_cell(int n, int D, int d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0, 1);
    Eigen::MatrixXd X(n, D);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < D; ++j) X(i, j) = gauss(rng);
    Eigen::VectorXd mean = X.colwise().mean().transpose();
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(D, D);
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd v = X.row(i).transpose() - mean;
        C += v * v.transpose();
    }
    C /= n;
    auto [V, lam] = local_pca(C, d);
    FakeCell fc;
    fc.chart.cell = 0;
    fc.chart.count = n;
    fc.chart.measure = 1.0;
    fc.chart.center = mean;
    fc.chart.basis = V;
    fc.chart.eigenvalues = lam.head(d);
    fc.chart.lambda_dplus1 = lam[d];
    fc.pts = X;
    fc.y.resize(n);
    for (int i = 0; i < n; ++i) fc.y[i] = gauss(rng);
    return fc;
}

std::shared_ptr<const MultiscaleTree> make_pipeline(const Dataset& ds, int d, int min_leaf,
                                                    std::shared_ptr<const std::vector<LocalChart>>& charts,
                                                    std::vector<LocalEstimator>& fits, int order,
                                                    double M) {
    const int half = ds.n() / 2;
    CoverTree ct = CoverTree::build(ds.points.topRows(half), 1);
    auto tree = std::make_shared<const MultiscaleTree>(
        MultiscaleTree::derive(ct, ds.points.bottomRows(ds.n() - half), min_leaf));
    charts = std::make_shared<const std::vector<LocalChart>>(
        build_charts(*tree, ds.points.bottomRows(ds.n() - half), d));
    fits = fit_all(*tree, *charts, ds.points.bottomRows(ds.n() - half),
                   ds.labels.tail(ds.n() - half), order, M);
    return tree;
}

} // namespace

TEST_CASE("order-0 fit is the cell label mean, truncated on output") {
    FakeCell fc = make_cell(3, 2, 1, 1);
    fc.y << 2, 2, 2;
    LocalEstimator e = fit_local(fc.chart, fc.pts, fc.y, 0, 10.0, 1.0);
    CHECK(e.intercept_col == 2.0);
    CHECK(e.value(fc.chart, fc.pts.row(0).transpose()) == 2.0);

    FakeCell fc2 = make_cell(2, 2, 1, 2);
    fc2.y << 5, 7;
    LocalEstimator e2 = fit_local(fc2.chart, fc2.pts, fc2.y, 0, 4.0, 1.0);
    CHECK(e2.intercept_col == 6.0);  // coefficient stays the raw mean
    CHECK(e2.value(fc2.chart, fc2.pts.row(0).transpose()) == 4.0);  // truncation bites
}

TEST_CASE("order-1 fit recovers an exact linear function of the chart") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unif(-1, 1);
    const int n = 30;
    Eigen::MatrixXd pts(n, 3);
    for (int i = 0; i < n; ++i) pts.row(i) << unif(rng), 0.0, 0.0;
    // chart along e1
    Eigen::VectorXd mean = pts.colwise().mean().transpose();
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(3, 3);
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd v = pts.row(i).transpose() - mean;
        C += v * v.transpose();
    }
    C /= n;
    auto [V, lam] = local_pca(C, 1);
    LocalChart chart{0, n, 1.0, mean, V, lam.head(1), lam[1]};
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = 2.0 * chart.coords(pts.row(i).transpose())[0] + 1.0;
    LocalEstimator e = fit_local(chart, pts, y, 1, 100.0, 0.7);
    for (int i = 0; i < n; ++i)
        CHECK(std::abs(e.value(chart, pts.row(i).transpose()) - y[i]) < 1e-9);
}

TEST_CASE("order-1 fit matches the brute-force normal-equations oracle") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        FakeCell fc = make_cell(40, 6, 3, 100 + seed);
        const double radius = 0.37;
        LocalEstimator e = fit_local(fc.chart, fc.pts, fc.y, 1, 1e6, radius);
        // oracle: explicit design matrix, eigendecomposition pseudoinverse
        Eigen::MatrixXd design(40, 4);
        for (int i = 0; i < 40; ++i) {
            design.row(i).head(3) = fc.chart.coords(fc.pts.row(i).transpose()).transpose();
            design(i, 3) = radius;
        }
        Eigen::VectorXd beta = oracle::normal_equations_ls(design, fc.y, 1e-10);
        const Eigen::VectorXd mine = e.beta();
        REQUIRE(mine.size() == 4);
        const double scale = std::max(1.0, beta.cwiseAbs().maxCoeff());
        CHECK((mine - beta).cwiseAbs().maxCoeff() / scale < 1e-8);
    }
}

TEST_CASE("rank-deficient cells drop the degenerate coordinate instead of blowing up") {
    // points on a line in R^3, chart rank 1 but d = 2 requested
    Eigen::MatrixXd pts(5, 3);
    for (int i = 0; i < 5; ++i) pts.row(i) << i * 0.1, 0.0, 0.0;
    Eigen::VectorXd mean = pts.colwise().mean().transpose();
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(3, 3);
    for (int i = 0; i < 5; ++i) {
        Eigen::VectorXd v = pts.row(i).transpose() - mean;
        C += v * v.transpose();
    }
    C /= 5;
    auto [V, lam] = local_pca(C, 2);
    LocalChart chart{0, 5, 1.0, mean, V, lam.head(2), lam[2]};
    Eigen::VectorXd y(5);
    y << 1, 2, 3, 4, 5;
    LocalEstimator e = fit_local(chart, pts, y, 1, 100.0, 1.0);
    CHECK(e.slopes[1] == 0.0);
    CHECK(std::isfinite(e.raw_value(chart, pts.row(2).transpose())));
}

TEST_CASE("order-1 in-sample residual never exceeds order-0") {
    for (std::uint64_t seed = 50; seed < 56; ++seed) {
        FakeCell fc = make_cell(25, 5, 2, seed);
        LocalEstimator e0 = fit_local(fc.chart, fc.pts, fc.y, 0, 1e9, 0.5);
        LocalEstimator e1 = fit_local(fc.chart, fc.pts, fc.y, 1, 1e9, 0.5);
        double r0 = 0, r1 = 0;
        for (int i = 0; i < 25; ++i) {
            const Eigen::VectorXd x = fc.pts.row(i).transpose();
            r0 += std::pow(fc.y[i] - e0.raw_value(fc.chart, x), 2);
            r1 += std::pow(fc.y[i] - e1.raw_value(fc.chart, x), 2);
        }
        CHECK(r1 <= r0 + 1e-12);
    }
}

TEST_CASE("choose_jstar follows the formula and clamps") {
    // (ln 1000 / 1000)^(1/6) = 0.43640... -> j* = round(log2(1/0.4364)) = 1
    CHECK(choose_jstar(1000, 2.0, 2, 1.0, 1.0, 10) == 1);
    // target radius >= r0 clamps to the root scale
    CHECK(choose_jstar(10, 0.5, 1, 10.0, 1.0, 10) == 0);
    // monotone in n
    int prev = 0;
    for (int n : {100, 1000, 10000, 100000, 1000000}) {
        const int j = choose_jstar(n, 2.0, 2, 1.0, 1.0, 50);
        CHECK(j >= prev);
        prev = j;
    }
    CHECK_THROWS_AS(choose_jstar(1, 2.0, 2, 1.0, 1.0, 10), ParameterError);
}

TEST_CASE("uniform assembly: root scale, leaf scale, and structural validity") {
    SyntheticSpec s;
    s.manifold = {ManifoldKind::Affine, 2, 4};
    s.function.kind = FunctionKind::SmoothSine;
    s.function.freq = 3.0;
    s.n_samples = 500;
    s.noise_sigma = 0.05;
    s.seed = 1;
    Dataset ds = generate(s);
    std::shared_ptr<const std::vector<LocalChart>> charts;
    std::vector<LocalEstimator> fits;
    auto tree = make_pipeline(ds, 2, 3, charts, fits, 0, 10.0);

    GlobalEstimator root_est = assemble_uniform(tree, charts, fits, 0, 10.0);
    CHECK(root_est.partition().cells.size() == 1);

    GlobalEstimator leaf_est = assemble_uniform(tree, charts, fits, tree->j_max(), 10.0);
    CHECK(leaf_est.partition().cells.size() == tree->leaves().size());

    for (int j = 0; j <= tree->j_max(); ++j) {
        GlobalEstimator e = assemble_uniform(tree, charts, fits, j, 10.0);
        CHECK(is_valid_partition(*tree, e.partition().cells));
    }
}

TEST_CASE("prediction routes to the training cell and respects support") {
    SyntheticSpec s;
    s.manifold = {ManifoldKind::Affine, 1, 3};
    s.function.kind = FunctionKind::Constant;
    s.function.c = 3.0;
    s.n_samples = 200;
    s.seed = 4;
    Dataset ds = generate(s);
    std::shared_ptr<const std::vector<LocalChart>> charts;
    std::vector<LocalEstimator> fits;
    auto tree = make_pipeline(ds, 1, 2, charts, fits, 0, 10.0);
    GlobalEstimator est = assemble_uniform(tree, charts, fits, 2, 10.0);

    // constant data: prediction is the constant everywhere on the support
    for (int i = 0; i < 100; ++i)
        CHECK(est.predict(ds.points.row(i).transpose()) == doctest::Approx(3.0).epsilon(1e-12));

    // training point lands in its assigned partition cell's mean (order 0)
    const Eigen::VectorXd x0 = ds.points.row(ds.n() - 1).transpose();
    int cell = tree->root();
    std::vector<char> inpart(static_cast<size_t>(tree->size()), 0);
    for (int id : est.partition().cells) inpart[static_cast<size_t>(id)] = 1;
    while (!inpart[static_cast<size_t>(cell)]) cell = tree->assign_child(cell, x0);
    double mean = 0;
    for (int idx : tree->cell(cell).samples) mean += ds.labels[ds.n() / 2 + idx];
    mean /= tree->cell(cell).count();
    CHECK(est.predict(x0) == doctest::Approx(mean).epsilon(1e-12));

    // far away -> out-of-support value
    Eigen::VectorXd far = Eigen::VectorXd::Constant(3, 100.0);
    CHECK(est.predict(far) == 0.0);

    // truncation invariant
    for (int i = 0; i < ds.n(); ++i)
        CHECK(std::abs(est.predict(ds.points.row(i).transpose())) <= 10.0);
}

TEST_CASE("exact recovery of an ambient-affine function at every usable scale") {
    FunctionSpec f;
    f.kind = FunctionKind::LinearCoords;
    f.w = {1.5, -2.0};
    SyntheticSpec s;
    s.manifold = {ManifoldKind::Affine, 2, 10};
    s.function = f;
    s.n_samples = 600;
    s.seed = 17;
    Dataset ds = generate(s);
    std::shared_ptr<const std::vector<LocalChart>> charts;
    std::vector<LocalEstimator> fits;
    auto tree = make_pipeline(ds, 2, 3, charts, fits, 1, 100.0);

    // the tree half doubles as held-out data: same manifold, unseen by the fits
    for (int j = 0; j <= tree->j_max(); ++j) {
        bool all_big = true;
        for (int id : tree->partition_at(j))
            if (tree->cell(id).count() < 3) all_big = false;
        if (!all_big) continue;
        GlobalEstimator e = assemble_uniform(tree, charts, fits, j, 100.0);
        double mse = 0;
        for (int i = 0; i < ds.n() / 2; ++i) {
            const double err = e.predict(ds.points.row(i).transpose()) - ds.labels[i];
            mse += err * err;
        }
        mse /= ds.n() / 2;
        CHECK(mse <= 1e-16);
    }
}
