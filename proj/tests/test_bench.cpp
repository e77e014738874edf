#include <doctest.h>

#include <cstdio>

#include "msreg/bench.hpp"

using namespace msreg;

namespace {

ExperimentConfig base_config() {
    ExperimentConfig cfg;
    cfg.data.manifold = {ManifoldKind::Affine, 1, 4};
    cfg.data.function.kind = FunctionKind::SmoothSine;
    cfg.data.function.freq = 6.283185307179586;
    cfg.data.noise_sigma = 0.1;
    cfg.order = 1;
    cfg.mode.kind = ModeSpec::Kind::Adaptive;
    cfg.n_grid = {400, 800, 1600};
    cfg.repetitions = 2;
    cfg.seed = 31;
    return cfg;
}

} // namespace

TEST_CASE("evaluate_mse agrees with a direct loop and flags empty input") {
    ExperimentConfig cfg = base_config();
    SyntheticSpec spec = cfg.data;
    spec.n_samples = 400;
    spec.seed = 1;
    Dataset ds = generate(spec);
    SplitIndices idx = split(ds, 0.25, 2);
    PipelineResult pr = fit_pipeline(ds.points, ds.labels, idx, 1, 0,
                                     ModeSpec{ModeSpec::Kind::UniformJ, 2, 0, 0, {}}, {}, 3);
    Eigen::MatrixXd TX(static_cast<int>(idx.test.size()), ds.ambient_dim());
    Eigen::VectorXd Ty(static_cast<int>(idx.test.size()));
    for (size_t i = 0; i < idx.test.size(); ++i) {
        TX.row(static_cast<int>(i)) = ds.points.row(idx.test[i]);
        Ty[static_cast<int>(i)] = ds.labels[idx.test[i]];
    }
    const double mse = evaluate_mse(pr.estimator, TX, Ty);
    double acc = 0;
    for (int i = 0; i < TX.rows(); ++i) {
        const double e = pr.estimator.predict(TX.row(i).transpose()) - Ty[i];
        acc += e * e;
    }
    CHECK(mse == doctest::Approx(acc / TX.rows()).epsilon(1e-14));

    Eigen::MatrixXd empty(0, ds.ambient_dim());
    Eigen::VectorXd none(0);
    CHECK_THROWS_AS(evaluate_mse(pr.estimator, empty, none), ParameterError);

    SUBCASE("perfect and constant predictors") {
        Eigen::VectorXd yhat = pr.estimator.predict_all(TX);
        CHECK(evaluate_mse(pr.estimator, TX, yhat) == 0.0);
    }
}

TEST_CASE("fit_slope recovers exact power laws") {
    std::vector<double> ns{100, 200, 400, 800, 1600};
    std::vector<double> mses;
    for (double n : ns) mses.push_back(3.7 * std::pow(n, -0.5));
    SlopeFit sf = fit_slope(ns, mses, 4);
    REQUIRE(sf.defined);
    CHECK(std::abs(sf.m + 0.5) < 1e-12);
    REQUIRE(sf.s_defined);
    CHECK(sf.s_hat == doctest::Approx(2.0).epsilon(1e-10));  // d/2 with d=4

    mses.assign(ns.size(), 0.25);
    sf = fit_slope(ns, mses, 4);
    REQUIRE(sf.defined);
    CHECK(std::abs(sf.m) < 1e-12);
    CHECK(sf.s_hat == doctest::Approx(0.0));

    mses.clear();
    for (double n : ns) mses.push_back(2.0 * std::pow(n, -0.8));
    sf = fit_slope(ns, mses, 1);
    REQUIRE(sf.s_defined);
    CHECK(sf.s_hat == doctest::Approx(2.0).epsilon(1e-10));

    // degenerate inputs: undefined, not a crash
    CHECK(!fit_slope({100, 200}, {1.0, 0.5}, 1).defined);
    CHECK(!fit_slope({100, 200, 400}, {1.0, 0.0, 0.5}, 1).defined);
}

TEST_CASE("constant data yields zero MSE and an undefined slope") {
    ExperimentConfig cfg = base_config();
    cfg.data.function.kind = FunctionKind::Constant;
    cfg.data.function.c = 2.0;
    cfg.data.noise_sigma = 0.0;
    cfg.n_grid = {200, 400, 800};
    cfg.repetitions = 1;
    RateReport rep = run_experiment(cfg);
    for (double m : rep.mean_mse) CHECK(m <= 1e-20);
    CHECK(!rep.slope.defined);
}

TEST_CASE("linear data at a uniform scale with populated cells is exact") {
    SyntheticSpec spec;
    spec.manifold = {ManifoldKind::Affine, 2, 10};
    spec.function.kind = FunctionKind::LinearCoords;
    spec.function.w = {1.0, -2.0};
    spec.noise_sigma = 0.0;
    for (int n : {500, 1000}) {
        spec.n_samples = n;
        spec.seed = 7 + static_cast<std::uint64_t>(n);
        Dataset ds = generate(spec);
        SplitIndices idx = split(ds, 0.5, 3);
        // scan down from a mid scale to one where every cell holds >= d+1
        for (int j = 3; j >= 0; --j) {
            ModeSpec mode{ModeSpec::Kind::UniformJ, j, 0, 0, {}};
            PipelineResult pr = fit_pipeline(ds.points, ds.labels, idx, 2, 1, mode, 100.0, 5);
            bool all_big = true;
            for (int id : pr.estimator.partition().cells)
                if (pr.estimator.tree().cell(id).count() < 3) all_big = false;
            if (!all_big) continue;
            Eigen::MatrixXd TX(static_cast<int>(idx.test.size()), ds.ambient_dim());
            Eigen::VectorXd Ty(static_cast<int>(idx.test.size()));
            for (size_t i = 0; i < idx.test.size(); ++i) {
                TX.row(static_cast<int>(i)) = ds.points.row(idx.test[i]);
                Ty[static_cast<int>(i)] = ds.labels[idx.test[i]];
            }
            CHECK(evaluate_mse(pr.estimator, TX, Ty) <= 1e-16);
            break;
        }
    }
}

TEST_CASE("reports are reproducible and serializable") {
    ExperimentConfig cfg = base_config();
    cfg.n_grid = {300, 600};
    cfg.repetitions = 2;
    RateReport a = run_experiment(cfg);
    RateReport b = run_experiment(cfg);
    CHECK(a.mean_mse == b.mean_mse);
    CHECK(a.std_mse == b.std_mse);

    write_report_csv(a, "bench_report_test.csv");
    SlopeFit sf = slope_from_csv("bench_report_test.csv", 1);
    // two grid points only: slope undefined by design
    CHECK(!sf.defined);
    std::remove("bench_report_test.csv");
}

TEST_CASE("mse trend is nonincreasing on a smooth noisy benchmark") {
    ExperimentConfig cfg = base_config();
    cfg.n_grid = {400, 800, 1600};
    cfg.repetitions = 5;
    RateReport rep = run_experiment(cfg);
    int inversions = 0;
    for (size_t i = 1; i < rep.mean_mse.size(); ++i)
        if (rep.mean_mse[i] > rep.mean_mse[i - 1]) ++inversions;
    CHECK(inversions <= 1);
}

TEST_CASE("stage times are recorded and positive") {
    ExperimentConfig cfg = base_config();
    cfg.n_grid = {400};
    cfg.repetitions = 1;
    auto rows = timing_profile(cfg);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].seconds.total() > 0);
    CHECK(rows[0].seconds.tree >= 0);
    CHECK(rows[0].seconds.gmra >= 0);
    CHECK(rows[0].cells >= 1);
}
