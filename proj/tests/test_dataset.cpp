#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "msreg/dataset.hpp"

using namespace msreg;

namespace {

SyntheticSpec affine_spec(int d, int D, FunctionSpec f, int n, double sigma, std::uint64_t seed) {
    SyntheticSpec s;
    s.manifold = {ManifoldKind::Affine, d, D};
    s.function = f;
    s.n_samples = n;
    s.noise_sigma = sigma;
    s.seed = seed;
    return s;
}

} // namespace

TEST_CASE("constant function with zero noise gives exactly constant labels") {
    FunctionSpec f;
    f.kind = FunctionKind::Constant;
    f.c = 5.0;
    Dataset ds = generate(affine_spec(1, 3, f, 10, 0.0, 42));
    REQUIRE(ds.n() == 10);
    for (int i = 0; i < ds.n(); ++i) CHECK(ds.labels[i] == 5.0);
}

TEST_CASE("sphere samples have unit norm") {
    SyntheticSpec s;
    s.manifold = {ManifoldKind::Sphere, 2, 3};
    s.function.kind = FunctionKind::Constant;
    s.n_samples = 100;
    s.seed = 7;
    Dataset ds = generate(s);
    for (int i = 0; i < ds.n(); ++i)
        CHECK(std::abs(ds.points.row(i).norm() - 1.0) < 1e-12);
}

TEST_CASE("linear_coords labels match an independent re-evaluation") {
    FunctionSpec f;
    f.kind = FunctionKind::LinearCoords;
    f.w = {2.0, -0.5};
    SyntheticSpec s = affine_spec(2, 10, f, 200, 0.0, 99);
    SyntheticModel model(s);
    Dataset ds = model.generate();
    for (int i = 0; i < ds.n(); ++i) {
        // oracle: recover the intrinsic parameters and apply the formula
        Eigen::VectorXd xi = model.coords_of(ds.points.row(i).transpose());
        const double expect = 2.0 * xi[0] - 0.5 * xi[1];
        CHECK(std::abs(ds.labels[i] - expect) < 1e-10);
    }
}

TEST_CASE("generator is deterministic in the seed") {
    FunctionSpec f;
    f.kind = FunctionKind::SmoothSine;
    f.freq = 3.0;
    SyntheticSpec s = affine_spec(2, 6, f, 50, 0.3, 1234);
    Dataset a = generate(s);
    Dataset b = generate(s);
    CHECK(a.points == b.points);
    CHECK(a.labels == b.labels);
    s.seed = 1235;
    Dataset c = generate(s);
    CHECK(a.points != c.points);
}

TEST_CASE("intrinsic draws do not depend on the ambient dimension") {
    FunctionSpec f;
    f.kind = FunctionKind::SmoothSine;
    f.freq = 2.0;
    SyntheticModel m5(affine_spec(1, 5, f, 40, 0.1, 77));
    SyntheticModel m50(affine_spec(1, 50, f, 40, 0.1, 77));
    Dataset a = m5.generate();
    Dataset b = m50.generate();
    CHECK(a.labels == b.labels);  // same xi and noise stream
    for (int i = 0; i < a.n(); ++i) {
        CHECK(std::abs(m5.coords_of(a.points.row(i).transpose())[0] -
                       m50.coords_of(b.points.row(i).transpose())[0]) < 1e-12);
    }
}

TEST_CASE("label noise is centered") {
    FunctionSpec f;
    f.kind = FunctionKind::Constant;
    f.c = 1.0;
    const double sigma = 0.5;
    SyntheticSpec s = affine_spec(2, 4, f, 20000, sigma, 5);
    Dataset ds = generate(s);
    const double mean_err = (ds.labels.array() - 1.0).mean();
    CHECK(std::abs(mean_err) < 4 * sigma / std::sqrt(20000.0));
}

TEST_CASE("invalid specs are rejected") {
    FunctionSpec f;
    f.kind = FunctionKind::Constant;
    CHECK_THROWS_AS(generate(affine_spec(3, 3, f, 10, 0.0, 1)), ParameterError);
    CHECK_THROWS_AS(generate(affine_spec(1, 3, f, 10, -0.1, 1)), ParameterError);
    FunctionSpec lin;
    lin.kind = FunctionKind::LinearCoords;
    lin.w = {1.0, 2.0, 3.0};  // wrong length for d=1
    CHECK_THROWS_AS(generate(affine_spec(1, 3, lin, 10, 0.0, 1)), ParameterError);
}

TEST_CASE("split produces the documented sizes and is deterministic") {
    FunctionSpec f;
    f.kind = FunctionKind::Constant;
    Dataset ds = generate(affine_spec(1, 2, f, 10, 0.0, 3));
    SplitIndices si = split(ds, 0.2, 11);
    CHECK(si.test.size() == 2);
    CHECK(si.tree_half.size() == 4);
    CHECK(si.regression_half.size() == 4);

    SplitIndices si2 = split(ds, 0.2, 11);
    CHECK(si.test == si2.test);
    CHECK(si.tree_half == si2.tree_half);
    CHECK(si.regression_half == si2.regression_half);

    Dataset small = generate(affine_spec(1, 2, f, 4, 0.0, 3));
    SplitIndices s4 = split(small, 0.0, 1);
    CHECK(s4.test.empty());
    CHECK(s4.tree_half.size() == 2);
    CHECK(s4.regression_half.size() == 2);
}

TEST_CASE("split partitions the index range") {
    FunctionSpec f;
    f.kind = FunctionKind::Constant;
    Dataset ds = generate(affine_spec(2, 3, f, 101, 0.0, 9));
    SplitIndices si = split(ds, 0.3, 4);
    std::vector<char> seen(101, 0);
    for (auto* part : {&si.test, &si.tree_half, &si.regression_half})
        for (int i : *part) {
            REQUIRE(i >= 0);
            REQUIRE(i < 101);
            CHECK(!seen[static_cast<size_t>(i)]);
            seen[static_cast<size_t>(i)] = 1;
        }
    for (char c : seen) CHECK(c == 1);
    CHECK(std::abs(static_cast<int>(si.tree_half.size()) -
                   static_cast<int>(si.regression_half.size())) <= 1);
}

TEST_CASE("split rejects tiny inputs") {
    FunctionSpec f;
    f.kind = FunctionKind::Constant;
    Dataset ds = generate(affine_spec(1, 2, f, 3, 0.0, 3));
    CHECK_THROWS_AS(split(ds, 0.9, 1), ParameterError);
}

TEST_CASE("csv round-trip is bit-exact") {
    FunctionSpec f;
    f.kind = FunctionKind::SmoothSine;
    f.freq = 17.3;
    Dataset ds = generate(affine_spec(2, 5, f, 64, 0.7, 2024));
    const std::string path = "roundtrip_test.csv";
    save_csv(ds, path);
    Dataset back = load_csv(path);
    REQUIRE(back.n() == ds.n());
    REQUIRE(back.ambient_dim() == ds.ambient_dim());
    CHECK(back.points == ds.points);
    CHECK(back.labels == ds.labels);
    std::remove(path.c_str());
}

TEST_CASE("malformed csv files raise IoError") {
    const std::string path = "malformed_test.csv";
    {
        std::ofstream out(path);
        out << "x1,x2,y\n1.0,2.0\n";  // short row
    }
    CHECK_THROWS_AS(load_csv(path), IoError);
    {
        std::ofstream out(path);
        out << "x1,x2,y\n1.0,nan,3.0\n";
    }
    CHECK_THROWS_AS(load_csv(path), IoError);
    {
        std::ofstream out(path);
        out << "x1,x2,y\n1.0,abc,3.0\n";
    }
    CHECK_THROWS_AS(load_csv(path), IoError);
    CHECK_THROWS_AS(load_csv("no_such_file_here.csv"), IoError);
    std::remove(path.c_str());
}

TEST_CASE("piecewise indicator splits the sphere at the equator") {
    SyntheticSpec s;
    s.manifold = {ManifoldKind::Sphere, 2, 3};
    s.function.kind = FunctionKind::PiecewiseIndicator;
    s.function.a = 1.0;
    s.function.b = -1.0;
    s.n_samples = 500;
    s.seed = 31;
    SyntheticModel model(s);
    Dataset ds = model.generate();
    int pos = 0;
    for (int i = 0; i < ds.n(); ++i) {
        const int side = model.indicator_side(ds.points.row(i).transpose());
        CHECK(ds.labels[i] == (side > 0 ? 1.0 : -1.0));
        if (side > 0) ++pos;
    }
    // both hemispheres populated
    CHECK(pos > 100);
    CHECK(pos < 400);
}
