#include "msreg/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/Dense>

namespace msreg {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Haar-ish orthogonal matrix: QR of a seeded Gaussian matrix with the R
// diagonal sign fixed, so the result is deterministic in the seed.
Eigen::MatrixXd random_rotation(int D, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd A(D, D);
    for (int i = 0; i < D; ++i)
        for (int j = 0; j < D; ++j) A(i, j) = gauss(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
    Eigen::MatrixXd Q = qr.householderQ();
    Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < D; ++j)
        if (R(j, j) < 0) Q.col(j) = -Q.col(j);
    return Q;
}

int manifold_dim(const ManifoldSpec& m) {
    switch (m.kind) {
        case ManifoldKind::Affine: return m.d;
        case ManifoldKind::Sphere: return m.d;
        case ManifoldKind::Circle: return 1;
        case ManifoldKind::SwissRoll: return 2;
    }
    return m.d;
}

void validate(const SyntheticSpec& spec) {
    const ManifoldSpec& m = spec.manifold;
    const int d = manifold_dim(m);
    if (m.D < 1 || d < 1) throw ParameterError("manifold dimensions must be positive");
    if (d >= m.D) throw ParameterError("intrinsic dimension must be below the ambient dimension");
    if (m.kind == ManifoldKind::Sphere && m.d + 1 > m.D)
        throw ParameterError("sphere(d,D) needs D >= d+1");
    if (m.kind == ManifoldKind::SwissRoll && m.D < 3)
        throw ParameterError("swissroll(D) needs D >= 3");
    if (spec.n_samples < 1) throw ParameterError("n_samples must be >= 1");
    if (spec.noise_sigma < 0) throw ParameterError("noise_sigma must be >= 0");
    const FunctionSpec& f = spec.function;
    if (f.kind == FunctionKind::Holder && (f.alpha <= 0 || f.alpha > 1))
        throw ParameterError("holder alpha must lie in (0, 1]");
}

} // namespace

SyntheticModel::SyntheticModel(SyntheticSpec spec) : spec_(std::move(spec)) {
    validate(spec_);
    if (spec_.function.kind == FunctionKind::LinearCoords &&
        static_cast<int>(spec_.function.w.size()) != coord_dim())
        throw ParameterError("linear_coords weight length must equal the intrinsic parameter count");
    rotation_ = random_rotation(spec_.manifold.D, splitmix64(spec_.seed ^ 0xA11CE0FULL));
}

int SyntheticModel::coord_dim() const {
    switch (spec_.manifold.kind) {
        case ManifoldKind::Affine: return spec_.manifold.d;
        case ManifoldKind::Sphere: return spec_.manifold.d + 1;
        case ManifoldKind::Circle: return 2;
        case ManifoldKind::SwissRoll: return 2;
    }
    return spec_.manifold.d;
}

double SyntheticModel::f_of_coords(const Eigen::VectorXd& xi) const {
    const FunctionSpec& f = spec_.function;
    switch (f.kind) {
        case FunctionKind::Constant:
            return f.c;
        case FunctionKind::LinearCoords: {
            double v = 0;
            for (int l = 0; l < xi.size(); ++l) v += f.w[static_cast<size_t>(l)] * xi[l];
            return v;
        }
        case FunctionKind::SmoothSine: {
            double v = 0;
            for (int l = 0; l < xi.size(); ++l) v += std::sin(f.freq * xi[l]);
            return v;
        }
        case FunctionKind::Holder: {
            double v = 0;
            for (int l = 0; l < xi.size(); ++l)
                v += std::pow(std::abs(xi[l] - coord_midpoint(l)), f.alpha);
            return v;
        }
        case FunctionKind::PiecewiseIndicator:
            return xi[0] > coord_midpoint(0) ? f.a : f.b;
    }
    return 0.0;
}

double SyntheticModel::coord_midpoint(int l) const {
    switch (spec_.manifold.kind) {
        case ManifoldKind::Affine: return 0.5;
        case ManifoldKind::Sphere:
        case ManifoldKind::Circle: return 0.0;
        case ManifoldKind::SwissRoll: return l == 0 ? 3.0 * kPi : 10.5;
    }
    return 0.0;
}

Eigen::VectorXd SyntheticModel::coords_of(const Eigen::VectorXd& x) const {
    Eigen::VectorXd pre = rotation_.transpose() * x;
    return pre.head(coord_dim());
}

double SyntheticModel::true_value(const Eigen::VectorXd& x) const {
    return f_of_coords(coords_of(x));
}

int SyntheticModel::indicator_side(const Eigen::VectorXd& x) const {
    return coords_of(x)[0] > coord_midpoint(0) ? +1 : -1;
}

Dataset SyntheticModel::generate(Eigen::VectorXd* noiseless) const {
    const int n = spec_.n_samples;
    const int D = spec_.manifold.D;
    const int cd = coord_dim();
    std::mt19937_64 rng(splitmix64(spec_.seed));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    Eigen::MatrixXd pre = Eigen::MatrixXd::Zero(n, D);
    Eigen::VectorXd labels(n);
    if (noiseless) noiseless->resize(n);
    Eigen::VectorXd xi(cd);
    for (int i = 0; i < n; ++i) {
        switch (spec_.manifold.kind) {
            case ManifoldKind::Affine:
                for (int l = 0; l < cd; ++l) xi[l] = unif(rng);
                break;
            case ManifoldKind::Sphere:
            case ManifoldKind::Circle: {
                double norm = 0;
                do {
                    for (int l = 0; l < cd; ++l) xi[l] = gauss(rng);
                    norm = xi.norm();
                } while (norm < 1e-12);
                xi /= norm;
                break;
            }
            case ManifoldKind::SwissRoll: {
                xi[0] = 1.5 * kPi + 3.0 * kPi * unif(rng);
                xi[1] = 21.0 * unif(rng);
                break;
            }
        }
        switch (spec_.manifold.kind) {
            case ManifoldKind::Affine:
            case ManifoldKind::Sphere:
            case ManifoldKind::Circle:
                pre.row(i).head(cd) = xi;
                break;
            case ManifoldKind::SwissRoll:
                pre(i, 0) = xi[0] * std::cos(xi[0]);
                pre(i, 1) = xi[1];
                pre(i, 2) = xi[0] * std::sin(xi[0]);
                break;
        }
        double y = f_of_coords(xi);
        if (noiseless) (*noiseless)[i] = y;
        if (spec_.noise_sigma > 0) y += spec_.noise_sigma * gauss(rng);
        labels[i] = y;
    }

    Dataset ds;
    ds.points = pre * rotation_.transpose();  // rows x_i^T = p_i^T R^T
    ds.labels = std::move(labels);
    ds.intrinsic_dim_hint = manifold_dim(spec_.manifold);
    ds.noise_sigma = spec_.noise_sigma;
    return ds;
}

Dataset generate(const SyntheticSpec& spec) { return SyntheticModel(spec).generate(); }

SplitIndices split(const Dataset& ds, double test_fraction, std::uint64_t seed) {
    const int n = ds.n();
    if (test_fraction < 0 || test_fraction >= 1)
        throw ParameterError("test_fraction must lie in [0, 1)");
    const int n_test = static_cast<int>(std::lround(test_fraction * n));
    const int m = n - n_test;
    if (m < 2) throw ParameterError("too few samples to form two nonempty halves");

    std::vector<int> idx(static_cast<size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(splitmix64(seed ^ 0x51DE5ULL));
    std::shuffle(idx.begin(), idx.end(), rng);

    SplitIndices out;
    out.test.assign(idx.begin(), idx.begin() + n_test);
    const int tree_n = m - m / 2;
    out.tree_half.assign(idx.begin() + n_test, idx.begin() + n_test + tree_n);
    out.regression_half.assign(idx.begin() + n_test + tree_n, idx.end());
    std::sort(out.test.begin(), out.test.end());
    std::sort(out.tree_half.begin(), out.tree_half.end());
    std::sort(out.regression_half.begin(), out.regression_half.end());
    return out;
}

namespace {

void write_double(std::FILE* f, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::fputs(buf, f);
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

CsvTable read_csv_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw IoError(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::stringstream hs(line);
    std::string fieldstr;
    while (std::getline(hs, fieldstr, ',')) t.header.push_back(fieldstr);
    if (t.header.empty()) throw IoError(path + ": empty header row");

    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> vals;
        vals.reserve(t.header.size());
        const char* p = line.c_str();
        int col = 0;
        while (true) {
            ++col;
            char* end = nullptr;
            double v = std::strtod(p, &end);
            if (end == p)
                throw IoError(path + ": row " + std::to_string(row) + ", column " +
                              std::to_string(col) + ": not a number");
            if (!std::isfinite(v))
                throw IoError(path + ": row " + std::to_string(row) + ", column " +
                              std::to_string(col) + ": non-finite value");
            vals.push_back(v);
            p = end;
            if (*p == ',') { ++p; continue; }
            if (*p == '\0') break;
            throw IoError(path + ": row " + std::to_string(row) + ", column " +
                          std::to_string(col) + ": trailing garbage");
        }
        if (vals.size() != t.header.size())
            throw IoError(path + ": row " + std::to_string(row) + ": expected " +
                          std::to_string(t.header.size()) + " fields, got " +
                          std::to_string(vals.size()));
        t.rows.push_back(std::move(vals));
    }
    return t;
}

} // namespace

void save_csv(const Dataset& ds, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw IoError("cannot open " + path + " for writing");
    const int D = ds.ambient_dim();
    for (int j = 0; j < D; ++j) std::fprintf(f, "x%d,", j + 1);
    std::fputs("y\n", f);
    for (int i = 0; i < ds.n(); ++i) {
        for (int j = 0; j < D; ++j) {
            write_double(f, ds.points(i, j));
            std::fputc(',', f);
        }
        write_double(f, ds.labels[i]);
        std::fputc('\n', f);
    }
    if (std::fclose(f) != 0) throw IoError("write failure on " + path);
}

Dataset load_csv(const std::string& path) {
    CsvTable t = read_csv_table(path);
    if (t.header.back() != "y")
        throw IoError(path + ": last header column must be y");
    const int D = static_cast<int>(t.header.size()) - 1;
    if (D < 1) throw IoError(path + ": no coordinate columns");
    const int n = static_cast<int>(t.rows.size());
    if (n < 1) throw IoError(path + ": no data rows");
    Dataset ds;
    ds.points.resize(n, D);
    ds.labels.resize(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < D; ++j) ds.points(i, j) = t.rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
        ds.labels[i] = t.rows[static_cast<size_t>(i)][static_cast<size_t>(D)];
    }
    return ds;
}

Eigen::MatrixXd load_points_csv(const std::string& path) {
    CsvTable t = read_csv_table(path);
    int D = static_cast<int>(t.header.size());
    if (t.header.back() == "y") --D;  // labeled file reused as queries
    if (D < 1) throw IoError(path + ": no coordinate columns");
    Eigen::MatrixXd X(static_cast<int>(t.rows.size()), D);
    for (int i = 0; i < X.rows(); ++i)
        for (int j = 0; j < D; ++j) X(i, j) = t.rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
    return X;
}

void save_predictions_csv(const Eigen::VectorXd& yhat, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw IoError("cannot open " + path + " for writing");
    std::fputs("yhat\n", f);
    for (int i = 0; i < yhat.size(); ++i) {
        write_double(f, yhat[i]);
        std::fputc('\n', f);
    }
    if (std::fclose(f) != 0) throw IoError("write failure on " + path);
}

} // namespace msreg
