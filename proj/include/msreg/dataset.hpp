#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "msreg/errors.hpp"

namespace msreg {

/// Labeled point cloud in ambient dimension D.
struct Dataset {
    Eigen::MatrixXd points;  // n x D
    Eigen::VectorXd labels;  // n
    std::optional<int> intrinsic_dim_hint;
    double noise_sigma = 0.0;

    int n() const { return static_cast<int>(points.rows()); }
    int ambient_dim() const { return static_cast<int>(points.cols()); }
};

/// Disjoint index sets: one half builds the tree, the other feeds the
/// regression statistics, the rest is held out for evaluation.
struct SplitIndices {
    std::vector<int> tree_half;
    std::vector<int> regression_half;
    std::vector<int> test;
};

enum class ManifoldKind { Affine, Sphere, Circle, SwissRoll };

struct ManifoldSpec {
    ManifoldKind kind = ManifoldKind::Affine;
    int d = 1;  // intrinsic dimension (fixed to 1 for Circle, 2 for SwissRoll)
    int D = 2;  // ambient dimension
};

enum class FunctionKind { Constant, LinearCoords, SmoothSine, Holder, PiecewiseIndicator };

struct FunctionSpec {
    FunctionKind kind = FunctionKind::Constant;
    double c = 0.0;              // Constant
    std::vector<double> w;       // LinearCoords, one weight per intrinsic parameter
    double freq = 1.0;           // SmoothSine
    double alpha = 0.5;          // Holder, in (0, 1]
    double a = 1.0, b = -1.0;    // PiecewiseIndicator
};

struct SyntheticSpec {
    ManifoldSpec manifold;
    FunctionSpec function;
    int n_samples = 0;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;
};

/// Seeded sampler for a synthetic manifold + regression function. The
/// intrinsic draws depend only on the seed (not on D), so the same seed
/// produces the same intrinsic data under different ambient embeddings.
class SyntheticModel {
public:
    explicit SyntheticModel(SyntheticSpec spec);

    const SyntheticSpec& spec() const { return spec_; }

    /// Number of intrinsic parameters (affine: d, sphere: d+1, circle: 2,
    /// swiss roll: 2).
    int coord_dim() const;

    /// Draws the sample; when noiseless is given it receives f(x_i) without
    /// the label noise (the regression target itself).
    Dataset generate(Eigen::VectorXd* noiseless = nullptr) const;

    /// Noiseless regression value at an ambient point on the manifold.
    double true_value(const Eigen::VectorXd& x) const;

    /// +1 if x falls in the indicator set of PiecewiseIndicator, else -1.
    /// (Defined for every function kind; only meaningful for the indicator.)
    int indicator_side(const Eigen::VectorXd& x) const;

    /// Intrinsic parameters recovered from an ambient point (inverts the
    /// seeded rotation; exact for points generated by this model).
    Eigen::VectorXd coords_of(const Eigen::VectorXd& x) const;

    const Eigen::MatrixXd& rotation() const { return rotation_; }

private:
    double f_of_coords(const Eigen::VectorXd& xi) const;
    double coord_midpoint(int l) const;  // center of the l-th parameter range

    SyntheticSpec spec_;
    Eigen::MatrixXd rotation_;  // D x D orthogonal
};

/// Convenience wrapper: SyntheticModel(spec).generate().
Dataset generate(const SyntheticSpec& spec);

/// Shuffle indices with the given seed, carve off round(test_fraction * n)
/// test points, split the remainder into two halves of equal size (+-1).
SplitIndices split(const Dataset& ds, double test_fraction, std::uint64_t seed);

/// CSV with header row x1,...,xD,y. Values round-trip bit-exactly.
void save_csv(const Dataset& ds, const std::string& path);
Dataset load_csv(const std::string& path);

/// CSV of query points, header x1,...,xD (a trailing y column is ignored).
Eigen::MatrixXd load_points_csv(const std::string& path);

/// Writes one prediction per row under a "yhat" header.
void save_predictions_csv(const Eigen::VectorXd& yhat, const std::string& path);

} // namespace msreg
