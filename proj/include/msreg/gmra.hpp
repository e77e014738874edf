#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "msreg/mstree.hpp"

namespace msreg {

/// Per-cell empirical statistics and rank-d principal chart.
struct LocalChart {
    int cell = -1;
    int count = 0;
    double measure = 0.0;          // count / n
    Eigen::VectorXd center;        // empirical mean, length D
    Eigen::MatrixXd basis;         // D x d, orthonormal columns
    Eigen::VectorXd eigenvalues;   // length d, descending, >= 0
    double lambda_dplus1 = 0.0;    // (d+1)-th eigenvalue, 0 when unavailable

    /// Chart coordinates basis^T (x - center).
    Eigen::VectorXd coords(const Eigen::VectorXd& x) const {
        return basis.transpose() * (x - center);
    }
};

struct CellStats {
    int count = 0;
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;  // (1/count) sum (x-mean)(x-mean)^T
};

/// Exact empirical mean and covariance per cell. Materializes a D x D
/// covariance for every cell; intended for moderate D (tests, diagnostics).
/// The fitting pipeline uses build_charts, which never forms large
/// covariances for small cells.
std::vector<CellStats> cell_statistics(const MultiscaleTree& tree,
                                       const Eigen::MatrixXd& points);

/// Top-d eigenvectors and the leading d+1 eigenvalues of a symmetric PSD
/// covariance. Columns carry a deterministic sign (largest-magnitude entry
/// positive). Throws ParameterError when cov is not symmetric.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> local_pca(const Eigen::MatrixXd& cov, int d);

/// Charts for every cell, indexed by cell id. Equivalent to composing
/// cell_statistics with local_pca; cells smaller than the ambient dimension
/// are solved in Gram form.
std::vector<LocalChart> build_charts(const MultiscaleTree& tree,
                                     const Eigen::MatrixXd& points, int d);

inline Eigen::VectorXd local_coordinates(const LocalChart& chart, const Eigen::VectorXd& x) {
    return chart.coords(x);
}

} // namespace msreg
