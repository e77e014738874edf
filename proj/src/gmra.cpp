#include "msreg/gmra.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace msreg {

namespace {

// Largest-magnitude entry of each column made positive; deterministic
// across solver back-ends.
void fix_signs(Eigen::MatrixXd& V) {
    for (int c = 0; c < V.cols(); ++c) {
        int arg = 0;
        double mx = -1.0;
        for (int r = 0; r < V.rows(); ++r) {
            const double a = std::abs(V(r, c));
            if (a > mx) { mx = a; arg = r; }
        }
        if (V(arg, c) < 0) V.col(c) = -V.col(c);
    }
}

// Extend V (D x r, orthonormal columns) to d columns with deterministic
// unit vectors orthogonal to the existing ones.
void complete_basis(Eigen::MatrixXd& V, int r, int d) {
    const int D = static_cast<int>(V.rows());
    int have = r;
    for (int e = 0; e < D && have < d; ++e) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(D);
        v[e] = 1.0;
        v -= V.leftCols(have) * (V.leftCols(have).transpose() * v);
        const double nrm = v.norm();
        if (nrm > 1e-8) {
            V.col(have) = v / nrm;
            ++have;
        }
    }
}

} // namespace

std::vector<CellStats> cell_statistics(const MultiscaleTree& tree,
                                       const Eigen::MatrixXd& points) {
    std::vector<CellStats> out(static_cast<size_t>(tree.size()));
    const int D = static_cast<int>(points.cols());
    for (int id = 0; id < tree.size(); ++id) {
        const Cell& c = tree.cell(id);
        if (c.samples.empty()) throw std::logic_error("cell_statistics: empty cell");
        CellStats& st = out[static_cast<size_t>(id)];
        st.count = c.count();
        st.mean = Eigen::VectorXd::Zero(D);
        for (int s : c.samples) st.mean += points.row(s).transpose();
        st.mean /= st.count;
        st.cov = Eigen::MatrixXd::Zero(D, D);
        for (int s : c.samples) {
            const Eigen::VectorXd v = points.row(s).transpose() - st.mean;
            st.cov.noalias() += v * v.transpose();
        }
        st.cov /= st.count;
    }
    return out;
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> local_pca(const Eigen::MatrixXd& cov, int d) {
    const int D = static_cast<int>(cov.rows());
    if (cov.cols() != D) throw ParameterError("local_pca: covariance must be square");
    if (d < 1 || d > D) throw ParameterError("local_pca: need 1 <= d <= D");
    const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale)
        throw ParameterError("local_pca: covariance is not symmetric");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    // ascending order -> reverse
    Eigen::MatrixXd V(D, d);
    Eigen::VectorXd lam = Eigen::VectorXd::Zero(d + 1);
    for (int i = 0; i < d; ++i) V.col(i) = es.eigenvectors().col(D - 1 - i);
    const int top = std::min(d + 1, D);
    for (int i = 0; i < top; ++i) lam[i] = std::max(0.0, es.eigenvalues()[D - 1 - i]);
    fix_signs(V);
    return {std::move(V), std::move(lam)};
}

std::vector<LocalChart> build_charts(const MultiscaleTree& tree,
                                     const Eigen::MatrixXd& points, int d) {
    const int D = static_cast<int>(points.cols());
    if (d < 1 || d > D) throw ParameterError("build_charts: need 1 <= d <= D");
    const int n = tree.n_samples();
    std::vector<LocalChart> charts(static_cast<size_t>(tree.size()));

    for (int id = 0; id < tree.size(); ++id) {
        const Cell& c = tree.cell(id);
        const int m = c.count();
        if (m < 1) throw std::logic_error("build_charts: empty cell");
        LocalChart& ch = charts[static_cast<size_t>(id)];
        ch.cell = id;
        ch.count = m;
        ch.measure = static_cast<double>(m) / n;

        Eigen::MatrixXd X(m, D);
        for (int i = 0; i < m; ++i) X.row(i) = points.row(c.samples[static_cast<size_t>(i)]);
        ch.center = X.colwise().mean().transpose();
        X.rowwise() -= ch.center.transpose();

        Eigen::MatrixXd V(D, d);
        Eigen::VectorXd lam = Eigen::VectorXd::Zero(d + 1);
        const int want = std::min(d + 1, std::min(m, D));

        if (m <= D) {
            // Gram form: the nonzero spectrum of X^T X / m via the m x m
            // Gram matrix; primal vectors recovered from the factors.
            Eigen::MatrixXd G = X * X.transpose() / m;
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
            int filled = 0;
            for (int i = 0; i < m && filled < d; ++i) {
                const double ev = es.eigenvalues()[m - 1 - i];
                if (ev <= 1e-14 * std::max(1.0, es.eigenvalues()[m - 1])) break;
                V.col(filled) =
                    X.transpose() * es.eigenvectors().col(m - 1 - i) / std::sqrt(ev * m);
                lam[filled] = ev;
                ++filled;
            }
            for (int i = 0; i < want; ++i)
                lam[i] = std::max(0.0, es.eigenvalues()[m - 1 - i]);
            for (int i = want; i <= d; ++i) lam[i] = 0.0;
            if (filled < d) {
                // rank-deficient cell; orthonormal completion with zero
                // eigenvalues keeps the chart shape fixed
                for (int i = filled; i < d; ++i) lam[i] = 0.0;
                complete_basis(V, filled, d);
            }
        } else {
            Eigen::MatrixXd cov = X.transpose() * X / m;
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
            for (int i = 0; i < d; ++i) V.col(i) = es.eigenvectors().col(D - 1 - i);
            for (int i = 0; i < want; ++i)
                lam[i] = std::max(0.0, es.eigenvalues()[D - 1 - i]);
        }
        fix_signs(V);
        ch.basis = std::move(V);
        ch.eigenvalues = lam.head(d);
        ch.lambda_dplus1 = lam[d];
    }
    return charts;
}

} // namespace msreg
