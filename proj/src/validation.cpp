#include "msreg/validation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace msreg {

namespace {

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

} // namespace

std::string ValidationReport::summary() const {
    std::string s;
    auto line = [&s](const char* name, const AssumptionCheck& c) {
        s += name;
        s += c.pass ? "  pass" : "  FAIL";
        s += "  ";
        s += c.note;
        s += "\n";
    };
    line("(A1) nesting      ", nesting);
    line("(A2) cover        ", cover);
    line("(A3) cell count   ", cell_count);
    line("(A4) radius       ", radius);
    line("(A5i) spectrum lo ", spectrum_lo);
    line("(A5ii) gap        ", spectrum_gap);
    s += "branching a_min=" + std::to_string(branching_min) +
         " a_max=" + std::to_string(branching_max) +
         ", spectral checks on " + std::to_string(validated_cells) +
         " cells from scale " + std::to_string(first_validated_scale) + "\n";
    return s;
}

ValidationReport validate_assumptions(const MultiscaleTree& tree,
                                      const Eigen::MatrixXd& regression_points,
                                      const std::vector<LocalChart>& charts) {
    ValidationReport rep;
    const int d = charts.empty() ? 1 : static_cast<int>(charts[0].basis.cols());

    // (A1) children partition the parent's samples, exhaustively.
    {
        bool ok = true;
        for (int id = 0; id < tree.size() && ok; ++id) {
            const Cell& c = tree.cell(id);
            if (c.children.empty()) continue;
            std::vector<int> merged;
            for (int ch : c.children) {
                const auto& cs = tree.cell(ch).samples;
                merged.insert(merged.end(), cs.begin(), cs.end());
                if (tree.cell(ch).parent != id) ok = false;
            }
            std::vector<int> parent_sorted = c.samples;
            std::sort(parent_sorted.begin(), parent_sorted.end());
            std::sort(merged.begin(), merged.end());
            if (merged != parent_sorted) ok = false;
        }
        rep.nesting.pass = ok;
        rep.nesting.note = ok ? "children partition parents" : "partition violated";
    }

    // (A2) every per-scale partition covers the retained samples exactly.
    {
        bool ok = true;
        for (int j = 0; j <= tree.j_max() && ok; ++j)
            ok = is_valid_partition(tree, tree.partition_at(j));
        rep.cover.pass = ok;
        rep.cover.note = ok ? "all Lambda_j are exact covers" : "cover violated";
    }

    // branching bounds over internal cells
    {
        int amin = std::numeric_limits<int>::max(), amax = 0;
        for (int id = 0; id < tree.size(); ++id) {
            const int a = static_cast<int>(tree.cell(id).children.size());
            if (a > 0) { amin = std::min(amin, a); amax = std::max(amax, a); }
        }
        if (amax == 0) amin = 0;
        rep.branching_min = amin;
        rep.branching_max = amax;
    }

    // (A3) theta1_hat = min_j 2^{jd} / #Lambda_j.
    {
        double t1 = std::numeric_limits<double>::infinity();
        for (int j = 0; j <= tree.j_max(); ++j) {
            const double cnt = static_cast<double>(tree.partition_at(j).size());
            t1 = std::min(t1, std::pow(2.0, j * d) / cnt);
        }
        rep.cell_count.constant = t1;
        rep.cell_count.pass = t1 > 0;
        rep.cell_count.note = "theta1_hat = " + fmt("%.4g", t1);
    }

    // (A4) theta2_hat = max over cells and samples of ||x - c|| / r_j.
    {
        double t2 = 0;
        for (int id = 0; id < tree.size(); ++id) {
            const Cell& c = tree.cell(id);
            const double rj = tree.radius_at(c.j);
            const auto& center = charts[static_cast<size_t>(id)].center;
            for (int s : c.samples) {
                const double dist = (regression_points.row(s).transpose() - center).norm();
                t2 = std::max(t2, dist / rj);
            }
        }
        rep.radius.constant = t2;
        rep.radius.pass = t2 <= 3.0;
        rep.radius.note = "theta2_hat = " + fmt("%.4g", t2);
    }

    // (A5) spectral constants on validated cells: scales >= 1 with enough
    // samples for a rank-(d+1) covariance. The coarsest scales may carry
    // poor constants and are excluded by definition.
    {
        rep.first_validated_scale = 1;
        double t3 = std::numeric_limits<double>::infinity();
        double t4 = 0;
        int used = 0;
        for (int id = 0; id < tree.size(); ++id) {
            const Cell& c = tree.cell(id);
            if (c.j < rep.first_validated_scale || c.count() < d + 2) continue;
            const LocalChart& ch = charts[static_cast<size_t>(id)];
            const double rj = tree.radius_at(c.j);
            const double lam_d = ch.eigenvalues[d - 1];
            t3 = std::min(t3, lam_d * d / (rj * rj));
            if (lam_d > 0) t4 = std::max(t4, ch.lambda_dplus1 / lam_d);
            else t4 = std::max(t4, 1.0);  // rank-deficient validated cell
            ++used;
        }
        rep.validated_cells = used;
        if (used == 0) {
            rep.spectrum_lo.pass = rep.spectrum_gap.pass = true;
            rep.spectrum_lo.note = rep.spectrum_gap.note = "no validated cells";
        } else {
            rep.spectrum_lo.constant = t3;
            rep.spectrum_lo.pass = t3 > 0;
            rep.spectrum_lo.note = "theta3_hat = " + fmt("%.4g", t3);
            rep.spectrum_gap.constant = t4;
            rep.spectrum_gap.pass = t4 < 1.0;
            rep.spectrum_gap.note = "theta4_hat = " + fmt("%.4g", t4);
        }
    }
    return rep;
}

} // namespace msreg
