#include "msreg/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "msreg/serialize.hpp"

namespace msreg {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& X, const std::vector<int>& idx) {
    Eigen::MatrixXd out(static_cast<int>(idx.size()), X.cols());
    for (size_t i = 0; i < idx.size(); ++i) out.row(static_cast<int>(i)) = X.row(idx[i]);
    return out;
}

Eigen::VectorXd take(const Eigen::VectorXd& y, const std::vector<int>& idx) {
    Eigen::VectorXd out(static_cast<int>(idx.size()));
    for (size_t i = 0; i < idx.size(); ++i) out[static_cast<int>(i)] = y[idx[i]];
    return out;
}

} // namespace

PipelineResult fit_pipeline(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                            const SplitIndices& split, int d, int order,
                            const ModeSpec& mode, std::optional<double> M,
                            std::uint64_t seed) {
    PipelineResult res;
    double t0 = now_seconds();
    Eigen::MatrixXd tree_pts = take_rows(X, split.tree_half);
    Eigen::MatrixXd reg_pts = take_rows(X, split.regression_half);
    Eigen::VectorXd reg_y = take(y, split.regression_half);
    res.seconds.split = now_seconds() - t0;

    t0 = now_seconds();
    CoverTree ct = CoverTree::build(tree_pts, splitmix64(seed ^ 0xC0FEULL));
    auto tree = std::make_shared<const MultiscaleTree>(MultiscaleTree::derive(ct, reg_pts, d));
    res.seconds.tree = now_seconds() - t0;

    t0 = now_seconds();
    auto charts = std::make_shared<const std::vector<LocalChart>>(
        build_charts(*tree, reg_pts, d));
    res.seconds.gmra = now_seconds() - t0;

    t0 = now_seconds();
    const double bound = M.value_or(default_bound(reg_y));
    std::vector<LocalEstimator> fits = fit_all(*tree, *charts, reg_pts, reg_y, order, bound);
    res.seconds.fit = now_seconds() - t0;

    t0 = now_seconds();
    switch (mode.kind) {
        case ModeSpec::Kind::UniformJ:
            res.estimator = assemble_uniform(tree, charts, std::move(fits), mode.j, bound);
            break;
        case ModeSpec::Kind::UniformJstar: {
            const int j = choose_jstar(tree->n_samples(), mode.s, d, mode.mu,
                                       tree->base_radius(), tree->j_max());
            res.estimator = assemble_uniform(tree, charts, std::move(fits), j, bound);
            break;
        }
        case ModeSpec::Kind::Adaptive: {
            const double kappa =
                mode.kappa.value_or(default_kappa(*tree, *charts, fits, reg_pts, reg_y));
            AdaptiveResult ar = adaptive_partition(*tree, *charts, fits, reg_pts, kappa);
            res.kappa = kappa;
            res.tau = ar.tau;
            res.deltas = std::move(ar.deltas);
            res.estimator = GlobalEstimator(tree, charts, std::move(fits),
                                            std::move(ar.partition), order, bound);
            break;
        }
    }
    res.seconds.select = now_seconds() - t0;
    return res;
}

double evaluate_mse(const GlobalEstimator& est, const Eigen::MatrixXd& X,
                    const Eigen::VectorXd& y) {
    if (X.rows() == 0) throw ParameterError("evaluate_mse: empty test set");
    if (X.rows() != y.size()) throw ParameterError("evaluate_mse: points/labels mismatch");
    double acc = 0;
    for (int i = 0; i < X.rows(); ++i) {
        const double e = est.predict(X.row(i).transpose()) - y[i];
        acc += e * e;
    }
    return acc / X.rows();
}

SlopeFit fit_slope(const std::vector<double>& ns, const std::vector<double>& mses, int d) {
    SlopeFit out;
    if (ns.size() != mses.size() || ns.size() < 3) return out;
    for (double m : mses)
        if (!(m > 1e-20)) return out;  // exact fits: no rate to measure
    const int k = static_cast<int>(ns.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < k; ++i) {
        const double lx = std::log(ns[static_cast<size_t>(i)]);
        const double ly = std::log(mses[static_cast<size_t>(i)]);
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
    }
    const double denom = k * sxx - sx * sx;
    if (denom == 0) return out;
    out.m = (k * sxy - sx * sy) / denom;
    out.defined = true;
    if (out.m > -1.0 && out.m <= 0.0) {
        out.s_hat = -out.m * d / (2.0 * (out.m + 1.0));
        out.s_defined = true;
    }
    return out;
}

RateReport run_experiment(const ExperimentConfig& cfg) {
    if (cfg.n_grid.empty()) throw ParameterError("run_experiment: empty n_grid");
    for (size_t i = 1; i < cfg.n_grid.size(); ++i)
        if (cfg.n_grid[i] <= cfg.n_grid[i - 1])
            throw ParameterError("run_experiment: n_grid must be strictly increasing");
    if (cfg.repetitions < 1) throw ParameterError("run_experiment: repetitions must be >= 1");
    if (cfg.order != 0 && cfg.order != 1) throw ParameterError("run_experiment: order must be 0 or 1");

    RateReport rep;
    int d = cfg.data.manifold.d;
    if (cfg.data.manifold.kind == ManifoldKind::Circle) d = 1;
    if (cfg.data.manifold.kind == ManifoldKind::SwissRoll) d = 2;

    for (size_t ni = 0; ni < cfg.n_grid.size(); ++ni) {
        const int n = cfg.n_grid[ni];
        double acc = 0, acc2 = 0, cells_acc = 0;
        for (int r = 0; r < cfg.repetitions; ++r) {
            try {
                SyntheticSpec spec = cfg.data;
                spec.n_samples = n;
                spec.seed = splitmix64(cfg.seed ^ splitmix64(0x10001ULL * (ni + 1) +
                                                             static_cast<std::uint64_t>(r)));
                // Test MSE stands in for the population error against f, so
                // the held-out labels are the noiseless values.
                Eigen::VectorXd truth;
                Dataset ds = SyntheticModel(spec).generate(&truth);
                SplitIndices idx = split(ds, cfg.test_fraction, spec.seed ^ 0x7e57ULL);
                PipelineResult pr = fit_pipeline(ds.points, ds.labels, idx, d, cfg.order,
                                                 cfg.mode, cfg.M, spec.seed);
                const double tp = now_seconds();
                const double mse = evaluate_mse(pr.estimator, take_rows(ds.points, idx.test),
                                                take(truth, idx.test));
                pr.seconds.predict = now_seconds() - tp;

                RunResult rr;
                rr.n = n;
                rr.rep = r;
                rr.mse = mse;
                rr.cells = static_cast<int>(pr.estimator.partition().cells.size());
                rr.seconds = pr.seconds;
                rep.runs.push_back(rr);
                acc += mse;
                acc2 += mse * mse;
                cells_acc += rr.cells;
            } catch (const std::exception& e) {
                throw std::runtime_error("run_experiment at n=" + std::to_string(n) +
                                         ", rep=" + std::to_string(r) + ": " + e.what());
            }
        }
        const double mean = acc / cfg.repetitions;
        rep.ns.push_back(n);
        rep.mean_mse.push_back(mean);
        rep.std_mse.push_back(cfg.repetitions > 1
                                  ? std::sqrt(std::max(0.0, acc2 / cfg.repetitions - mean * mean))
                                  : 0.0);
        rep.mean_cells.push_back(cells_acc / cfg.repetitions);
    }

    std::vector<double> ns_d(rep.ns.begin(), rep.ns.end());
    rep.slope = fit_slope(ns_d, rep.mean_mse, d);
    return rep;
}

std::vector<RunResult> timing_profile(const ExperimentConfig& cfg) {
    RateReport rep = run_experiment(cfg);
    return rep.runs;
}

void write_report_csv(const RateReport& report, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw IoError("cannot open " + path + " for writing");
    std::fputs("n,rep,mse,cells,seconds_split,seconds_tree,seconds_gmra,seconds_fit,"
               "seconds_select,seconds_predict,seconds_total\n",
               f);
    for (const RunResult& r : report.runs)
        std::fprintf(f, "%d,%d,%.17g,%d,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", r.n, r.rep,
                     r.mse, r.cells, r.seconds.split, r.seconds.tree, r.seconds.gmra,
                     r.seconds.fit, r.seconds.select, r.seconds.predict, r.seconds.total());
    if (std::fclose(f) != 0) throw IoError("write failure on " + path);
}

void write_report_json(const RateReport& report, const ExperimentConfig& cfg,
                       const std::string& path) {
    json mode;
    switch (cfg.mode.kind) {
        case ModeSpec::Kind::UniformJ: mode = {{"kind", "uniform"}, {"j", cfg.mode.j}}; break;
        case ModeSpec::Kind::UniformJstar:
            mode = {{"kind", "uniform_jstar"}, {"s", cfg.mode.s}, {"mu", cfg.mode.mu}};
            break;
        case ModeSpec::Kind::Adaptive:
            mode = {{"kind", "adaptive"}};
            if (cfg.mode.kappa) mode["kappa"] = *cfg.mode.kappa;
            break;
    }
    json doc{{"config",
              {{"data", to_json(cfg.data)},
               {"order", cfg.order},
               {"mode", mode},
               {"n_grid", cfg.n_grid},
               {"repetitions", cfg.repetitions},
               {"seed", cfg.seed},
               {"test_fraction", cfg.test_fraction}}},
             {"n", report.ns},
             {"mean_mse", report.mean_mse},
             {"std_mse", report.std_mse},
             {"mean_cells", report.mean_cells},
             {"slope",
              {{"defined", report.slope.defined},
               {"m", report.slope.m},
               {"s_defined", report.slope.s_defined},
               {"s_hat", report.slope.s_hat}}}};
    if (cfg.M) doc["config"]["M"] = *cfg.M;
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << doc.dump(1, '\t') << "\n";
}

SlopeFit slope_from_csv(const std::string& path, int d) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw IoError(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::stringstream hs(line);
    std::string col;
    int n_col = -1, mse_col = -1, idx = 0;
    while (std::getline(hs, col, ',')) {
        if (col == "n") n_col = idx;
        if (col == "mse") mse_col = idx;
        ++idx;
    }
    if (n_col < 0 || mse_col < 0) throw IoError(path + ": need n and mse columns");
    std::map<double, std::pair<double, int>> acc;  // n -> (sum mse, count)
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ls(line);
        std::string field;
        double nv = 0, mv = 0;
        int c = 0;
        bool got_n = false, got_m = false;
        while (std::getline(ls, field, ',')) {
            if (c == n_col) { nv = std::strtod(field.c_str(), nullptr); got_n = true; }
            if (c == mse_col) { mv = std::strtod(field.c_str(), nullptr); got_m = true; }
            ++c;
        }
        if (!got_n || !got_m)
            throw IoError(path + ": row " + std::to_string(row) + ": missing n or mse");
        acc[nv].first += mv;
        acc[nv].second += 1;
    }
    std::vector<double> ns, mses;
    for (auto& [nv, s] : acc) {
        ns.push_back(nv);
        mses.push_back(s.first / s.second);
    }
    return fit_slope(ns, mses, d);
}

} // namespace msreg
