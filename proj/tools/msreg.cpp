// Command-line front end: dataset generation, fitting, prediction, and the
// benchmark harness.
#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "msreg/bench.hpp"
#include "msreg/serialize.hpp"
#include "msreg/validation.hpp"

using namespace msreg;

namespace {

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw IoError(path + ": " + e.what());
    }
    return j;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"multiscale regression on low-dimensional data"};
    app.require_subcommand(1);

    // ---- gen ----------------------------------------------------------
    auto* gen_cmd = app.add_subcommand("gen", "generate a synthetic dataset CSV");
    std::string gen_config, gen_out = "data.csv";
    std::string gen_manifold = "affine", gen_function = "smooth_sine";
    int gen_d = 1, gen_D = 3, gen_n = 1000;
    double gen_sigma = 0.0, gen_c = 0.0, gen_freq = 1.0, gen_alpha = 0.5, gen_a = 1.0,
           gen_b = -1.0;
    std::vector<double> gen_w;
    std::uint64_t gen_seed = 0;
    gen_cmd->add_option("--config", gen_config, "JSON spec block (overrides flags)");
    gen_cmd->add_option("--manifold", gen_manifold, "affine|sphere|circle|swissroll");
    gen_cmd->add_option("--d", gen_d, "intrinsic dimension");
    gen_cmd->add_option("--D", gen_D, "ambient dimension");
    gen_cmd->add_option("--function", gen_function,
                        "constant|linear_coords|smooth_sine|holder|piecewise_indicator");
    gen_cmd->add_option("--c", gen_c, "constant value");
    gen_cmd->add_option("--w", gen_w, "linear_coords weights")->delimiter(',');
    gen_cmd->add_option("--freq", gen_freq, "smooth_sine frequency");
    gen_cmd->add_option("--alpha", gen_alpha, "holder exponent");
    gen_cmd->add_option("--a", gen_a, "indicator value inside");
    gen_cmd->add_option("--b", gen_b, "indicator value outside");
    gen_cmd->add_option("--n", gen_n, "sample count");
    gen_cmd->add_option("--sigma", gen_sigma, "label noise standard deviation");
    gen_cmd->add_option("--seed", gen_seed, "RNG seed");
    gen_cmd->add_option("--out", gen_out, "output CSV path");

    // ---- fit ----------------------------------------------------------
    auto* fit_cmd = app.add_subcommand("fit", "fit a model from a labeled CSV");
    std::string fit_data, fit_mode = "adaptive", fit_out = "model.json";
    int fit_dim = 1, fit_order = 1, fit_j = -1;
    double fit_s = 2.0, fit_mu = 1.0, fit_test_fraction = 0.0;
    std::optional<double> fit_kappa, fit_M;
    std::uint64_t fit_seed = 0;
    fit_cmd->add_option("--data", fit_data, "labeled CSV (x1..xD,y)")->required();
    fit_cmd->add_option("--dim", fit_dim, "intrinsic dimension d")->required();
    fit_cmd->add_option("--mode", fit_mode, "uniform|adaptive");
    fit_cmd->add_option("--order", fit_order, "polynomial order, 0 or 1");
    fit_cmd->add_option("--j", fit_j, "uniform scale (omit to use j* from --s/--mu)");
    fit_cmd->add_option("--s", fit_s, "regularity input to j*");
    fit_cmd->add_option("--mu", fit_mu, "scale constant in j*");
    fit_cmd->add_option_function<double>(
        "--kappa", [&fit_kappa](double v) { fit_kappa = v; }, "adaptive threshold constant");
    fit_cmd->add_option_function<double>(
        "--M", [&fit_M](double v) { fit_M = v; }, "truncation bound (default max |y|)");
    fit_cmd->add_option("--test-fraction", fit_test_fraction, "held-out fraction");
    fit_cmd->add_option("--seed", fit_seed, "split seed");
    fit_cmd->add_option("--out", fit_out, "model JSON path");
    bool fit_validate = false;
    fit_cmd->add_flag("--report-assumptions", fit_validate,
                      "print the tree assumption report");

    // ---- predict ------------------------------------------------------
    auto* pred_cmd = app.add_subcommand("predict", "evaluate a saved model on points");
    std::string pred_model, pred_points, pred_out = "predictions.csv";
    pred_cmd->add_option("--model", pred_model, "model JSON from fit")->required();
    pred_cmd->add_option("--points", pred_points, "query CSV (x1..xD)")->required();
    pred_cmd->add_option("--out", pred_out, "output CSV path");

    // ---- bench --------------------------------------------------------
    auto* bench_cmd = app.add_subcommand("bench", "benchmark harness");
    bench_cmd->require_subcommand(1);
    auto* bench_run = bench_cmd->add_subcommand("run", "run a grid experiment");
    std::string br_config, br_csv, br_json;
    bool br_assert = false;
    bench_run->add_option("--config", br_config, "experiment JSON")->required();
    bench_run->add_option("--out-csv", br_csv, "per-run CSV report");
    bench_run->add_option("--out-json", br_json, "summary JSON report");
    bench_run->add_flag("--assert", br_assert,
                        "nonzero exit when the config's assert block is violated");
    auto* bench_slope = bench_cmd->add_subcommand("slope", "slope from a results CSV");
    std::string bs_input;
    int bs_dim = 1;
    bench_slope->add_option("--input", bs_input, "CSV with n and mse columns")->required();
    bench_slope->add_option("--dim", bs_dim, "intrinsic dimension for s_hat");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen_cmd) {
            SyntheticSpec spec;
            if (!gen_config.empty()) {
                spec = synthetic_spec_from_json(load_json(gen_config));
            } else {
                json m{{"kind", gen_manifold}, {"d", gen_d}, {"D", gen_D}};
                json f{{"kind", gen_function}, {"c", gen_c}, {"freq", gen_freq},
                       {"alpha", gen_alpha},   {"a", gen_a}, {"b", gen_b}};
                if (!gen_w.empty()) f["w"] = gen_w;
                spec = synthetic_spec_from_json(json{{"manifold", m},
                                                     {"function", f},
                                                     {"n", gen_n},
                                                     {"sigma", gen_sigma},
                                                     {"seed", gen_seed}});
            }
            save_csv(generate(spec), gen_out);
            std::printf("wrote %d samples to %s\n", spec.n_samples, gen_out.c_str());
            return 0;
        }

        if (*fit_cmd) {
            Dataset ds = load_csv(fit_data);
            SplitIndices idx = split(ds, fit_test_fraction, fit_seed);
            ModeSpec mode;
            if (fit_mode == "uniform") {
                if (fit_j >= 0) {
                    mode.kind = ModeSpec::Kind::UniformJ;
                    mode.j = fit_j;
                } else {
                    mode.kind = ModeSpec::Kind::UniformJstar;
                    mode.s = fit_s;
                    mode.mu = fit_mu;
                }
            } else if (fit_mode == "adaptive") {
                mode.kind = ModeSpec::Kind::Adaptive;
                mode.kappa = fit_kappa;
            } else {
                throw ParameterError("unknown mode: " + fit_mode);
            }
            PipelineResult pr = fit_pipeline(ds.points, ds.labels, idx, fit_dim, fit_order,
                                             mode, fit_M, fit_seed);
            save_model(pr.estimator, fit_out, pr.deltas ? &*pr.deltas : nullptr, pr.tau);
            std::printf("model: %d cells, partition of %zu, M=%.6g",
                        pr.estimator.tree().size(), pr.estimator.partition().cells.size(),
                        pr.estimator.bound());
            if (mode.kind == ModeSpec::Kind::Adaptive)
                std::printf(", kappa=%.6g, tau=%.6g", pr.kappa, pr.tau);
            std::printf(" -> %s\n", fit_out.c_str());
            if (!idx.test.empty()) {
                Eigen::MatrixXd TX(static_cast<int>(idx.test.size()), ds.ambient_dim());
                Eigen::VectorXd Ty(static_cast<int>(idx.test.size()));
                for (size_t i = 0; i < idx.test.size(); ++i) {
                    TX.row(static_cast<int>(i)) = ds.points.row(idx.test[i]);
                    Ty[static_cast<int>(i)] = ds.labels[idx.test[i]];
                }
                std::printf("held-out MSE: %.8g\n", evaluate_mse(pr.estimator, TX, Ty));
            }
            if (fit_validate) {
                Eigen::MatrixXd reg(static_cast<int>(idx.regression_half.size()),
                                    ds.ambient_dim());
                for (size_t i = 0; i < idx.regression_half.size(); ++i)
                    reg.row(static_cast<int>(i)) = ds.points.row(idx.regression_half[i]);
                std::fputs(
                    validate_assumptions(pr.estimator.tree(), reg, pr.estimator.charts())
                        .summary()
                        .c_str(),
                    stdout);
            }
            return 0;
        }

        if (*pred_cmd) {
            GlobalEstimator est = load_model(pred_model);
            Eigen::MatrixXd X = load_points_csv(pred_points);
            if (X.cols() != est.charts()[0].center.size())
                throw ParameterError("query dimension does not match the model");
            save_predictions_csv(est.predict_all(X), pred_out);
            std::printf("wrote %ld predictions to %s\n", static_cast<long>(X.rows()),
                        pred_out.c_str());
            return 0;
        }

        if (*bench_run) {
            json jcfg = load_json(br_config);
            ExperimentConfig cfg = experiment_config_from_json(jcfg);
            RateReport rep = run_experiment(cfg);
            for (size_t i = 0; i < rep.ns.size(); ++i)
                std::printf("n=%d mean_mse=%.8g std=%.3g cells=%.1f\n", rep.ns[i],
                            rep.mean_mse[i], rep.std_mse[i], rep.mean_cells[i]);
            if (rep.slope.defined)
                std::printf("slope m=%.4f s_hat=%s\n", rep.slope.m,
                            rep.slope.s_defined ? std::to_string(rep.slope.s_hat).c_str()
                                                : "undefined");
            else
                std::puts("slope: undefined");
            if (!br_csv.empty()) write_report_csv(rep, br_csv);
            if (!br_json.empty()) write_report_json(rep, cfg, br_json);
            if (br_assert && jcfg.contains("assert")) {
                const json& ja = jcfg.at("assert");
                bool ok = true;
                if (ja.contains("slope_min") &&
                    (!rep.slope.defined || rep.slope.m < ja.at("slope_min").get<double>()))
                    ok = false;
                if (ja.contains("slope_max") &&
                    (!rep.slope.defined || rep.slope.m > ja.at("slope_max").get<double>()))
                    ok = false;
                if (ja.contains("max_mse")) {
                    for (double m : rep.mean_mse)
                        if (m > ja.at("max_mse").get<double>()) ok = false;
                }
                if (!ok) {
                    std::fputs("assertion violated\n", stderr);
                    return 2;
                }
            }
            return 0;
        }

        if (*bench_slope) {
            SlopeFit sf = slope_from_csv(bs_input, bs_dim);
            if (!sf.defined) {
                std::puts("slope: undefined");
            } else if (sf.s_defined) {
                std::printf("m=%.6f s_hat=%.6f\n", sf.m, sf.s_hat);
            } else {
                std::printf("m=%.6f s_hat=undefined\n", sf.m);
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
