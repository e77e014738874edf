#include "msreg/serialize.hpp"

#include <fstream>

namespace msreg {

namespace {

json vec_to_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

Eigen::VectorXd vec_from_json(const json& a) {
    Eigen::VectorXd v(a.size());
    for (size_t i = 0; i < a.size(); ++i) v[static_cast<int>(i)] = a[i].get<double>();
    return v;
}

json mat_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) rows.push_back(vec_to_json(m.row(i).transpose()));
    return rows;
}

Eigen::MatrixXd mat_from_json(const json& rows) {
    if (rows.empty()) return {};
    Eigen::MatrixXd m(rows.size(), rows[0].size());
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < rows[i].size(); ++j)
            m(static_cast<int>(i), static_cast<int>(j)) = rows[i][j].get<double>();
    return m;
}

const char* manifold_name(ManifoldKind k) {
    switch (k) {
        case ManifoldKind::Affine: return "affine";
        case ManifoldKind::Sphere: return "sphere";
        case ManifoldKind::Circle: return "circle";
        case ManifoldKind::SwissRoll: return "swissroll";
    }
    return "affine";
}

const char* function_name(FunctionKind k) {
    switch (k) {
        case FunctionKind::Constant: return "constant";
        case FunctionKind::LinearCoords: return "linear_coords";
        case FunctionKind::SmoothSine: return "smooth_sine";
        case FunctionKind::Holder: return "holder";
        case FunctionKind::PiecewiseIndicator: return "piecewise_indicator";
    }
    return "constant";
}

ManifoldKind manifold_from_name(const std::string& s) {
    if (s == "affine") return ManifoldKind::Affine;
    if (s == "sphere") return ManifoldKind::Sphere;
    if (s == "circle") return ManifoldKind::Circle;
    if (s == "swissroll") return ManifoldKind::SwissRoll;
    throw ParameterError("unknown manifold kind: " + s);
}

FunctionKind function_from_name(const std::string& s) {
    if (s == "constant") return FunctionKind::Constant;
    if (s == "linear_coords") return FunctionKind::LinearCoords;
    if (s == "smooth_sine") return FunctionKind::SmoothSine;
    if (s == "holder") return FunctionKind::Holder;
    if (s == "piecewise_indicator") return FunctionKind::PiecewiseIndicator;
    throw ParameterError("unknown function kind: " + s);
}

} // namespace

json to_json(const SyntheticSpec& spec) {
    json m{{"kind", manifold_name(spec.manifold.kind)},
           {"d", spec.manifold.d},
           {"D", spec.manifold.D}};
    json f{{"kind", function_name(spec.function.kind)}};
    switch (spec.function.kind) {
        case FunctionKind::Constant: f["c"] = spec.function.c; break;
        case FunctionKind::LinearCoords: f["w"] = spec.function.w; break;
        case FunctionKind::SmoothSine: f["freq"] = spec.function.freq; break;
        case FunctionKind::Holder: f["alpha"] = spec.function.alpha; break;
        case FunctionKind::PiecewiseIndicator:
            f["a"] = spec.function.a;
            f["b"] = spec.function.b;
            break;
    }
    return json{{"manifold", m},
                {"function", f},
                {"n", spec.n_samples},
                {"sigma", spec.noise_sigma},
                {"seed", spec.seed}};
}

SyntheticSpec synthetic_spec_from_json(const json& j) {
    SyntheticSpec spec;
    const json& m = j.at("manifold");
    spec.manifold.kind = manifold_from_name(m.at("kind").get<std::string>());
    spec.manifold.D = m.at("D").get<int>();
    spec.manifold.d = m.value("d", spec.manifold.kind == ManifoldKind::SwissRoll ? 2 : 1);
    if (spec.manifold.kind == ManifoldKind::Circle) spec.manifold.d = 1;
    if (spec.manifold.kind == ManifoldKind::SwissRoll) spec.manifold.d = 2;
    const json& f = j.at("function");
    spec.function.kind = function_from_name(f.at("kind").get<std::string>());
    spec.function.c = f.value("c", 0.0);
    if (f.contains("w")) spec.function.w = f.at("w").get<std::vector<double>>();
    spec.function.freq = f.value("freq", 1.0);
    spec.function.alpha = f.value("alpha", 0.5);
    spec.function.a = f.value("a", 1.0);
    spec.function.b = f.value("b", -1.0);
    spec.n_samples = j.at("n").get<int>();
    spec.noise_sigma = j.value("sigma", 0.0);
    spec.seed = j.value("seed", 0ULL);
    return spec;
}

ExperimentConfig experiment_config_from_json(const json& j) {
    ExperimentConfig cfg;
    cfg.data = synthetic_spec_from_json(j.at("data"));
    cfg.order = j.value("order", 1);
    if (j.contains("M")) cfg.M = j.at("M").get<double>();
    const json& jm = j.at("mode");
    const std::string kind = jm.at("kind").get<std::string>();
    if (kind == "uniform") {
        cfg.mode.kind = ModeSpec::Kind::UniformJ;
        cfg.mode.j = jm.at("j").get<int>();
    } else if (kind == "uniform_jstar") {
        cfg.mode.kind = ModeSpec::Kind::UniformJstar;
        cfg.mode.s = jm.at("s").get<double>();
        cfg.mode.mu = jm.value("mu", 1.0);
    } else if (kind == "adaptive") {
        cfg.mode.kind = ModeSpec::Kind::Adaptive;
        if (jm.contains("kappa")) cfg.mode.kappa = jm.at("kappa").get<double>();
    } else {
        throw ParameterError("unknown mode kind: " + kind);
    }
    cfg.n_grid = j.at("n_grid").get<std::vector<int>>();
    cfg.repetitions = j.value("repetitions", 1);
    cfg.seed = j.value("seed", 0ULL);
    cfg.test_fraction = j.value("test_fraction", 0.5);
    return cfg;
}

json tree_to_json(const MultiscaleTree& tree, const std::vector<LocalChart>* charts) {
    json cells = json::array();
    for (int id = 0; id < tree.size(); ++id) {
        const Cell& c = tree.cell(id);
        json jc{{"j", c.j},
                {"k", c.k},
                {"parent", c.parent},
                {"children", c.children},
                {"sample_indices", c.samples},
                {"net_point", vec_to_json(tree.net_point(id))}};
        if (charts) {
            const LocalChart& ch = (*charts)[static_cast<size_t>(id)];
            jc["chart"] = json{{"count", ch.count},
                               {"measure", ch.measure},
                               {"center", vec_to_json(ch.center)},
                               {"basis", mat_to_json(ch.basis)},
                               {"eigenvalues", vec_to_json(ch.eigenvalues)},
                               {"lambda_dplus1", ch.lambda_dplus1}};
        }
        cells.push_back(std::move(jc));
    }
    return json{{"r0", tree.base_radius()},
                {"root", tree.root()},
                {"n_samples", tree.n_samples()},
                {"min_leaf", tree.min_leaf()},
                {"cells", cells}};
}

void save_model(const GlobalEstimator& est, const std::string& path,
                const DeltaMap* deltas, double tau) {
    const MultiscaleTree& tree = est.tree();
    json cells = json::array();
    for (int id = 0; id < tree.size(); ++id) {
        const Cell& c = tree.cell(id);
        const LocalChart& ch = est.charts()[static_cast<size_t>(id)];
        const LocalEstimator& f = est.fits()[static_cast<size_t>(id)];
        json jc{{"j", c.j},
                {"k", c.k},
                {"parent", c.parent},
                {"children", c.children},
                {"count", c.count()},
                {"net_node", c.net_node},
                {"net_point", vec_to_json(tree.net_point(id))},
                {"chart",
                 json{{"center", vec_to_json(ch.center)},
                      {"basis", mat_to_json(ch.basis)},
                      {"eigenvalues", vec_to_json(ch.eigenvalues)},
                      {"lambda_dplus1", ch.lambda_dplus1},
                      {"measure", ch.measure}}},
                {"coef",
                 json{{"order", f.order},
                      {"scale_radius", f.scale_radius},
                      {"intercept_col", f.intercept_col},
                      {"slopes", vec_to_json(f.slopes)}}}};
        if (deltas) jc["delta"] = deltas->delta[static_cast<size_t>(id)];
        cells.push_back(std::move(jc));
    }
    json doc{{"format", "msreg-model-v1"},
             {"order", est.order()},
             {"M", est.bound()},
             {"out_of_support_value", est.out_of_support_value()},
             {"r0", tree.base_radius()},
             {"n_samples", tree.n_samples()},
             {"min_leaf", tree.min_leaf()},
             {"partition",
              json{{"kind", est.partition().kind == PartitionKind::Uniform ? "uniform" : "adaptive"},
                   {"param", est.partition().param},
                   {"cells", est.partition().cells}}},
             {"cells", cells}};
    if (deltas) doc["tau"] = tau;
    if (const CoverTree* ct = tree.router()) {
        json jnodes = json::array();
        for (const CoverTree::Node& nd : ct->nodes())
            jnodes.push_back(json{{"point", nd.point}, {"level", nd.level}, {"parent", nd.parent}});
        doc["router"] = json{{"r0", ct->base_radius()},
                             {"points", mat_to_json(ct->points())},
                             {"nodes", jnodes}};
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << doc.dump(1, '\t') << "\n";
    if (!out) throw IoError("write failure on " + path);
}

GlobalEstimator load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw IoError(path + ": " + e.what());
    }
    try {
        if (doc.at("format").get<std::string>() != "msreg-model-v1")
            throw IoError(path + ": unknown model format");
        const json& jcells = doc.at("cells");
        std::vector<Cell> cells(jcells.size());
        std::vector<LocalChart> charts(jcells.size());
        std::vector<LocalEstimator> fits(jcells.size());
        Eigen::MatrixXd nets;
        for (size_t i = 0; i < jcells.size(); ++i) {
            const json& jc = jcells[i];
            cells[i].j = jc.at("j").get<int>();
            cells[i].k = jc.at("k").get<int>();
            cells[i].parent = jc.at("parent").get<int>();
            cells[i].net_node = jc.value("net_node", -1);
            cells[i].children = jc.at("children").get<std::vector<int>>();
            Eigen::VectorXd np = vec_from_json(jc.at("net_point"));
            if (i == 0) nets.resize(static_cast<int>(jcells.size()), np.size());
            nets.row(static_cast<int>(i)) = np;
            LocalChart& ch = charts[i];
            ch.cell = static_cast<int>(i);
            ch.count = jc.at("count").get<int>();
            const json& jch = jc.at("chart");
            ch.measure = jch.at("measure").get<double>();
            ch.center = vec_from_json(jch.at("center"));
            ch.basis = mat_from_json(jch.at("basis"));
            ch.eigenvalues = vec_from_json(jch.at("eigenvalues"));
            ch.lambda_dplus1 = jch.at("lambda_dplus1").get<double>();
            LocalEstimator& f = fits[i];
            const json& jf = jc.at("coef");
            f.cell = static_cast<int>(i);
            f.order = jf.at("order").get<int>();
            f.scale_radius = jf.at("scale_radius").get<double>();
            f.intercept_col = jf.at("intercept_col").get<double>();
            f.slopes = vec_from_json(jf.at("slopes"));
            f.M = doc.at("M").get<double>();
        }
        auto tree = std::make_shared<MultiscaleTree>(MultiscaleTree::from_parts(
            std::move(cells), 0, std::move(nets), doc.at("r0").get<double>(),
            doc.at("n_samples").get<int>(), doc.at("min_leaf").get<int>()));
        if (doc.contains("router")) {
            const json& jr = doc.at("router");
            std::vector<CoverTree::Node> nodes(jr.at("nodes").size());
            for (size_t i = 0; i < nodes.size(); ++i) {
                const json& jn = jr.at("nodes")[i];
                nodes[i].point = jn.at("point").get<int>();
                nodes[i].level = jn.at("level").get<int>();
                nodes[i].parent = jn.at("parent").get<int>();
                if (nodes[i].parent >= 0)
                    nodes[static_cast<size_t>(nodes[i].parent)].children.push_back(
                        static_cast<int>(i));
            }
            tree->set_router(std::make_shared<const CoverTree>(CoverTree::from_parts(
                mat_from_json(jr.at("points")), std::move(nodes), jr.at("r0").get<double>())));
        }
        Partition part;
        const json& jp = doc.at("partition");
        part.kind = jp.at("kind").get<std::string>() == "uniform" ? PartitionKind::Uniform
                                                                  : PartitionKind::Adaptive;
        part.param = jp.at("param").get<double>();
        part.cells = jp.at("cells").get<std::vector<int>>();
        return GlobalEstimator(tree,
                               std::make_shared<const std::vector<LocalChart>>(std::move(charts)),
                               std::move(fits), std::move(part), doc.at("order").get<int>(),
                               doc.at("M").get<double>(),
                               doc.at("out_of_support_value").get<double>());
    } catch (const json::exception& e) {
        throw IoError(path + ": malformed model: " + e.what());
    }
}

} // namespace msreg
