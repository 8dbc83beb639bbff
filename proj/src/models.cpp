#include "riskpanel/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "riskpanel/errors.hpp"
#include "riskpanel/util.hpp"

namespace riskpanel {

namespace {

using nlohmann::json;

Hyperparams effective_params(const ModelSpec& spec) {
    validate_hyperparams(spec.family, spec.params);
    Hyperparams p = default_hyperparams(spec.family, spec.infoset);
    for (const auto& [k, v] : spec.params) p[k] = v;
    return p;
}

// Tree families split on the training country index appended as a feature.
Eigen::MatrixXd with_country_column(const DesignMatrix& d) {
    Eigen::MatrixXd x(d.rows(), d.cols() + 1);
    x.leftCols(d.cols()) = d.x;
    for (Eigen::Index r = 0; r < d.rows(); ++r)
        x(r, d.cols()) = static_cast<double>(d.country[static_cast<std::size_t>(r)]);
    return x;
}

ForestSpec forest_spec(ModelFamily family, const Hyperparams& p, std::uint64_t seed) {
    ForestSpec spec;
    spec.n_trees = static_cast<int>(param_or(p, "n_trees", 1000));
    spec.limits.max_depth = static_cast<int>(param_or(p, "max_depth", 1 << 20));
    spec.limits.min_samples_split = static_cast<int>(param_or(p, "min_samples_split", 2));
    spec.limits.min_samples_leaf = static_cast<int>(param_or(p, "min_samples_leaf", 1));
    spec.limits.feature_fraction = param_or(p, "feature_fraction", 1.0);
    spec.seed = seed;
    switch (family) {
        case ModelFamily::Bagging:
            spec.bootstrap = true;
            spec.per_tree_features = true;
            break;
        case ModelFamily::RandomForest:
            spec.bootstrap = true;
            break;
        case ModelFamily::ExtraTrees:
            spec.bootstrap = false;
            spec.limits.random_thresholds = true;
            break;
        default:
            throw ValidationError("forest_spec: not a forest family");
    }
    return spec;
}

ForestSpec multilayer_group_spec(const Hyperparams& p, bool advanced, std::uint64_t seed) {
    const std::string suffix = advanced ? "_ae" : "_em";
    ForestSpec spec;
    spec.n_trees = static_cast<int>(param_or(p, "n_trees", 1000));
    spec.bootstrap = false;
    spec.subsample = param_or(p, "subsample" + suffix, 1.0);
    spec.limits.max_depth = static_cast<int>(param_or(p, "max_depth" + suffix, 1 << 20));
    spec.limits.min_samples_leaf = static_cast<int>(param_or(p, "min_child_weight" + suffix, 1));
    spec.limits.min_samples_split = std::max(2, 2 * spec.limits.min_samples_leaf);
    spec.limits.feature_fraction = param_or(p, "feature_fraction" + suffix, 1.0);
    spec.seed = seed;
    return spec;
}

}  // namespace

FittedModel fit_model(const ModelSpec& spec, const DesignMatrix& d, const Taxonomy& taxonomy,
                      int jobs) {
    if (d.rows() == 0) throw ValidationError("fit_model: empty design");
    const Hyperparams p = effective_params(spec);

    FittedModel m;
    m.family = spec.family;
    m.infoset = spec.infoset;
    m.feature_names = d.feature_names;
    m.country_codes = d.country_codes;
    for (const auto& code : d.country_codes) m.country_region.push_back(taxonomy.region_of(code));

    m.fingerprint.row_count = d.rows();
    for (const auto& t : d.feature_date)
        if (t > m.fingerprint.max_feature_date) m.fingerprint.max_feature_date = t;
    m.fingerprint.max_access_date = m.fingerprint.max_feature_date + d.target_lead;
    std::string names;
    for (const auto& n : d.feature_names) names += n + ",";
    m.fingerprint.feature_hash = fnv1a(names);
    m.fingerprint.seed = spec.seed;

    switch (spec.family) {
        case ModelFamily::OlsFe:
            m.impl = fit_ols_fe(d);
            break;
        case ModelFamily::Lasso:
            m.impl = fit_lasso(d, param_or(p, "lambda", 0.0));
            break;
        case ModelFamily::Ridge:
            m.impl = fit_ridge(d, param_or(p, "lambda", 0.0));
            break;
        case ModelFamily::ElasticNet:
            m.impl = fit_elastic_net(d, param_or(p, "lambda", 0.0), param_or(p, "rho", 0.5));
            break;
        case ModelFamily::QuantileReg:
            m.impl = fit_quantile(d, param_or(p, "tau", 0.5), param_or(p, "lambda", 0.0));
            break;
        case ModelFamily::Pcr: {
            // Appendix-style defaults can exceed this design's width; cap at M.
            const int k = std::min<int>(static_cast<int>(param_or(p, "n_components", 1)),
                                        static_cast<int>(d.cols()));
            m.impl = fit_pcr(d, k);
            break;
        }
        case ModelFamily::FactorRidge: {
            const int k = std::min<int>(static_cast<int>(param_or(p, "n_factors", 1)),
                                        static_cast<int>(d.cols()));
            m.impl = fit_factor_ridge(d, k, param_or(p, "lambda", 0.0));
            break;
        }
        case ModelFamily::GradientBoosting: {
            BoostingSpec bs;
            bs.n_trees = static_cast<int>(param_or(p, "n_trees", 100));
            bs.learning_rate = param_or(p, "learning_rate", 0.1);
            bs.max_depth = static_cast<int>(param_or(p, "max_depth", 3));
            bs.subsample = param_or(p, "subsample", 1.0);
            bs.feature_fraction = param_or(p, "feature_fraction", 1.0);
            bs.min_child_weight = static_cast<int>(param_or(p, "min_child_weight", 1));
            bs.seed = spec.seed;
            m.impl = fit_gradient_boosting(with_country_column(d), d.y, bs);
            break;
        }
        case ModelFamily::Bagging:
        case ModelFamily::RandomForest:
        case ModelFamily::ExtraTrees:
            m.impl = fit_forest(with_country_column(d), d.y, forest_spec(spec.family, p, spec.seed),
                                jobs);
            break;
        case ModelFamily::MultilayerRf1S:
        case ModelFamily::MultilayerRf2S: {
            std::vector<Region> row_region;
            row_region.reserve(static_cast<std::size_t>(d.rows()));
            for (Eigen::Index r = 0; r < d.rows(); ++r)
                row_region.push_back(m.country_region[static_cast<std::size_t>(
                    d.country[static_cast<std::size_t>(r)])]);
            std::map<Region, ForestSpec> specs;
            int stream = 0;
            for (Region region : {Region::AdvancedEconomies, Region::EMAsia, Region::EMLatam,
                                  Region::EMEurope, Region::EMMENA}) {
                const bool advanced = region == Region::AdvancedEconomies;
                specs[region] =
                    multilayer_group_spec(p, advanced, mix_seed(spec.seed, 1000 + stream));
                ++stream;
            }
            m.impl = fit_multilayer(with_country_column(d), d.y, row_region, specs, jobs);
            break;
        }
    }
    return m;
}

Eigen::VectorXd predict(const FittedModel& m, const DesignMatrix& rows) {
    if (rows.feature_names != m.feature_names) {
        std::ostringstream msg;
        msg << "predict: feature schema mismatch; fitted on [";
        for (const auto& n : m.feature_names) msg << n << ' ';
        msg << "] but given [";
        for (const auto& n : rows.feature_names) msg << n << ' ';
        msg << "]";
        throw ValidationError(msg.str());
    }
    // Map row countries into the training index space.
    std::vector<int> remap(rows.country_codes.size(), -1);
    for (std::size_t i = 0; i < rows.country_codes.size(); ++i) {
        auto it = std::find(m.country_codes.begin(), m.country_codes.end(), rows.country_codes[i]);
        if (it != m.country_codes.end())
            remap[i] = static_cast<int>(it - m.country_codes.begin());
    }

    Eigen::VectorXd out(rows.rows());
    std::vector<double> xbuf(static_cast<std::size_t>(rows.cols()) + 1);
    for (Eigen::Index r = 0; r < rows.rows(); ++r) {
        const int raw = rows.country[static_cast<std::size_t>(r)];
        const int c = remap[static_cast<std::size_t>(raw)];
        if (c < 0)
            throw ValidationError("predict: country " + rows.country_codes[static_cast<std::size_t>(raw)] +
                                  " not in training set");
        for (Eigen::Index j = 0; j < rows.cols(); ++j)
            xbuf[static_cast<std::size_t>(j)] = rows.x(r, j);
        xbuf[static_cast<std::size_t>(rows.cols())] = static_cast<double>(c);
        const std::span<const double> tree_x(xbuf.data(), static_cast<std::size_t>(rows.cols()) + 1);

        out(r) = std::visit(
            [&](const auto& impl) -> double {
                using T = std::decay_t<decltype(impl)>;
                if constexpr (std::is_same_v<T, LinearModel> || std::is_same_v<T, FactorModel>) {
                    return impl.predict_one(rows.x.row(r), c);
                } else if constexpr (std::is_same_v<T, Forest> || std::is_same_v<T, BoostingModel>) {
                    return impl.predict(tree_x);
                } else {
                    return impl.predict(tree_x, m.country_region[static_cast<std::size_t>(c)]);
                }
            },
            m.impl);
    }
    return out;
}

namespace {

json tree_to_json(const Tree& t) {
    json nodes = json::array();
    for (const auto& n : t.nodes)
        nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value, n.cover});
    return nodes;
}

Tree tree_from_json(const json& j) {
    Tree t;
    for (const auto& n : j) {
        TreeNode node;
        node.feature = n[0].get<int>();
        node.threshold = n[1].get<double>();
        node.left = n[2].get<int>();
        node.right = n[3].get<int>();
        node.value = n[4].get<double>();
        node.cover = n[5].get<double>();
        t.nodes.push_back(node);
    }
    return t;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

Eigen::VectorXd vector_from_json(const json& j) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    return v;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json out = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        out.push_back(row);
    }
    return out;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = rows ? static_cast<Eigen::Index>(j[0].size()) : 0;
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c)
            m(r, c) = j[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>();
    return m;
}

json forest_to_json(const Forest& f) {
    json trees = json::array();
    for (const auto& t : f.trees) trees.push_back(tree_to_json(t));
    return trees;
}

Forest forest_from_json(const json& j) {
    Forest f;
    for (const auto& t : j) f.trees.push_back(tree_from_json(t));
    return f;
}

}  // namespace

void save_model(const FittedModel& m, const std::string& path) {
    json j;
    j["format_version"] = 1;
    j["family"] = to_string(m.family);
    j["infoset"] = to_string(m.infoset);
    j["feature_names"] = m.feature_names;
    j["country_codes"] = m.country_codes;
    json regions = json::array();
    for (Region r : m.country_region) regions.push_back(to_string(r));
    j["country_regions"] = regions;
    j["fingerprint"] = {{"row_count", m.fingerprint.row_count},
                        {"max_feature_date", m.fingerprint.max_feature_date.to_string()},
                        {"max_access_date", m.fingerprint.max_access_date.to_string()},
                        {"feature_hash", m.fingerprint.feature_hash},
                        {"seed", m.fingerprint.seed}};
    std::visit(
        [&](const auto& impl) {
            using T = std::decay_t<decltype(impl)>;
            if constexpr (std::is_same_v<T, LinearModel>) {
                j["model"] = {{"kind", "linear"},
                              {"slopes", vector_to_json(impl.slopes)},
                              {"intercepts", vector_to_json(impl.intercepts)}};
            } else if constexpr (std::is_same_v<T, FactorModel>) {
                j["model"] = {{"kind", "factor"},
                              {"col_mean", vector_to_json(impl.col_mean)},
                              {"projection", matrix_to_json(impl.projection)},
                              {"coef", vector_to_json(impl.coef)},
                              {"intercepts", vector_to_json(impl.intercepts)}};
            } else if constexpr (std::is_same_v<T, Forest>) {
                j["model"] = {{"kind", "forest"}, {"trees", forest_to_json(impl)}};
            } else if constexpr (std::is_same_v<T, BoostingModel>) {
                j["model"] = {{"kind", "boosting"},
                              {"base", impl.base},
                              {"learning_rate", impl.learning_rate},
                              {"trees", forest_to_json(Forest{impl.trees})}};
            } else {
                json groups = json::object();
                for (const auto& [region, forest] : impl.groups)
                    groups[to_string(region)] = forest_to_json(forest);
                j["model"] = {{"kind", "multilayer"}, {"groups", groups}};
            }
        },
        m.impl);
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write model file: " + path);
    out << j.dump();
}

FittedModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open model file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError("bad model file " + path + ": " + e.what());
    }
    if (j.value("format_version", 0) != 1)
        throw ValidationError("unsupported model format version in " + path);
    FittedModel m;
    m.family = parse_family(j["family"].get<std::string>());
    m.infoset = parse_infoset(j["infoset"].get<std::string>());
    m.feature_names = j["feature_names"].get<std::vector<std::string>>();
    m.country_codes = j["country_codes"].get<std::vector<std::string>>();
    for (const auto& r : j["country_regions"]) m.country_region.push_back(parse_region(r.get<std::string>()));
    const auto& fp = j["fingerprint"];
    m.fingerprint.row_count = fp["row_count"].get<std::int64_t>();
    m.fingerprint.max_feature_date = Date::parse(fp["max_feature_date"].get<std::string>());
    m.fingerprint.max_access_date = Date::parse(fp["max_access_date"].get<std::string>());
    m.fingerprint.feature_hash = fp["feature_hash"].get<std::uint64_t>();
    m.fingerprint.seed = fp["seed"].get<std::uint64_t>();
    const auto& model = j["model"];
    const std::string kind = model["kind"].get<std::string>();
    if (kind == "linear") {
        LinearModel lm;
        lm.slopes = vector_from_json(model["slopes"]);
        lm.intercepts = vector_from_json(model["intercepts"]);
        m.impl = std::move(lm);
    } else if (kind == "factor") {
        FactorModel fm;
        fm.col_mean = vector_from_json(model["col_mean"]);
        fm.projection = matrix_from_json(model["projection"]);
        fm.coef = vector_from_json(model["coef"]);
        fm.intercepts = vector_from_json(model["intercepts"]);
        m.impl = std::move(fm);
    } else if (kind == "forest") {
        m.impl = forest_from_json(model["trees"]);
    } else if (kind == "boosting") {
        BoostingModel bm;
        bm.base = model["base"].get<double>();
        bm.learning_rate = model["learning_rate"].get<double>();
        bm.trees = forest_from_json(model["trees"]).trees;
        m.impl = std::move(bm);
    } else if (kind == "multilayer") {
        MultilayerModel mm;
        for (const auto& [key, value] : model["groups"].items())
            mm.groups.emplace(parse_region(key), forest_from_json(value));
        m.impl = std::move(mm);
    } else {
        throw ValidationError("unknown model kind '" + kind + "' in " + path);
    }
    return m;
}

}  // namespace riskpanel
