#include "riskpanel/model_spec.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "riskpanel/errors.hpp"

namespace riskpanel {

std::string to_string(ModelFamily f) {
    switch (f) {
        case ModelFamily::OlsFe: return "ols_fe";
        case ModelFamily::Lasso: return "lasso";
        case ModelFamily::Ridge: return "ridge";
        case ModelFamily::ElasticNet: return "elastic_net";
        case ModelFamily::QuantileReg: return "quantile";
        case ModelFamily::Pcr: return "pcr";
        case ModelFamily::FactorRidge: return "factor_ridge";
        case ModelFamily::GradientBoosting: return "gradient_boosting";
        case ModelFamily::Bagging: return "bagging";
        case ModelFamily::RandomForest: return "random_forest";
        case ModelFamily::ExtraTrees: return "extra_trees";
        case ModelFamily::MultilayerRf1S: return "mlrf_1s";
        case ModelFamily::MultilayerRf2S: return "mlrf_2s";
    }
    return "?";
}

ModelFamily parse_family(const std::string& s) {
    for (ModelFamily f : all_families())
        if (to_string(f) == s) return f;
    throw ValidationError("unknown model family: '" + s + "'");
}

std::vector<ModelFamily> all_families() {
    return {ModelFamily::OlsFe,          ModelFamily::Lasso,
            ModelFamily::Ridge,          ModelFamily::ElasticNet,
            ModelFamily::QuantileReg,    ModelFamily::Pcr,
            ModelFamily::FactorRidge,    ModelFamily::GradientBoosting,
            ModelFamily::Bagging,        ModelFamily::RandomForest,
            ModelFamily::ExtraTrees,     ModelFamily::MultilayerRf1S,
            ModelFamily::MultilayerRf2S};
}

bool is_tree_family(ModelFamily f) {
    switch (f) {
        case ModelFamily::GradientBoosting:
        case ModelFamily::Bagging:
        case ModelFamily::RandomForest:
        case ModelFamily::ExtraTrees:
        case ModelFamily::MultilayerRf1S:
        case ModelFamily::MultilayerRf2S:
            return true;
        default:
            return false;
    }
}

namespace {

const double kInf = 1e18;

std::map<ModelFamily, std::vector<ParamSchema>> build_schemas() {
    std::map<ModelFamily, std::vector<ParamSchema>> m;
    m[ModelFamily::OlsFe] = {};
    m[ModelFamily::Lasso] = {{"lambda", 0.0, kInf, false}};
    m[ModelFamily::Ridge] = {{"lambda", 0.0, kInf, false}};
    m[ModelFamily::ElasticNet] = {{"lambda", 0.0, kInf, false}, {"rho", 0.0, 1.0, false}};
    m[ModelFamily::QuantileReg] = {{"tau", 1e-6, 1.0 - 1e-6, false}, {"lambda", 0.0, kInf, false}};
    m[ModelFamily::Pcr] = {{"n_components", 1, 10000, true}};
    m[ModelFamily::FactorRidge] = {{"n_factors", 1, 10000, true}, {"lambda", 0.0, kInf, false}};
    m[ModelFamily::GradientBoosting] = {
        {"n_trees", 1, 100000, true},        {"learning_rate", 0.0, 1.0, false},
        {"max_depth", 1, 10000, true},       {"subsample", 0.0, 1.0, false},
        {"feature_fraction", 0.0, 1.0, false}, {"min_child_weight", 1, 100000, true},
    };
    const std::vector<ParamSchema> forest = {
        {"n_trees", 1, 100000, true},       {"max_depth", 1, 10000, true},
        {"min_samples_split", 2, 100000, true}, {"min_samples_leaf", 1, 100000, true},
        {"feature_fraction", 0.0, 1.0, false},
    };
    m[ModelFamily::Bagging] = forest;
    m[ModelFamily::RandomForest] = forest;
    m[ModelFamily::ExtraTrees] = forest;
    const std::vector<ParamSchema> mlrf = {
        {"n_trees", 1, 100000, true},
        {"max_depth_ae", 1, 10000, true},      {"subsample_ae", 0.0, 1.0, false},
        {"feature_fraction_ae", 0.0, 1.0, false}, {"min_child_weight_ae", 1, 100000, true},
        {"max_depth_em", 1, 10000, true},      {"subsample_em", 0.0, 1.0, false},
        {"feature_fraction_em", 0.0, 1.0, false}, {"min_child_weight_em", 1, 100000, true},
    };
    m[ModelFamily::MultilayerRf1S] = mlrf;
    m[ModelFamily::MultilayerRf2S] = mlrf;
    return m;
}

}  // namespace

const std::vector<ParamSchema>& family_schema(ModelFamily f) {
    static const auto schemas = build_schemas();
    return schemas.at(f);
}

void validate_hyperparams(ModelFamily f, const Hyperparams& p) {
    const auto& schema = family_schema(f);
    for (const auto& [name, value] : p) {
        const ParamSchema* entry = nullptr;
        for (const auto& s : schema)
            if (s.name == name) entry = &s;
        if (!entry)
            throw ValidationError("hyperparameter '" + name + "' unknown to family " + to_string(f));
        if (!(value >= entry->min && value <= entry->max))
            throw ValidationError("hyperparameter '" + name + "' = " + std::to_string(value) +
                                  " out of range for family " + to_string(f));
        if (entry->integer && value != std::floor(value))
            throw ValidationError("hyperparameter '" + name + "' must be an integer for family " +
                                  to_string(f));
    }
}

double param_or(const Hyperparams& p, const std::string& name, double fallback) {
    auto it = p.find(name);
    return it == p.end() ? fallback : it->second;
}

}  // namespace riskpanel
