#include <fstream>
#include <sstream>

#include "riskpanel/errors.hpp"
#include "riskpanel/model_spec.hpp"

namespace riskpanel {

namespace {

Hyperparams news_markets(ModelFamily f, bool news) {
    switch (f) {
        case ModelFamily::OlsFe:
            return {};
        case ModelFamily::Lasso:
            return {{"lambda", news ? 0.027 : 0.018}};
        case ModelFamily::Ridge:
            return {{"lambda", news ? 1000.0 : 0.010}};
        case ModelFamily::ElasticNet:
            return news ? Hyperparams{{"lambda", 0.034}, {"rho", 0.82}}
                        : Hyperparams{{"lambda", 0.016}, {"rho", 0.94}};
        case ModelFamily::QuantileReg:
            // The markets-only penalty is unrecoverable; the news value is reused.
            return {{"tau", 0.5}, {"lambda", 0.019}};
        case ModelFamily::Pcr:
            return {{"n_components", news ? 47.0 : 43.0}};
        case ModelFamily::FactorRidge:
            return news ? Hyperparams{{"n_factors", 13.0}, {"lambda", 25.0}}
                        : Hyperparams{{"n_factors", 20.0}, {"lambda", 3.5}};
        case ModelFamily::GradientBoosting:
            return news ? Hyperparams{{"n_trees", 535.0},   {"learning_rate", 0.012},
                                      {"max_depth", 8.0},   {"subsample", 0.97},
                                      {"feature_fraction", 0.62}, {"min_child_weight", 3.0}}
                        : Hyperparams{{"n_trees", 145.0},   {"learning_rate", 0.034},
                                      {"max_depth", 5.0},   {"subsample", 0.68},
                                      {"feature_fraction", 0.69}, {"min_child_weight", 2.0}};
        case ModelFamily::Bagging:
            return news ? Hyperparams{{"n_trees", 1000.0}, {"max_depth", 40.0},
                                      {"min_samples_split", 5.0}, {"min_samples_leaf", 8.0},
                                      {"feature_fraction", 0.67}}
                        : Hyperparams{{"n_trees", 1000.0}, {"max_depth", 6.0},
                                      {"min_samples_split", 14.0}, {"min_samples_leaf", 3.0},
                                      {"feature_fraction", 0.93}};
        case ModelFamily::RandomForest:
            return news ? Hyperparams{{"n_trees", 1000.0}, {"max_depth", 60.0},
                                      {"min_samples_split", 5.0}, {"min_samples_leaf", 4.0},
                                      {"feature_fraction", 0.10}}
                        : Hyperparams{{"n_trees", 1000.0}, {"max_depth", 115.0},
                                      {"min_samples_split", 4.0}, {"min_samples_leaf", 20.0},
                                      {"feature_fraction", 0.12}};
        case ModelFamily::ExtraTrees:
            return news ? Hyperparams{{"n_trees", 1000.0}, {"max_depth", 139.0},
                                      {"min_samples_split", 3.0}, {"min_samples_leaf", 1.0},
                                      {"feature_fraction", 0.22}}
                        : Hyperparams{{"n_trees", 1000.0}, {"max_depth", 128.0},
                                      {"min_samples_split", 6.0}, {"min_samples_leaf", 10.0},
                                      {"feature_fraction", 0.38}};
        case ModelFamily::MultilayerRf1S:
            return news ? Hyperparams{{"n_trees", 1000.0},
                                      {"max_depth_ae", 27.0}, {"subsample_ae", 0.87},
                                      {"feature_fraction_ae", 0.73}, {"min_child_weight_ae", 10.0},
                                      {"max_depth_em", 41.0}, {"subsample_em", 0.67},
                                      {"feature_fraction_em", 0.35}, {"min_child_weight_em", 14.0}}
                        : Hyperparams{{"n_trees", 1000.0},
                                      {"max_depth_ae", 15.0}, {"subsample_ae", 0.83},
                                      {"feature_fraction_ae", 0.67}, {"min_child_weight_ae", 23.0},
                                      {"max_depth_em", 24.0}, {"subsample_em", 0.60},
                                      {"feature_fraction_em", 0.36}, {"min_child_weight_em", 40.0}};
        case ModelFamily::MultilayerRf2S:
            // Stage 1 covers advanced economies, stage 2 the EM regions.
            return news ? Hyperparams{{"n_trees", 1000.0},
                                      {"max_depth_ae", 28.0}, {"subsample_ae", 0.69},
                                      {"feature_fraction_ae", 0.59}, {"min_child_weight_ae", 17.0},
                                      {"max_depth_em", 35.0}, {"subsample_em", 0.78},
                                      {"feature_fraction_em", 0.30}, {"min_child_weight_em", 14.0}}
                        : Hyperparams{{"n_trees", 1000.0},
                                      {"max_depth_ae", 16.0}, {"subsample_ae", 0.89},
                                      {"feature_fraction_ae", 0.72}, {"min_child_weight_ae", 20.0},
                                      {"max_depth_em", 29.0}, {"subsample_em", 0.77},
                                      {"feature_fraction_em", 0.35}, {"min_child_weight_em", 50.0}};
    }
    return {};
}

}  // namespace

Hyperparams default_hyperparams(ModelFamily f, InfoSet k) {
    return news_markets(f, k == InfoSet::MarketsPlusNews);
}

// Format: `[family.infoset]` section headers followed by `name = value`
// lines; `#` starts a comment.
std::map<std::pair<std::string, std::string>, Hyperparams> parse_hyperparams_file(
    const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open hyperparams file: " + path);
    std::map<std::pair<std::string, std::string>, Hyperparams> out;
    std::string line, family, infoset;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        auto last = line.find_last_not_of(" \t\r");
        line = line.substr(first, last - first + 1);
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ValidationError(path + ":" + std::to_string(lineno) + ": unterminated section");
            const std::string name = line.substr(1, line.size() - 2);
            const auto dot = name.find('.');
            if (dot == std::string::npos)
                throw ValidationError(path + ":" + std::to_string(lineno) +
                                      ": section must be [family.infoset]");
            family = name.substr(0, dot);
            infoset = name.substr(dot + 1);
            out[{family, infoset}];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos || family.empty())
            throw ValidationError(path + ":" + std::to_string(lineno) + ": expected 'name = value'");
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        auto trim = [](std::string& s) {
            const auto b = s.find_first_not_of(" \t");
            const auto e = s.find_last_not_of(" \t");
            s = b == std::string::npos ? "" : s.substr(b, e - b + 1);
        };
        trim(key);
        trim(value);
        try {
            out[{family, infoset}][key] = std::stod(value);
        } catch (const std::exception&) {
            throw ValidationError(path + ":" + std::to_string(lineno) + ": bad value '" + value + "'");
        }
    }
    return out;
}

Hyperparams hyperparams_from_file(const std::string& path, ModelFamily f, InfoSet k) {
    const auto table = parse_hyperparams_file(path);
    const auto it = table.find({to_string(f), to_string(k)});
    if (it == table.end())
        throw ValidationError(path + ": no section [" + to_string(f) + "." + to_string(k) + "]");
    validate_hyperparams(f, it->second);
    return it->second;
}

}  // namespace riskpanel
