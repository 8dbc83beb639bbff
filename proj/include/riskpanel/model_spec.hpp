#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "riskpanel/design.hpp"

namespace riskpanel {

enum class ModelFamily {
    OlsFe,
    Lasso,
    Ridge,
    ElasticNet,
    QuantileReg,
    Pcr,
    FactorRidge,
    GradientBoosting,
    Bagging,
    RandomForest,
    ExtraTrees,
    MultilayerRf1S,
    MultilayerRf2S,
};

std::string to_string(ModelFamily f);
ModelFamily parse_family(const std::string& s);
std::vector<ModelFamily> all_families();
bool is_tree_family(ModelFamily f);

using Hyperparams = std::map<std::string, double>;

struct ModelSpec {
    ModelFamily family = ModelFamily::OlsFe;
    Hyperparams params;
    InfoSet infoset = InfoSet::MarketsOnly;
    std::uint64_t seed = 0;
};

// Schema entry for one tunable parameter of a family.
struct ParamSchema {
    std::string name;
    double min;
    double max;
    bool integer;
};

const std::vector<ParamSchema>& family_schema(ModelFamily f);

// Throws ValidationError when a parameter is unknown to the family or out
// of range. Missing entries are allowed (defaults fill them at fit time).
void validate_hyperparams(ModelFamily f, const Hyperparams& p);

// Appendix-style defaults per (family, infoset): built-in table plus an
// optional text-file override; see hyperdefaults.cpp for the file format.
Hyperparams default_hyperparams(ModelFamily f, InfoSet k);
std::map<std::pair<std::string, std::string>, Hyperparams> parse_hyperparams_file(const std::string& path);
Hyperparams hyperparams_from_file(const std::string& path, ModelFamily f, InfoSet k);

double param_or(const Hyperparams& p, const std::string& name, double fallback);

}  // namespace riskpanel
