#pragma once

#include <variant>

#include "riskpanel/factor.hpp"
#include "riskpanel/forest.hpp"
#include "riskpanel/linear.hpp"
#include "riskpanel/model_spec.hpp"

namespace riskpanel {

// Certifies what a fit consumed; the harness checks it against the embargo.
struct TrainingFingerprint {
    std::int64_t row_count = 0;
    Date max_feature_date{INT32_MIN};
    Date max_access_date{INT32_MIN};  // latest date of any consumed observation
    std::uint64_t feature_hash = 0;
    std::uint64_t seed = 0;
};

// Immutable fitted estimator with a uniform predict contract. Tree families
// see the training country as one extra integer-coded feature; linear and
// factor families absorb it as fixed effects.
struct FittedModel {
    ModelFamily family = ModelFamily::OlsFe;
    InfoSet infoset = InfoSet::MarketsOnly;
    std::vector<std::string> feature_names;           // substantive features
    std::vector<std::string> country_codes;           // training index space
    std::vector<Region> country_region;               // aligned with codes
    TrainingFingerprint fingerprint;
    std::variant<LinearModel, FactorModel, Forest, BoostingModel, MultilayerModel> impl;

    bool uses_country_feature() const { return is_tree_family(family); }
};

// Fits one spec on a design matrix. Hyperparameters omitted from the spec
// fall back to the family's (family, infoset) defaults. For PCR/FAR the
// component count is capped at the feature count.
FittedModel fit_model(const ModelSpec& spec, const DesignMatrix& d, const Taxonomy& taxonomy,
                      int jobs = 1);

// Vectorized deterministic prediction. Throws ValidationError when the row
// schema (feature names, unseen countries) does not match the fingerprint.
Eigen::VectorXd predict(const FittedModel& m, const DesignMatrix& rows);

// Versioned JSON dump.
void save_model(const FittedModel& m, const std::string& path);
FittedModel load_model(const std::string& path);

}  // namespace riskpanel
