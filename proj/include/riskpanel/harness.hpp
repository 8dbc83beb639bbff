#pragma once

#include "riskpanel/models.hpp"

namespace riskpanel {

// Recursive pseudo-real-time evaluation plan. Training at origin t may only
// consume panel observations dated <= t - buffer; forecasts are one step
// ahead (features at t, truth at t+1).
struct BacktestPlan {
    Date first_origin{0};
    Date last_origin{0};
    int refit_every = 7;  // days between re-estimations; predictions are daily
    int buffer = 28;
};

struct ForecastRecord {
    std::string country;
    Date origin{0};
    ModelFamily family = ModelFamily::OlsFe;
    InfoSet infoset = InfoSet::MarketsOnly;
    double yhat = 0.0;
    double y = 0.0;
    double err = 0.0;  // y - yhat
};

struct FingerprintRecord {
    ModelFamily family;
    InfoSet infoset;
    Date refit_origin;
    TrainingFingerprint fingerprint;
};

struct SkipRecord {
    Date origin;
    ModelFamily family;
    InfoSet infoset;
    std::string reason;
};

struct ForecastLedger {
    std::vector<ForecastRecord> records;           // canonically sorted
    std::vector<FingerprintRecord> fingerprints;
    std::vector<SkipRecord> skips;
    PreprocessPolicy::Scope scope = PreprocessPolicy::Scope::FullSample;
};

struct BacktestOptions {
    int jobs = 1;
    // When set, every observation consumed by *training* designs is recorded.
    AccessLog* training_access_log = nullptr;
};

// Runs every spec over the origin grid. Between refits the last fitted model
// keeps predicting daily. Origins without eligible training rows are skipped
// and logged. Output is independent of scheduling order.
ForecastLedger run_backtest(const PreprocessedPanel& panel, const std::vector<ModelSpec>& specs,
                            const BacktestPlan& plan, const BacktestOptions& opts = {});

// ---- Appendix-style accuracy accounting ------------------------------------

enum class AggLevel { Pooled, Country, Region, Global };
std::string to_string(AggLevel level);

struct MetricsCell {
    double mae = 0.0;
    double rmse = 0.0;
    std::int64_t n = 0;
};

struct MetricsKey {
    ModelFamily family;
    InfoSet infoset;
    AggLevel level;
    std::string unit;  // country code, region name, or empty

    auto operator<=>(const MetricsKey&) const = default;
};

struct MetricsTable {
    std::map<MetricsKey, MetricsCell> cells;

    const MetricsCell* find(ModelFamily f, InfoSet k, AggLevel level, const std::string& unit = "") const;
};

// Pooled micro metrics, per-country metrics, unweighted region averages of
// country metrics, and the unweighted global average of country metrics.
MetricsTable score(const ForecastLedger& ledger, const Taxonomy& taxonomy);

struct IncrementCell {
    double metric_mkt = 0.0;
    double metric_news = 0.0;
    double delta = 0.0;    // mkt - news; positive = news improves
    double pct = 0.0;      // 100 * delta / mkt
    bool defined = true;   // false when the benchmark metric is zero
};

struct IncrementKey {
    ModelFamily family;
    AggLevel level;
    std::string unit;
    std::string metric;  // "mae" | "rmse"

    auto operator<=>(const IncrementKey&) const = default;
};

using IncrementTable = std::map<IncrementKey, IncrementCell>;

// News increment per Appendix-style accounting: requires both tables to
// cover the same families and units.
IncrementTable news_increment(const MetricsTable& markets, const MetricsTable& with_news);

// ---- Expanding-window hyperparameter search --------------------------------

struct SearchRange {
    std::string name;
    double lo = 0.0;
    double hi = 1.0;
    bool integer = false;
    bool log_scale = false;
};

struct SearchSpace {
    std::vector<SearchRange> ranges;
    int budget = 50;
};

SearchSpace default_search_space(ModelFamily family);

struct TuneTrial {
    Hyperparams params;
    double score = 0.0;
    bool valid = false;
};

struct TuneResult {
    std::vector<Date> validation_dates;
    std::vector<TuneTrial> trials;  // in sampling order
    int best_index = -1;
    Hyperparams best;
};

struct TuneOptions {
    int folds = 5;
    int step_days = 60;
    int buffer = 28;
    enum class FoldMetric { MAE, RMSE } metric = FoldMetric::MAE;
    int jobs = 1;
};

// Seeded random search over the space, scored on `folds` validation dates
// stepping backward from train_end by step_days. For each fold the candidate
// trains on observations dated <= vdate - buffer and is scored at vdate.
// Ties resolve to the earlier trial.
TuneResult tune(const PreprocessedPanel& panel, ModelFamily family, InfoSet infoset,
                const SearchSpace& space, Date train_end, std::uint64_t seed,
                const TuneOptions& opts = {});

// ---- Ledger persistence -----------------------------------------------------

void save_ledger(const ForecastLedger& ledger, const std::string& path);
ForecastLedger load_ledger(const std::string& path);
void save_metrics(const MetricsTable& table, const std::string& path);
void save_increments(const IncrementTable& table, const std::string& path);

}  // namespace riskpanel
