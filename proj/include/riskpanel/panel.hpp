#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "riskpanel/series.hpp"

namespace riskpanel {

// Unbalanced daily country x variable observation store. Immutable after
// load; every operation below is a pure function over it, so a Panel can be
// shared freely across threads. Global variables (FED, VIX) are stored once
// under the GLOBAL pseudo-country and broadcast to every country on lookup.
class Panel {
public:
    void add_series(Series s);  // validates; throws on duplicate key

    const std::vector<CountryMeta>& countries() const { return countries_; }
    const Taxonomy& taxonomy() const { return taxonomy_; }
    void set_taxonomy(Taxonomy t) { taxonomy_ = std::move(t); }

    // Resolves FED/VIX to the shared global series for any country.
    const Series* find(const std::string& country, Variable v) const;
    const std::map<std::pair<std::string, Variable>, Series>& series() const { return series_; }

    bool has_span() const { return !series_.empty(); }
    Date span_begin() const { return span_begin_; }
    Date span_end() const { return span_end_; }

    // Registers countries (CDS holders) and checks the per-panel invariants.
    void finalize();

private:
    std::map<std::pair<std::string, Variable>, Series> series_;
    std::vector<CountryMeta> countries_;
    Taxonomy taxonomy_ = Taxonomy::builtin();
    Date span_begin_{0}, span_end_{0};
};

struct PreprocessPolicy {
    int ma_window = 28;
    bool standardize = true;
    enum class Scope { FullSample, TrainOnly };
    Scope scope = Scope::FullSample;
    Date train_cutoff{0};  // used when scope == TrainOnly
};

// Long CSV `date,country,variable,value` with header. Global variables must
// appear under country GLOBAL. regions_sidecar extends the built-in taxonomy.
Panel load_panel(const std::string& path, const std::string& regions_sidecar = "");
void save_panel(const Panel& panel, const std::string& path);

// Trailing moving average over a calendar window of `window` days ending at
// each observation. Output starts at the window-th observation; calendar gaps
// shrink the averaging set (minimum one point: the observation itself).
Series moving_average(const Series& s, int window);

struct Standardization {
    Series series;
    double mean = 0.0;
    double sd = 0.0;
};

// (x - mean) / sd with statistics from the policy scope. Throws NumericError
// for degenerate series (sd <= 1e-12).
Standardization standardize(const Series& s, const PreprocessPolicy& policy);

// Observed-day share of [center - half_width, center + half_width].
double coverage(const Series& s, Date center, int half_width);

// Fills calendar gaps of at most max_gap missing days by linear interpolation.
Series interpolate_short_gaps(const Series& s, int max_gap);

struct PreprocessedPanel {
    Panel panel;  // smoothed + standardized series
    PreprocessPolicy policy;
    // Per (country code or GLOBAL, variable): statistics for inverse transforms.
    std::map<std::pair<std::string, Variable>, std::pair<double, double>> stats;
    std::vector<std::string> dropped;  // degenerate series, "code/VAR" form
};

// Applies the smoothing + standardization pipeline to every series.
PreprocessedPanel preprocess(const Panel& panel, const PreprocessPolicy& policy);

}  // namespace riskpanel
