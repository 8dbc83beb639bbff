#include "riskpanel/panel.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "riskpanel/csv.hpp"
#include "riskpanel/errors.hpp"
#include "riskpanel/util.hpp"

namespace riskpanel {

void Panel::add_series(Series s) {
    s.check();
    if (is_global_variable(s.variable) && s.country != kGlobalCountry)
        throw ValidationError("global variable " + to_string(s.variable) +
                              " must be filed under country GLOBAL, got '" + s.country + "'");
    auto key = std::make_pair(s.country, s.variable);
    if (series_.count(key))
        throw ValidationError("duplicate series: " + s.country + "/" + to_string(s.variable));
    series_.emplace(std::move(key), std::move(s));
}

const Series* Panel::find(const std::string& country, Variable v) const {
    const std::string& c = is_global_variable(v) ? std::string(kGlobalCountry) : country;
    auto it = series_.find({c, v});
    return it == series_.end() ? nullptr : &it->second;
}

void Panel::finalize() {
    countries_.clear();
    std::set<std::string> codes;
    bool first = true;
    for (const auto& [key, s] : series_) {
        if (s.empty()) continue;
        if (key.first != kGlobalCountry) codes.insert(key.first);
        if (first || s.first_date() < span_begin_) span_begin_ = s.first_date();
        if (first || s.last_date() > span_end_) span_end_ = s.last_date();
        first = false;
    }
    for (const auto& code : codes) {
        if (!series_.count({code, Variable::Cds}))
            throw ValidationError("country " + code + " has no CDS series");
        countries_.push_back({code, taxonomy_.region_of(code)});
    }
}

Panel load_panel(const std::string& path, const std::string& regions_sidecar) {
    Taxonomy taxonomy = regions_sidecar.empty() ? Taxonomy::builtin()
                                                : Taxonomy::builtin_with_sidecar(regions_sidecar);
    CsvReader reader(path);
    std::vector<std::string> fields;
    if (!reader.next(fields) || fields != std::vector<std::string>{"date", "country", "variable", "value"})
        throw ValidationError(path + ": expected header 'date,country,variable,value'");

    std::map<std::pair<std::string, Variable>, std::vector<Observation>> rows;
    std::set<std::string> unknown_countries, unknown_variables;
    std::vector<std::string> bad_rows;
    while (reader.next(fields)) {
        const auto line = reader.line_number();
        if (fields.size() != 4) {
            bad_rows.push_back("line " + std::to_string(line) + ": expected 4 columns");
            continue;
        }
        Date date{0};
        Variable var = Variable::Cds;
        double value = 0.0;
        try {
            date = Date::parse(fields[0]);
        } catch (const ValidationError&) {
            bad_rows.push_back("line " + std::to_string(line) + ": bad date '" + fields[0] + "'");
            continue;
        }
        try {
            var = parse_variable(fields[2]);
        } catch (const ValidationError&) {
            unknown_variables.insert(fields[2]);
            continue;
        }
        const std::string& country = fields[1];
        const bool global = country == kGlobalCountry;
        if (global && !is_global_variable(var))
            throw ValidationError(path + " line " + std::to_string(line) + ": variable " +
                                  to_string(var) + " cannot be GLOBAL");
        if (!global && is_global_variable(var))
            throw ValidationError(path + " line " + std::to_string(line) + ": global variable " +
                                  to_string(var) + " must use country GLOBAL");
        if (!global && !taxonomy.contains(country)) {
            unknown_countries.insert(country);
            continue;
        }
        try {
            std::size_t used = 0;
            value = std::stod(fields[3], &used);
            if (used != fields[3].size() || !std::isfinite(value)) throw std::invalid_argument("");
        } catch (const std::exception&) {
            bad_rows.push_back("line " + std::to_string(line) + ": bad value '" + fields[3] + "'");
            continue;
        }
        rows[{country, var}].push_back({date, value});
    }
    if (!unknown_countries.empty() || !unknown_variables.empty()) {
        std::ostringstream msg;
        msg << path << ": unknown codes:";
        for (const auto& c : unknown_countries) msg << " country(" << c << ")";
        for (const auto& v : unknown_variables) msg << " variable(" << v << ")";
        throw ValidationError(msg.str());
    }
    if (!bad_rows.empty()) {
        std::ostringstream msg;
        msg << path << ": " << bad_rows.size() << " rejected row(s): ";
        for (std::size_t i = 0; i < bad_rows.size() && i < 10; ++i) msg << bad_rows[i] << "; ";
        throw ValidationError(msg.str());
    }

    Panel panel;
    panel.set_taxonomy(std::move(taxonomy));
    for (auto& [key, obs] : rows) {
        std::stable_sort(obs.begin(), obs.end(),
                         [](const Observation& a, const Observation& b) { return a.date < b.date; });
        for (std::size_t i = 1; i < obs.size(); ++i)
            if (obs[i].date == obs[i - 1].date)
                throw ValidationError(path + ": duplicate observation for (" + obs[i].date.to_string() +
                                      ", " + key.first + ", " + to_string(key.second) + ")");
        Series s;
        s.country = key.first;
        s.variable = key.second;
        s.obs = std::move(obs);
        panel.add_series(std::move(s));
    }
    panel.finalize();
    return panel;
}

void save_panel(const Panel& panel, const std::string& path) {
    CsvWriter out(path);
    out.row({"date", "country", "variable", "value"});
    for (const auto& [key, s] : panel.series())
        for (const auto& o : s.obs)
            out.row({o.date.to_string(), key.first, to_string(key.second), format_double(o.value)});
}

Series moving_average(const Series& s, int window) {
    if (window < 1) throw ValidationError("moving_average: window must be >= 1");
    Series out;
    out.country = s.country;
    out.variable = s.variable;
    if (s.empty()) return out;
    const auto& obs = s.obs;
    std::size_t lo = 0;  // first index inside the calendar window
    double running = 0.0;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        running += obs[i].value;
        const Date cutoff = obs[i].date - (window - 1);
        while (obs[lo].date < cutoff) {
            running -= obs[lo].value;
            ++lo;
        }
        if (i + 1 >= static_cast<std::size_t>(window)) {
            // Recompute the mean exactly; the running sum only tracks the window.
            double sum = 0.0;
            for (std::size_t j = lo; j <= i; ++j) sum += obs[j].value;
            out.obs.push_back({obs[i].date, sum / static_cast<double>(i - lo + 1)});
        }
    }
    return out;
}

Standardization standardize(const Series& s, const PreprocessPolicy& policy) {
    std::vector<double> sample;
    for (const auto& o : s.obs) {
        if (policy.scope == PreprocessPolicy::Scope::TrainOnly && o.date > policy.train_cutoff)
            continue;
        sample.push_back(o.value);
    }
    if (sample.size() < 2)
        throw NumericError("standardize: need >= 2 observations in scope for " + s.country + "/" +
                           to_string(s.variable));
    const double m = mean(sample);
    const double sd = stdev(sample);
    if (sd <= 1e-12)
        throw NumericError("standardize: degenerate series (sd <= 1e-12) for " + s.country + "/" +
                           to_string(s.variable));
    Standardization out;
    out.mean = m;
    out.sd = sd;
    out.series.country = s.country;
    out.series.variable = s.variable;
    out.series.obs.reserve(s.size());
    for (const auto& o : s.obs) out.series.obs.push_back({o.date, (o.value - m) / sd});
    return out;
}

double coverage(const Series& s, Date center, int half_width) {
    if (half_width < 1) throw ValidationError("coverage: half_width must be >= 1");
    const Date lo = center - half_width;
    const Date hi = center + half_width;
    const auto begin = std::lower_bound(s.obs.begin(), s.obs.end(), lo,
                                        [](const Observation& o, Date d) { return o.date < d; });
    const auto end = std::upper_bound(s.obs.begin(), s.obs.end(), hi,
                                      [](Date d, const Observation& o) { return d < o.date; });
    const double days = static_cast<double>(hi - lo + 1);
    return static_cast<double>(end - begin) / days;
}

Series interpolate_short_gaps(const Series& s, int max_gap) {
    if (max_gap < 1) throw ValidationError("interpolate_short_gaps: max_gap must be >= 1");
    Series out;
    out.country = s.country;
    out.variable = s.variable;
    for (std::size_t i = 0; i < s.obs.size(); ++i) {
        if (i > 0) {
            const auto& prev = s.obs[i - 1];
            const auto& cur = s.obs[i];
            const int gap = cur.date - prev.date - 1;
            if (gap >= 1 && gap <= max_gap) {
                const double step = (cur.value - prev.value) / static_cast<double>(gap + 1);
                for (int g = 1; g <= gap; ++g)
                    out.obs.push_back({prev.date + g, prev.value + step * g});
            }
        }
        out.obs.push_back(s.obs[i]);
    }
    return out;
}

PreprocessedPanel preprocess(const Panel& panel, const PreprocessPolicy& policy) {
    if (policy.ma_window < 1) throw ValidationError("preprocess: ma_window must be >= 1");
    PreprocessedPanel out;
    out.policy = policy;
    std::map<std::pair<std::string, Variable>, Series> kept;
    for (const auto& [key, s] : panel.series()) {
        Series smoothed = moving_average(s, policy.ma_window);
        if (!policy.standardize) {
            if (!smoothed.empty()) kept.emplace(key, std::move(smoothed));
            continue;
        }
        try {
            Standardization st = standardize(smoothed, policy);
            out.stats[key] = {st.mean, st.sd};
            kept.emplace(key, std::move(st.series));
        } catch (const NumericError&) {
            out.dropped.push_back(key.first + "/" + to_string(key.second));
        }
    }
    // A country whose CDS went degenerate is unusable; drop it wholesale.
    std::set<std::string> dead;
    for (const auto& meta : panel.countries())
        if (!kept.count({meta.code, Variable::Cds})) dead.insert(meta.code);
    Panel processed;
    processed.set_taxonomy(panel.taxonomy());
    for (auto& [key, s] : kept) {
        if (dead.count(key.first)) continue;
        processed.add_series(std::move(s));
    }
    processed.finalize();
    out.panel = std::move(processed);
    return out;
}

}  // namespace riskpanel
