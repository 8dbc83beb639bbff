#include "riskpanel/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "riskpanel/errors.hpp"
#include "riskpanel/util.hpp"

namespace riskpanel {

std::string to_string(AggLevel level) {
    switch (level) {
        case AggLevel::Pooled: return "pooled";
        case AggLevel::Country: return "country";
        case AggLevel::Region: return "region";
        case AggLevel::Global: return "global";
    }
    return "?";
}

namespace {

struct SpecTask {
    std::vector<ForecastRecord> records;
    std::vector<FingerprintRecord> fingerprints;
    std::vector<SkipRecord> skips;
    AccessLog training_log;
};

void run_spec(const PreprocessedPanel& panel, const ModelSpec& spec, const BacktestPlan& plan,
              bool want_log, SpecTask& task) {
    const Taxonomy& taxonomy = panel.panel.taxonomy();
    std::optional<FittedModel> current;
    for (Date origin = plan.first_origin; origin <= plan.last_origin; ++origin) {
        const bool refit = (origin - plan.first_origin) % plan.refit_every == 0;
        if (refit) {
            DesignOptions dopts;
            dopts.max_date = origin - plan.buffer;
            dopts.access_log = want_log ? &task.training_log : nullptr;
            const DesignMatrix train = build_design(panel.panel, spec.infoset, dopts);
            if (train.rows() == 0) {
                current.reset();
                task.skips.push_back({origin, spec.family, spec.infoset, "no eligible training rows"});
            } else {
                current = fit_model(spec, train, taxonomy, 1);
                task.fingerprints.push_back({spec.family, spec.infoset, origin, current->fingerprint});
            }
        }
        if (!current) continue;

        DesignOptions popts;
        popts.exact_feature_date = origin;
        DesignMatrix probe = build_design(panel.panel, spec.infoset, popts);
        if (probe.rows() == 0) continue;

        // Countries absent from training cannot be scored by this model.
        std::vector<Eigen::Index> keep;
        for (Eigen::Index r = 0; r < probe.rows(); ++r) {
            const auto& code = probe.country_codes[static_cast<std::size_t>(
                probe.country[static_cast<std::size_t>(r)])];
            if (std::find(current->country_codes.begin(), current->country_codes.end(), code) !=
                current->country_codes.end())
                keep.push_back(r);
        }
        if (keep.empty()) continue;
        DesignMatrix rows;
        rows.feature_names = probe.feature_names;
        rows.country_codes = probe.country_codes;
        rows.target_lead = probe.target_lead;
        rows.x.resize(static_cast<Eigen::Index>(keep.size()), probe.cols());
        rows.y.resize(static_cast<Eigen::Index>(keep.size()));
        for (std::size_t i = 0; i < keep.size(); ++i) {
            rows.x.row(static_cast<Eigen::Index>(i)) = probe.x.row(keep[i]);
            rows.y(static_cast<Eigen::Index>(i)) = probe.y(keep[i]);
            rows.country.push_back(probe.country[static_cast<std::size_t>(keep[i])]);
            rows.feature_date.push_back(probe.feature_date[static_cast<std::size_t>(keep[i])]);
        }

        const Eigen::VectorXd yhat = predict(*current, rows);
        for (Eigen::Index r = 0; r < rows.rows(); ++r) {
            ForecastRecord rec;
            rec.country = rows.country_codes[static_cast<std::size_t>(
                rows.country[static_cast<std::size_t>(r)])];
            rec.origin = origin;
            rec.family = spec.family;
            rec.infoset = spec.infoset;
            rec.yhat = yhat(r);
            rec.y = rows.y(r);
            rec.err = rec.y - rec.yhat;
            task.records.push_back(std::move(rec));
        }
    }
}

}  // namespace

ForecastLedger run_backtest(const PreprocessedPanel& panel, const std::vector<ModelSpec>& specs,
                            const BacktestPlan& plan, const BacktestOptions& opts) {
    if (specs.empty()) throw ValidationError("run_backtest: no model specs");
    if (plan.last_origin < plan.first_origin || plan.refit_every < 1 || plan.buffer < 0)
        throw ValidationError("run_backtest: invalid plan");
    if (plan.buffer < panel.policy.ma_window - 1)
        std::fprintf(stderr,
                     "warning: buffer (%d) shorter than smoothing window minus one (%d); "
                     "smoothed features may straddle the train/test split\n",
                     plan.buffer, panel.policy.ma_window - 1);

    std::vector<SpecTask> tasks(specs.size());
    parallel_for(specs.size(), opts.jobs, [&](std::size_t i) {
        run_spec(panel, specs[i], plan, opts.training_access_log != nullptr, tasks[i]);
    });

    ForecastLedger ledger;
    ledger.scope = panel.policy.scope;
    for (auto& task : tasks) {
        ledger.records.insert(ledger.records.end(), task.records.begin(), task.records.end());
        ledger.fingerprints.insert(ledger.fingerprints.end(), task.fingerprints.begin(),
                                   task.fingerprints.end());
        ledger.skips.insert(ledger.skips.end(), task.skips.begin(), task.skips.end());
        if (opts.training_access_log)
            opts.training_access_log->entries.insert(opts.training_access_log->entries.end(),
                                                     task.training_log.entries.begin(),
                                                     task.training_log.entries.end());
    }
    if (opts.training_access_log)
        for (const auto& e : opts.training_access_log->entries)
            if (e.date > opts.training_access_log->max_date)
                opts.training_access_log->max_date = e.date;

    auto key = [](const ForecastRecord& r) {
        return std::tuple<std::string, std::string, std::string, std::int32_t>(
            to_string(r.family), to_string(r.infoset), r.country, r.origin.days());
    };
    std::sort(ledger.records.begin(), ledger.records.end(),
              [&](const ForecastRecord& a, const ForecastRecord& b) { return key(a) < key(b); });
    return ledger;
}

const MetricsCell* MetricsTable::find(ModelFamily f, InfoSet k, AggLevel level,
                                      const std::string& unit) const {
    auto it = cells.find(MetricsKey{f, k, level, unit});
    return it == cells.end() ? nullptr : &it->second;
}

MetricsTable score(const ForecastLedger& ledger, const Taxonomy& taxonomy) {
    if (ledger.records.empty()) throw ValidationError("score: empty ledger");
    struct Sums {
        double abs = 0.0, sq = 0.0;
        std::int64_t n = 0;
    };
    std::map<std::tuple<ModelFamily, InfoSet, std::string>, Sums> by_country;
    for (const auto& r : ledger.records) {
        auto& s = by_country[{r.family, r.infoset, r.country}];
        s.abs += std::abs(r.err);
        s.sq += r.err * r.err;
        s.n += 1;
    }

    MetricsTable table;
    std::map<std::pair<ModelFamily, InfoSet>, Sums> pooled;
    struct Agg {
        double mae = 0.0, rmse = 0.0;
        std::int64_t countries = 0, n = 0;
    };
    std::map<std::tuple<ModelFamily, InfoSet, Region>, Agg> regional;
    std::map<std::pair<ModelFamily, InfoSet>, Agg> global;

    for (const auto& [key, s] : by_country) {
        const auto& [family, infoset, country] = key;
        MetricsCell cell;
        cell.mae = s.abs / static_cast<double>(s.n);
        cell.rmse = std::sqrt(s.sq / static_cast<double>(s.n));
        cell.n = s.n;
        table.cells[{family, infoset, AggLevel::Country, country}] = cell;

        auto& p = pooled[{family, infoset}];
        p.abs += s.abs;
        p.sq += s.sq;
        p.n += s.n;
        auto& reg = regional[{family, infoset, taxonomy.region_of(country)}];
        reg.mae += cell.mae;
        reg.rmse += cell.rmse;
        reg.countries += 1;
        reg.n += s.n;
        auto& g = global[{family, infoset}];
        g.mae += cell.mae;
        g.rmse += cell.rmse;
        g.countries += 1;
        g.n += s.n;
    }
    for (const auto& [key, s] : pooled) {
        MetricsCell cell;
        cell.mae = s.abs / static_cast<double>(s.n);
        cell.rmse = std::sqrt(s.sq / static_cast<double>(s.n));
        cell.n = s.n;
        table.cells[{key.first, key.second, AggLevel::Pooled, ""}] = cell;
    }
    for (const auto& [key, agg] : regional) {
        MetricsCell cell;
        cell.mae = agg.mae / static_cast<double>(agg.countries);
        cell.rmse = agg.rmse / static_cast<double>(agg.countries);
        cell.n = agg.n;
        table.cells[{std::get<0>(key), std::get<1>(key), AggLevel::Region,
                     to_string(std::get<2>(key))}] = cell;
    }
    for (const auto& [key, agg] : global) {
        MetricsCell cell;
        cell.mae = agg.mae / static_cast<double>(agg.countries);
        cell.rmse = agg.rmse / static_cast<double>(agg.countries);
        cell.n = agg.n;
        table.cells[{key.first, key.second, AggLevel::Global, ""}] = cell;
    }
    return table;
}

IncrementTable news_increment(const MetricsTable& markets, const MetricsTable& with_news) {
    IncrementTable out;
    for (const auto& [key, mkt] : markets.cells) {
        if (key.infoset != InfoSet::MarketsOnly) continue;
        const MetricsCell* news = with_news.find(key.family, InfoSet::MarketsPlusNews, key.level, key.unit);
        if (!news)
            throw ValidationError("news_increment: missing markets_news cell for family " +
                                  to_string(key.family) + " at " + to_string(key.level) + " '" +
                                  key.unit + "'");
        auto emit = [&](const std::string& metric, double a, double b) {
            IncrementCell cell;
            cell.metric_mkt = a;
            cell.metric_news = b;
            cell.delta = a - b;
            cell.defined = a != 0.0;
            cell.pct = cell.defined ? 100.0 * cell.delta / a : 0.0;
            out[{key.family, key.level, key.unit, metric}] = cell;
        };
        emit("mae", mkt.mae, news->mae);
        emit("rmse", mkt.rmse, news->rmse);
    }
    return out;
}

SearchSpace default_search_space(ModelFamily family) {
    SearchSpace space;
    switch (family) {
        case ModelFamily::OlsFe:
            break;
        case ModelFamily::Lasso:
        case ModelFamily::Ridge:
            space.ranges = {{"lambda", 1e-4, 1e3, false, true}};
            break;
        case ModelFamily::ElasticNet:
            space.ranges = {{"lambda", 1e-4, 1e3, false, true}, {"rho", 0.0, 1.0, false, false}};
            break;
        case ModelFamily::QuantileReg:
            space.ranges = {{"lambda", 1e-4, 10.0, false, true}};
            break;
        case ModelFamily::Pcr:
            space.ranges = {{"n_components", 1, 60, true, false}};
            break;
        case ModelFamily::FactorRidge:
            space.ranges = {{"n_factors", 1, 30, true, false}, {"lambda", 1e-3, 1e3, false, true}};
            break;
        case ModelFamily::GradientBoosting:
            space.ranges = {{"n_trees", 50, 800, true, false},
                            {"learning_rate", 0.005, 0.3, false, true},
                            {"max_depth", 2, 10, true, false},
                            {"subsample", 0.5, 1.0, false, false},
                            {"feature_fraction", 0.3, 1.0, false, false},
                            {"min_child_weight", 1, 20, true, false}};
            break;
        case ModelFamily::Bagging:
        case ModelFamily::RandomForest:
        case ModelFamily::ExtraTrees:
            space.ranges = {{"n_trees", 100, 1000, true, false},
                            {"max_depth", 4, 150, true, false},
                            {"min_samples_split", 2, 20, true, false},
                            {"min_samples_leaf", 1, 20, true, false},
                            {"feature_fraction", 0.1, 1.0, false, false}};
            break;
        case ModelFamily::MultilayerRf1S:
        case ModelFamily::MultilayerRf2S:
            space.ranges = {{"n_trees", 100, 1000, true, false},
                            {"max_depth_ae", 4, 60, true, false},
                            {"subsample_ae", 0.5, 1.0, false, false},
                            {"feature_fraction_ae", 0.3, 1.0, false, false},
                            {"min_child_weight_ae", 1, 50, true, false},
                            {"max_depth_em", 4, 60, true, false},
                            {"subsample_em", 0.5, 1.0, false, false},
                            {"feature_fraction_em", 0.3, 1.0, false, false},
                            {"min_child_weight_em", 1, 50, true, false}};
            break;
    }
    return space;
}

namespace {

Hyperparams sample_params(const SearchSpace& space, std::mt19937_64& rng) {
    Hyperparams p;
    for (const auto& r : space.ranges) {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        const double u = unit(rng);
        double value;
        if (r.log_scale) {
            value = std::exp(std::log(r.lo) + u * (std::log(r.hi) - std::log(r.lo)));
        } else {
            value = r.lo + u * (r.hi - r.lo);
        }
        if (r.integer) value = std::floor(value + 0.5);
        p[r.name] = value;
    }
    return p;
}

}  // namespace

TuneResult tune(const PreprocessedPanel& panel, ModelFamily family, InfoSet infoset,
                const SearchSpace& space, Date train_end, std::uint64_t seed,
                const TuneOptions& opts) {
    if (!panel.panel.has_span() || train_end < panel.panel.span_begin() ||
        train_end > panel.panel.span_end())
        throw ValidationError("tune: train_end outside panel span");
    if (space.budget < 1) throw ValidationError("tune: budget must be >= 1");

    TuneResult result;
    for (int k = 0; k < opts.folds; ++k)
        result.validation_dates.push_back(train_end - k * opts.step_days);

    // Sample the whole candidate list up front so trial order is fixed.
    std::mt19937_64 rng(seed);
    result.trials.resize(static_cast<std::size_t>(space.budget));
    for (auto& trial : result.trials) trial.params = sample_params(space, rng);

    const Taxonomy& taxonomy = panel.panel.taxonomy();
    parallel_for(result.trials.size(), opts.jobs, [&](std::size_t idx) {
        TuneTrial& trial = result.trials[idx];
        double total = 0.0;
        int folds_used = 0;
        for (Date vdate : result.validation_dates) {
            DesignOptions dopts;
            dopts.max_date = vdate - opts.buffer;
            const DesignMatrix train = build_design(panel.panel, infoset, dopts);
            if (train.rows() == 0) return;  // fold with empty training set: candidate invalid

            DesignOptions vopts;
            vopts.exact_feature_date = vdate - 1;  // truth observed at vdate
            DesignMatrix probe = build_design(panel.panel, infoset, vopts);
            std::vector<Eigen::Index> keep;
            for (Eigen::Index r = 0; r < probe.rows(); ++r) {
                const auto& code = probe.country_codes[static_cast<std::size_t>(
                    probe.country[static_cast<std::size_t>(r)])];
                if (std::find(train.country_codes.begin(), train.country_codes.end(), code) !=
                    train.country_codes.end())
                    keep.push_back(r);
            }
            if (keep.empty()) continue;

            ModelSpec spec{family, trial.params, infoset, mix_seed(seed, idx)};
            FittedModel model = fit_model(spec, train, taxonomy, 1);

            DesignMatrix rows;
            rows.feature_names = probe.feature_names;
            rows.country_codes = probe.country_codes;
            rows.target_lead = probe.target_lead;
            rows.x.resize(static_cast<Eigen::Index>(keep.size()), probe.cols());
            rows.y.resize(static_cast<Eigen::Index>(keep.size()));
            for (std::size_t i = 0; i < keep.size(); ++i) {
                rows.x.row(static_cast<Eigen::Index>(i)) = probe.x.row(keep[i]);
                rows.y(static_cast<Eigen::Index>(i)) = probe.y(keep[i]);
                rows.country.push_back(probe.country[static_cast<std::size_t>(keep[i])]);
                rows.feature_date.push_back(probe.feature_date[static_cast<std::size_t>(keep[i])]);
            }
            const Eigen::VectorXd yhat = predict(model, rows);
            double fold = 0.0;
            for (Eigen::Index r = 0; r < rows.rows(); ++r) {
                const double e = rows.y(r) - yhat(r);
                fold += opts.metric == TuneOptions::FoldMetric::MAE ? std::abs(e) : e * e;
            }
            fold /= static_cast<double>(rows.rows());
            if (opts.metric == TuneOptions::FoldMetric::RMSE) fold = std::sqrt(fold);
            total += fold;
            ++folds_used;
        }
        if (folds_used > 0) {
            trial.valid = true;
            trial.score = total / folds_used;
        }
    });

    for (std::size_t i = 0; i < result.trials.size(); ++i) {
        const auto& t = result.trials[i];
        if (!t.valid) continue;
        if (result.best_index < 0 || t.score < result.trials[static_cast<std::size_t>(result.best_index)].score)
            result.best_index = static_cast<int>(i);
    }
    if (result.best_index < 0) throw NumericError("tune: no valid candidate");
    result.best = result.trials[static_cast<std::size_t>(result.best_index)].params;
    return result;
}

}  // namespace riskpanel
