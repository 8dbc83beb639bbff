#include "riskpanel/runs.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "riskpanel/attribution.hpp"
#include "riskpanel/connect.hpp"
#include "riskpanel/csv.hpp"
#include "riskpanel/errors.hpp"
#include "riskpanel/harness.hpp"
#include "riskpanel/svg.hpp"
#include "riskpanel/synth.hpp"
#include "riskpanel/util.hpp"

namespace riskpanel {

namespace fs = std::filesystem;
using nlohmann::json;

std::string RunConfig::get(const std::string& key, const std::string& fallback) const {
    auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
}

std::string RunConfig::require(const std::string& key) const {
    auto it = kv.find(key);
    if (it == kv.end()) throw ValidationError("missing required config key: " + key);
    return it->second;
}

double RunConfig::number(const std::string& key, double fallback) const {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    try {
        return std::stod(it->second);
    } catch (const std::exception&) {
        throw ValidationError("config key " + key + ": bad number '" + it->second + "'");
    }
}

int RunConfig::integer(const std::string& key, int fallback) const {
    return static_cast<int>(number(key, fallback));
}

bool RunConfig::flag(const std::string& key, bool fallback) const {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    if (it->second == "true" || it->second == "1" || it->second == "yes") return true;
    if (it->second == "false" || it->second == "0" || it->second == "no") return false;
    throw ValidationError("config key " + key + ": bad boolean '" + it->second + "'");
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file: " + path);
    RunConfig config;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError(path + ":" + std::to_string(lineno) + ": expected key = value");
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        config.kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return config;
}

void apply_overrides(RunConfig& config, const std::vector<std::string>& pairs) {
    for (const auto& pair : pairs) {
        const auto eq = pair.find('=');
        if (eq == std::string::npos)
            throw ValidationError("override must be key=value, got '" + pair + "'");
        config.kv[pair.substr(0, eq)] = pair.substr(eq + 1);
    }
}

std::uint64_t config_hash(const RunConfig& config) {
    std::string blob;
    for (const auto& [k, v] : config.kv) {
        if (k == "out") continue;  // replay may redirect outputs
        blob += k + "=" + v + "\n";
    }
    return fnv1a(blob);
}

namespace {

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string resolve_out_dir(const std::string& command, RunConfig& config) {
    std::string out = config.get("out");
    if (out.empty()) {
        const auto now = std::chrono::system_clock::now().time_since_epoch();
        const auto secs = std::chrono::duration_cast<std::chrono::seconds>(now).count();
        out = "runs/" + command + "-" + std::to_string(secs) + "-" +
              hex64(config_hash(config)).substr(0, 8);
        config.set("out", out);
    }
    fs::create_directories(out);
    return out;
}

void write_manifest(const std::string& command, const RunConfig& config, const std::string& out_dir,
                    const std::map<std::string, std::string>& input_files) {
    json j;
    j["tool"] = "riskpanel";
    j["version"] = "0.1.0";
    j["command"] = command;
    j["config"] = config.kv;
    j["config_hash"] = hex64(config_hash(config));
    json inputs = json::object();
    for (const auto& [name, path] : input_files)
        inputs[name] = {{"path", path}, {"fnv64", hex64(fnv1a_file(path))}};
    j["inputs"] = inputs;
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    j["created_unix"] = std::chrono::duration_cast<std::chrono::seconds>(now).count();
    std::ofstream out(out_dir + "/manifest.json");
    out << j.dump(2) << "\n";
}

PreprocessedPanel load_and_preprocess(const RunConfig& config,
                                      std::map<std::string, std::string>& inputs) {
    const std::string panel_path = config.require("panel");
    const std::string regions = config.get("regions");
    inputs["panel"] = panel_path;
    if (!regions.empty()) inputs["regions"] = regions;
    Panel panel = load_panel(panel_path, regions);
    PreprocessPolicy policy;
    policy.ma_window = config.integer("preprocess.ma_window", 28);
    policy.standardize = config.flag("preprocess.standardize", true);
    const std::string scope = config.get("preprocess.scope", "full");
    if (scope == "train") {
        policy.scope = PreprocessPolicy::Scope::TrainOnly;
        policy.train_cutoff = Date::parse(config.require("preprocess.train_cutoff"));
    } else if (scope != "full") {
        throw ValidationError("preprocess.scope must be full or train");
    }
    return preprocess(panel, policy);
}

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= csv.size()) {
        const auto pos = csv.find(',', start);
        std::string item = csv.substr(start, pos == std::string::npos ? pos : pos - start);
        if (!item.empty()) out.push_back(item);
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

Hyperparams resolved_params(const RunConfig& config, ModelFamily family, InfoSet infoset) {
    Hyperparams params;
    const std::string file = config.get("hyperparams");
    if (!file.empty()) params = hyperparams_from_file(file, family, infoset);
    // `params.<family>.<name>` keys override file/built-in values.
    const std::string prefix = "params." + to_string(family) + ".";
    for (const auto& [key, value] : config.kv) {
        if (key.rfind(prefix, 0) == 0) {
            try {
                params[key.substr(prefix.size())] = std::stod(value);
            } catch (const std::exception&) {
                throw ValidationError("config key " + key + ": bad number '" + value + "'");
            }
        }
    }
    validate_hyperparams(family, params);
    return params;
}

// ---- synth ------------------------------------------------------------------

int cmd_synth(RunConfig& config) {
    const std::string out_dir = resolve_out_dir("synth", config);
    DGPSpec spec;
    spec.n_countries = config.integer("synth.countries", 42);
    if (config.has("synth.start")) spec.start = Date::parse(config.get("synth.start"));
    if (config.has("synth.end")) spec.end = Date::parse(config.get("synth.end"));
    spec.seed = static_cast<std::uint64_t>(config.number("seed", 1));
    spec.factor_persistence = config.number("synth.factor_persistence", spec.factor_persistence);
    spec.factor_vol = config.number("synth.factor_vol", spec.factor_vol);
    spec.news_persistence = config.number("synth.news_persistence", spec.news_persistence);
    spec.news_vol = config.number("synth.news_vol", spec.news_vol);
    spec.news_strength = config.number("synth.news_strength", spec.news_strength);
    spec.threshold_coef = config.number("synth.threshold_coef", spec.threshold_coef);
    spec.vix_quantile = config.number("synth.vix_quantile", spec.vix_quantile);
    spec.interaction_coef = config.number("synth.interaction_coef", spec.interaction_coef);
    spec.noise_sd = config.number("synth.noise_sd", spec.noise_sd);
    spec.missing_rate = config.number("synth.missing_rate", spec.missing_rate);
    spec.max_start_lag = config.integer("synth.max_start_lag", spec.max_start_lag);

    const SynthResult result = generate(spec);
    save_panel(result.panel, out_dir + "/panel.csv");
    save_truth(result.truth, out_dir + "/truth.csv");
    write_manifest("synth", config, out_dir, {});
    std::printf("synth: %zu series -> %s\n", result.panel.series().size(), out_dir.c_str());
    return 0;
}

// ---- preprocess ---------------------------------------------------------------

int cmd_preprocess(RunConfig& config) {
    const std::string out_dir = resolve_out_dir("preprocess", config);
    std::map<std::string, std::string> inputs;
    const PreprocessedPanel processed = load_and_preprocess(config, inputs);
    save_panel(processed.panel, out_dir + "/processed.csv");
    CsvWriter stats(out_dir + "/stats.csv");
    stats.row({"country", "variable", "mean", "sd"});
    for (const auto& [key, ms] : processed.stats)
        stats.row({key.first, to_string(key.second), format_double(ms.first),
                   format_double(ms.second)});
    CsvWriter dropped(out_dir + "/dropped.csv");
    dropped.row({"series"});
    for (const auto& name : processed.dropped) dropped.row({name});
    write_manifest("preprocess", config, out_dir, inputs);
    std::printf("preprocess: %zu series kept, %zu dropped -> %s\n",
                processed.panel.series().size(), processed.dropped.size(), out_dir.c_str());
    return 0;
}

// ---- horserace ---------------------------------------------------------------

int cmd_horserace(RunConfig& config) {
    const std::string out_dir = resolve_out_dir("horserace", config);
    std::map<std::string, std::string> inputs;
    const PreprocessedPanel processed = load_and_preprocess(config, inputs);
    if (config.has("hyperparams")) inputs["hyperparams"] = config.get("hyperparams");

    std::vector<ModelFamily> families;
    const std::string fam_list = config.get("families", "all");
    if (fam_list == "all") {
        families = all_families();
    } else {
        for (const auto& name : split_list(fam_list)) families.push_back(parse_family(name));
    }
    std::vector<InfoSet> infosets;
    for (const auto& name : split_list(config.get("infosets", "markets,markets_news")))
        infosets.push_back(parse_infoset(name));

    const auto seed = static_cast<std::uint64_t>(config.number("seed", 42));
    std::vector<ModelSpec> specs;
    for (ModelFamily family : families)
        for (InfoSet infoset : infosets)
            specs.push_back({family, resolved_params(config, family, infoset), infoset,
                             mix_seed(seed, specs.size())});

    BacktestPlan plan;
    plan.first_origin = Date::parse(config.require("plan.first_origin"));
    plan.last_origin = Date::parse(config.require("plan.last_origin"));
    plan.refit_every = config.integer("plan.refit_every", 7);
    plan.buffer = config.integer("plan.buffer", 28);

    BacktestOptions opts;
    opts.jobs = config.integer("jobs", 0);
    const ForecastLedger ledger = run_backtest(processed, specs, plan, opts);
    save_ledger(ledger, out_dir + "/ledger.csv");

    CsvWriter fps(out_dir + "/fingerprints.csv");
    fps.row({"family", "infoset", "refit_origin", "rows", "max_feature_date", "max_access_date",
             "feature_hash", "seed"});
    for (const auto& fp : ledger.fingerprints)
        fps.row({to_string(fp.family), to_string(fp.infoset), fp.refit_origin.to_string(),
                 std::to_string(fp.fingerprint.row_count),
                 fp.fingerprint.max_feature_date.to_string(),
                 fp.fingerprint.max_access_date.to_string(), hex64(fp.fingerprint.feature_hash),
                 std::to_string(fp.fingerprint.seed)});
    CsvWriter skips(out_dir + "/skips.csv");
    skips.row({"origin", "family", "infoset", "reason"});
    for (const auto& s : ledger.skips)
        skips.row({s.origin.to_string(), to_string(s.family), to_string(s.infoset), s.reason});

    const MetricsTable metrics = score(ledger, processed.panel.taxonomy());
    save_metrics(metrics, out_dir + "/metrics.csv");

    const bool both = std::count(infosets.begin(), infosets.end(), InfoSet::MarketsOnly) &&
                      std::count(infosets.begin(), infosets.end(), InfoSet::MarketsPlusNews);
    if (both) {
        const IncrementTable increments = news_increment(metrics, metrics);
        save_increments(increments, out_dir + "/increments.csv");
        // Pooled Table-1-shaped comparison.
        CsvWriter t1(out_dir + "/table1.csv");
        t1.row({"family", "rmse_markets", "mae_markets", "rmse_news", "mae_news", "rmse_diff",
                "rmse_pct", "mae_diff", "mae_pct"});
        for (ModelFamily family : families) {
            const auto* mkt = metrics.find(family, InfoSet::MarketsOnly, AggLevel::Pooled);
            const auto* news = metrics.find(family, InfoSet::MarketsPlusNews, AggLevel::Pooled);
            if (!mkt || !news) continue;
            t1.row({to_string(family), format_double(mkt->rmse), format_double(mkt->mae),
                    format_double(news->rmse), format_double(news->mae),
                    format_double(news->rmse - mkt->rmse),
                    format_double(mkt->rmse != 0 ? 100.0 * (news->rmse - mkt->rmse) / mkt->rmse : 0),
                    format_double(news->mae - mkt->mae),
                    format_double(mkt->mae != 0 ? 100.0 * (news->mae - mkt->mae) / mkt->mae : 0)});
        }
    }
    write_manifest("horserace", config, out_dir, inputs);
    std::printf("horserace: %zu records, %zu skips -> %s\n", ledger.records.size(),
                ledger.skips.size(), out_dir.c_str());
    return 0;
}

// ---- explain -------------------------------------------------------------------

int cmd_explain(RunConfig& config) {
    const std::string out_dir = resolve_out_dir("explain", config);
    std::map<std::string, std::string> inputs;
    const PreprocessedPanel processed = load_and_preprocess(config, inputs);
    if (config.has("hyperparams")) inputs["hyperparams"] = config.get("hyperparams");

    const ModelFamily family = parse_family(config.require("model.family"));
    if (!is_tree_family(family))
        throw ValidationError("explain: model.family must be a tree ensemble");
    const InfoSet infoset = parse_infoset(config.get("model.infoset", "markets_news"));
    const auto seed = static_cast<std::uint64_t>(config.number("seed", 42));
    const ModelSpec spec{family, resolved_params(config, family, infoset), infoset, seed};

    // The frozen specification re-applied to contemporaneous targets.
    DesignOptions dopts;
    dopts.target = DesignOptions::Target::SameDay;
    DesignMatrix design = build_design(processed.panel, infoset, dopts);
    if (design.rows() == 0) throw ValidationError("explain: empty design");

    const int stride = std::max(1, config.integer("explain.stride", 1));
    if (stride > 1) {
        std::vector<Eigen::Index> keep;
        for (Eigen::Index r = 0; r < design.rows(); r += stride) keep.push_back(r);
        DesignMatrix thin;
        thin.feature_names = design.feature_names;
        thin.country_codes = design.country_codes;
        thin.target_lead = design.target_lead;
        thin.x.resize(static_cast<Eigen::Index>(keep.size()), design.cols());
        thin.y.resize(static_cast<Eigen::Index>(keep.size()));
        for (std::size_t i = 0; i < keep.size(); ++i) {
            thin.x.row(static_cast<Eigen::Index>(i)) = design.x.row(keep[i]);
            thin.y(static_cast<Eigen::Index>(i)) = design.y(keep[i]);
            thin.country.push_back(design.country[static_cast<std::size_t>(keep[i])]);
            thin.feature_date.push_back(design.feature_date[static_cast<std::size_t>(keep[i])]);
        }
        design = std::move(thin);
    }

    const int jobs = config.integer("jobs", 0);
    const FittedModel model = fit_model(spec, design, processed.panel.taxonomy(), jobs);
    save_model(model, out_dir + "/model.json");

    AttributionOptions aopts;
    aopts.interactions = config.flag("explain.interactions", false);
    aopts.jobs = jobs;
    const AttributionCube cube = tree_shap(model, design, aopts);
    save_cube(cube, out_dir + "/cube.csv",
              aopts.interactions ? out_dir + "/interactions.csv" : "");

    const ImportanceSummary importance = summarize_importance(cube, processed.panel.taxonomy());
    CsvWriter imp(out_dir + "/importance.csv");
    imp.row({"level", "unit", "feature", "mean_abs_phi"});
    for (std::size_t j = 0; j < importance.features.size(); ++j)
        imp.row({"global", "", importance.features[j],
                 format_double(importance.global(static_cast<Eigen::Index>(j)))});
    for (const auto& [region, v] : importance.by_region)
        for (std::size_t j = 0; j < importance.features.size(); ++j)
            imp.row({"region", to_string(region), importance.features[j],
                     format_double(v(static_cast<Eigen::Index>(j)))});
    for (const auto& [code, v] : importance.by_country)
        for (std::size_t j = 0; j < importance.features.size(); ++j)
            imp.row({"country", code, importance.features[j],
                     format_double(v(static_cast<Eigen::Index>(j)))});

    if (aopts.interactions) {
        for (const auto& key : split_list(config.get("explain.heatmap_keys", "FED,VIX"))) {
            const InteractionHeatmap heat = interaction_heatmap(cube, key, processed.panel.taxonomy());
            CsvWriter hm(out_dir + "/heatmap_" + key + ".csv");
            std::vector<std::string> header = {"country"};
            header.insert(header.end(), heat.features.begin(), heat.features.end());
            hm.row(header);
            for (std::size_t i = 0; i < heat.countries.size(); ++i) {
                std::vector<std::string> row = {heat.countries[i]};
                for (Eigen::Index c = 0; c < heat.values.cols(); ++c)
                    row.push_back(format_double(heat.values(static_cast<Eigen::Index>(i), c)));
                hm.row(row);
            }
            if (config.flag("explain.svg", true))
                svg_heatmap(heat.values, heat.countries, heat.features,
                            "mean |interaction| with " + key, out_dir + "/heatmap_" + key + ".svg");
        }
    }

    // Dependence curves: per feature, global and by region.
    const double frac = config.number("explain.loess_frac", 0.4);
    const int robust = config.integer("explain.loess_robust_iters", 1);
    CsvWriter dep(out_dir + "/dependence.csv");
    dep.row({"feature", "scope", "x", "phi_fit", "clip_lo", "clip_hi"});
    for (std::size_t j = 0; j < design.feature_names.size(); ++j) {
        const auto& feature = design.feature_names[j];
        auto fit_scope = [&](const std::string& scope, const std::vector<char>& mask) {
            std::vector<double> xs, ys;
            for (std::size_t r = 0; r < cube.rows.size(); ++r) {
                if (!mask.empty() && !mask[r]) continue;
                xs.push_back(design.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)));
                ys.push_back(cube.rows[r].phi(static_cast<Eigen::Index>(j)));
            }
            if (xs.size() < 16) return;
            // Deterministic thinning keeps the smoother O(n^2) cost in check.
            if (xs.size() > 4000) {
                const std::size_t step = (xs.size() + 3999) / 4000;
                std::vector<double> tx, ty;
                for (std::size_t i = 0; i < xs.size(); i += step) {
                    tx.push_back(xs[i]);
                    ty.push_back(ys[i]);
                }
                xs = std::move(tx);
                ys = std::move(ty);
            }
            const LoessCurve curve = loess(xs, ys, frac, robust);
            for (std::size_t g = 0; g < curve.grid.size(); ++g)
                dep.row({feature, scope, format_double(curve.grid[g]),
                         format_double(curve.fitted[g]), format_double(curve.clip_lo),
                         format_double(curve.clip_hi)});
            if (config.flag("explain.svg", true)) {
                SvgSeries s{scope, curve.grid, curve.fitted, false};
                svg_line_chart({s}, feature + " dependence (" + scope + ")",
                               out_dir + "/dependence_" + feature + "_" + scope + ".svg");
            }
        };
        fit_scope("all", {});
        for (Region region : {Region::AdvancedEconomies, Region::EMAsia, Region::EMLatam,
                              Region::EMEurope, Region::EMMENA}) {
            std::vector<char> mask(cube.rows.size(), 0);
            bool any = false;
            for (std::size_t r = 0; r < cube.rows.size(); ++r) {
                if (processed.panel.taxonomy().region_of(cube.rows[r].country) == region) {
                    mask[r] = 1;
                    any = true;
                }
            }
            if (any) fit_scope(to_string(region), mask);
        }
    }

    write_manifest("explain", config, out_dir, inputs);
    std::printf("explain: %zu attributed rows -> %s\n", cube.rows.size(), out_dir.c_str());
    return 0;
}

// ---- connect -------------------------------------------------------------------

int cmd_connect(RunConfig& config) {
    const std::string out_dir = resolve_out_dir("connect", config);
    std::map<std::string, std::string> inputs;
    const std::string cube_path = config.require("cube");
    inputs["cube"] = cube_path;
    const AttributionCube cube = load_cube(cube_path);

    std::vector<std::string> features;
    const std::string requested = config.get("features");
    if (requested.empty()) {
        for (const auto& name : cube.feature_names)
            if (name != "country") features.push_back(name);
    } else {
        features = split_list(requested);
    }

    WindowPlan plan;
    Date lo = cube.rows.empty() ? Date(0) : cube.rows.front().date;
    Date hi = lo;
    for (const auto& row : cube.rows) {
        lo = std::min(lo, row.date);
        hi = std::max(hi, row.date);
    }
    plan.first_center = config.has("window.first_center")
                            ? Date::parse(config.get("window.first_center"))
                            : lo;
    plan.last_center =
        config.has("window.last_center") ? Date::parse(config.get("window.last_center")) : hi;
    plan.step_days = config.integer("window.step", 7);
    plan.probe_half_width = config.integer("window.probe_half_width", 180);
    plan.coverage_threshold = config.number("window.coverage", 0.70);
    plan.h_min = config.integer("window.h_min", 60);
    plan.h_max = config.integer("window.h_max", 180);
    plan.target_lag = config.integer("window.target_lag", 3);
    plan.n_max = config.integer("window.n_max", 10);
    plan.interp_max_gap = config.integer("window.interp_max_gap", 7);
    plan.p_max = config.integer("window.p_max", 4);
    plan.horizon = config.integer("connect.horizon", 10);
    plan.density_tau = config.number("connect.tau", 0.40);

    const SpilloverSeries series =
        rolling_connectedness(cube, features, plan, config.integer("jobs", 0));
    save_spillovers(series, out_dir + "/spillovers.csv");

    if (config.flag("connect.svg", true)) {
        for (const auto& feature : features) {
            SvgSeries dy{"S_dy", {}, {}, false}, dens{"density", {}, {}, false};
            for (const auto& p : series.points) {
                if (p.feature != feature || !p.computed) continue;
                dy.x.push_back(p.center.days());
                dy.y.push_back(p.s_dy);
                dens.x.push_back(p.center.days());
                dens.y.push_back(p.density);
            }
            if (!dy.x.empty())
                svg_line_chart({dy, dens}, feature + " spillover and density",
                               out_dir + "/spillover_" + feature + ".svg");
        }
    }
    write_manifest("connect", config, out_dir, inputs);
    std::size_t computed = 0;
    for (const auto& p : series.points) computed += p.computed ? 1 : 0;
    std::printf("connect: %zu/%zu windows computed -> %s\n", computed, series.points.size(),
                out_dir.c_str());
    return 0;
}

// ---- report --------------------------------------------------------------------

int cmd_report(RunConfig& config) {
    const std::string out_dir = resolve_out_dir("report", config);
    std::map<std::string, std::string> inputs;
    const std::string ledger_path = config.require("report.ledger");
    inputs["ledger"] = ledger_path;
    const std::string regions = config.get("regions");
    const Taxonomy taxonomy =
        regions.empty() ? Taxonomy::builtin() : Taxonomy::builtin_with_sidecar(regions);

    const ForecastLedger ledger = load_ledger(ledger_path);
    const MetricsTable metrics = score(ledger, taxonomy);
    save_metrics(metrics, out_dir + "/metrics.csv");

    bool has_mkt = false, has_news = false;
    for (const auto& r : ledger.records) {
        has_mkt |= r.infoset == InfoSet::MarketsOnly;
        has_news |= r.infoset == InfoSet::MarketsPlusNews;
    }
    if (has_mkt && has_news)
        save_increments(news_increment(metrics, metrics), out_dir + "/increments.csv");

    if (config.flag("report.svg", true)) {
        SvgSeries mae_mkt{"mae markets", {}, {}, true}, mae_news{"mae markets_news", {}, {}, true};
        double idx = 0;
        for (ModelFamily family : all_families()) {
            const auto* mkt = metrics.find(family, InfoSet::MarketsOnly, AggLevel::Pooled);
            const auto* news = metrics.find(family, InfoSet::MarketsPlusNews, AggLevel::Pooled);
            if (mkt) {
                mae_mkt.x.push_back(idx);
                mae_mkt.y.push_back(mkt->mae);
            }
            if (news) {
                mae_news.x.push_back(idx);
                mae_news.y.push_back(news->mae);
            }
            idx += 1.0;
        }
        svg_line_chart({mae_mkt, mae_news}, "pooled MAE by family", out_dir + "/metrics.svg");
    }
    write_manifest("report", config, out_dir, inputs);
    std::printf("report -> %s\n", out_dir.c_str());
    return 0;
}

}  // namespace

int run_command(const std::string& command, RunConfig config) {
    try {
        if (command == "synth") return cmd_synth(config);
        if (command == "preprocess") return cmd_preprocess(config);
        if (command == "horserace") return cmd_horserace(config);
        if (command == "explain") return cmd_explain(config);
        if (command == "connect") return cmd_connect(config);
        if (command == "report") return cmd_report(config);
        std::fprintf(stderr, "unknown command: %s\n", command.c_str());
        return 1;
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const NumericError& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return 3;
    }
}

int replay_manifest(const std::string& manifest_path, const std::string& out_override) {
    json j;
    {
        std::ifstream in(manifest_path);
        if (!in) {
            std::fprintf(stderr, "error: cannot open manifest %s\n", manifest_path.c_str());
            return 2;
        }
        try {
            in >> j;
        } catch (const json::exception& e) {
            std::fprintf(stderr, "error: bad manifest: %s\n", e.what());
            return 2;
        }
    }
    RunConfig config;
    for (const auto& [key, value] : j["config"].items()) config.kv[key] = value.get<std::string>();
    if (!out_override.empty()) config.set("out", out_override);
    return run_command(j["command"].get<std::string>(), config);
}

}  // namespace riskpanel
