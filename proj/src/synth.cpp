#include "riskpanel/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "riskpanel/csv.hpp"
#include "riskpanel/errors.hpp"
#include "riskpanel/util.hpp"

namespace riskpanel {

namespace {

// Stationary AR(1) path with unit-free shocks.
std::vector<double> ar1_path(int n, double persistence, double vol, std::mt19937_64& rng) {
    std::normal_distribution<double> shock(0.0, 1.0);
    std::vector<double> path(static_cast<std::size_t>(n));
    const double stationary_sd = vol / std::sqrt(1.0 - persistence * persistence);
    path[0] = stationary_sd * shock(rng);
    for (int t = 1; t < n; ++t)
        path[static_cast<std::size_t>(t)] =
            persistence * path[static_cast<std::size_t>(t - 1)] + vol * shock(rng);
    return path;
}

const std::vector<std::pair<Variable, double>>& news_loadings() {
    static const std::vector<std::pair<Variable, double>> loadings = {
        {Variable::Gpr, 0.8}, {Variable::Epu, 0.6}, {Variable::Tpu, 0.3},
        {Variable::Eco, 0.9}, {Variable::Int, 0.7}, {Variable::Pol, 0.2},
    };
    return loadings;
}

}  // namespace

SynthResult generate(const DGPSpec& spec) {
    if (spec.n_countries < 1 || spec.n_countries > 42)
        throw ValidationError("generate: n_countries must be in [1, 42]");
    if (spec.end <= spec.start) throw ValidationError("generate: empty span");
    if (std::abs(spec.factor_persistence) >= 1.0 || std::abs(spec.news_persistence) >= 1.0)
        throw ValidationError("generate: persistence must lie in (-1, 1)");
    if (spec.vix_quantile <= 0.0 || spec.vix_quantile >= 1.0)
        throw ValidationError("generate: vix_quantile must lie in (0, 1)");

    const int n_days = spec.end - spec.start + 1;
    const Taxonomy taxonomy = Taxonomy::builtin();
    const auto codes_all = Taxonomy::region_interleaved_codes();
    std::vector<std::string> codes(codes_all.begin(), codes_all.begin() + spec.n_countries);

    // Global push factors.
    std::mt19937_64 global_rng(mix_seed(spec.seed, 0));
    const auto fed = ar1_path(n_days, spec.factor_persistence, spec.factor_vol, global_rng);
    const auto vix = ar1_path(n_days, spec.factor_persistence, spec.factor_vol, global_rng);
    const double vix_cut = quantile(vix, spec.vix_quantile);

    SynthResult out;
    Series fed_series{kGlobalCountry, Variable::Fed, {}};
    Series vix_series{kGlobalCountry, Variable::Vix, {}};
    for (int t = 0; t < n_days; ++t) {
        fed_series.obs.push_back({spec.start + t, fed[static_cast<std::size_t>(t)]});
        vix_series.obs.push_back({spec.start + t, vix[static_cast<std::size_t>(t)]});
    }
    out.panel.add_series(std::move(fed_series));
    out.panel.add_series(std::move(vix_series));

    for (int c = 0; c < spec.n_countries; ++c) {
        const std::string& code = codes[static_cast<std::size_t>(c)];
        const Region region = taxonomy.region_of(code);
        const auto [load_fed, load_vix] = spec.region_loadings.at(region);

        std::mt19937_64 country_rng(mix_seed(spec.seed, 1000 + static_cast<std::uint64_t>(c)));
        std::uniform_int_distribution<int> lag_dist(0, std::max(0, spec.max_start_lag));
        const int start_lag = spec.max_start_lag > 0 ? lag_dist(country_rng) : 0;
        std::normal_distribution<double> noise(0.0, 1.0);
        std::uniform_real_distribution<double> unit(0.0, 1.0);

        std::map<Variable, std::vector<double>> news;
        for (const auto& [var, load] : news_loadings()) {
            (void)load;
            news[var] = ar1_path(n_days, spec.news_persistence, spec.news_vol, country_rng);
        }

        std::map<Variable, Series> series;
        for (const auto& [var, path] : news) series[var] = Series{code, var, {}};
        Series cds{code, Variable::Cds, {}};

        for (int t = start_lag; t < n_days; ++t) {
            const Date date = spec.start + t;
            const auto ti = static_cast<std::size_t>(t);
            const bool drop = spec.missing_rate > 0.0 && unit(country_rng) < spec.missing_rate;

            const double global_part = load_fed * fed[ti] + load_vix * vix[ti];
            double news_part = 0.0;
            for (const auto& [var, load] : news_loadings())
                news_part += spec.news_strength * load * news[var][ti];
            const double threshold_part =
                vix[ti] > vix_cut ? spec.threshold_coef * news[Variable::Gpr][ti] : 0.0;
            const double interaction_part = spec.interaction_coef * fed[ti] * vix[ti];
            const double noise_part = spec.noise_sd * noise(country_rng);
            const double value =
                global_part + news_part + threshold_part + interaction_part + noise_part;

            if (drop) continue;
            for (auto& [var, s] : series) s.obs.push_back({date, news[var][ti]});
            cds.obs.push_back({date, value});
            out.truth.push_back({code, date, "global", global_part});
            out.truth.push_back({code, date, "news", news_part});
            out.truth.push_back({code, date, "threshold", threshold_part});
            out.truth.push_back({code, date, "interaction", interaction_part});
            out.truth.push_back({code, date, "noise", noise_part});
        }
        for (auto& [var, s] : series)
            if (!s.empty()) out.panel.add_series(std::move(s));
        if (!cds.empty()) out.panel.add_series(std::move(cds));
    }
    out.panel.finalize();
    return out;
}

void save_truth(const std::vector<TruthRow>& truth, const std::string& path) {
    CsvWriter out(path);
    out.row({"country", "date", "component", "value"});
    for (const auto& row : truth)
        out.row({row.country, row.date.to_string(), row.component, format_double(row.value)});
}

double brute_coalition_value(const Tree& tree, std::span<const double> x,
                             unsigned long subset_mask) {
    // Recursive cover-weighted descent; features in the mask follow x.
    struct Walker {
        const Tree& tree;
        std::span<const double> x;
        unsigned long mask;

        double walk(int index) const {
            const TreeNode& node = tree.nodes[static_cast<std::size_t>(index)];
            if (node.feature < 0) return node.value;
            if (mask & (1ul << node.feature))
                return walk(x[static_cast<std::size_t>(node.feature)] < node.threshold ? node.left
                                                                                       : node.right);
            const TreeNode& left = tree.nodes[static_cast<std::size_t>(node.left)];
            const TreeNode& right = tree.nodes[static_cast<std::size_t>(node.right)];
            return (left.cover * walk(node.left) + right.cover * walk(node.right)) / node.cover;
        }
    };
    return Walker{tree, x, subset_mask}.walk(0);
}

Eigen::VectorXd brute_shapley(const Tree& tree, std::span<const double> x, int n_features) {
    if (n_features > 12) throw ValidationError("brute_shapley: more than 12 features");
    if (n_features < 1) throw ValidationError("brute_shapley: need at least one feature");

    const unsigned long n_subsets = 1ul << n_features;
    std::vector<double> value(n_subsets);
    for (unsigned long s = 0; s < n_subsets; ++s) value[s] = brute_coalition_value(tree, x, s);

    std::vector<double> fact(static_cast<std::size_t>(n_features) + 1, 1.0);
    for (int i = 1; i <= n_features; ++i)
        fact[static_cast<std::size_t>(i)] = fact[static_cast<std::size_t>(i - 1)] * i;

    Eigen::VectorXd phi = Eigen::VectorXd::Zero(n_features);
    for (int i = 0; i < n_features; ++i) {
        for (unsigned long s = 0; s < n_subsets; ++s) {
            if (s & (1ul << i)) continue;
            const int size = __builtin_popcountl(s);
            const double weight = fact[static_cast<std::size_t>(size)] *
                                  fact[static_cast<std::size_t>(n_features - size - 1)] /
                                  fact[static_cast<std::size_t>(n_features)];
            phi(i) += weight * (value[s | (1ul << i)] - value[s]);
        }
    }
    return phi;
}

Eigen::MatrixXd brute_gfevd(const std::vector<Eigen::MatrixXd>& coef, const Eigen::MatrixXd& sigma,
                            int horizon) {
    const int k = static_cast<int>(sigma.rows());
    const int p = static_cast<int>(coef.size());
    if (k > 4) throw ValidationError("brute_gfevd: k must be <= 4");
    if (horizon > 20 || horizon < 1) throw ValidationError("brute_gfevd: horizon must be in [1, 20]");

    // Plain-array MA recursion with explicit loops.
    std::vector<std::vector<std::vector<double>>> psi(
        static_cast<std::size_t>(horizon),
        std::vector<std::vector<double>>(static_cast<std::size_t>(k),
                                         std::vector<double>(static_cast<std::size_t>(k), 0.0)));
    for (int i = 0; i < k; ++i) psi[0][static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1.0;
    for (int ell = 1; ell < horizon; ++ell) {
        for (int i = 0; i < k; ++i) {
            for (int j = 0; j < k; ++j) {
                double acc = 0.0;
                for (int lag = 1; lag <= std::min(ell, p); ++lag)
                    for (int mth = 0; mth < k; ++mth)
                        acc += coef[static_cast<std::size_t>(lag - 1)](i, mth) *
                               psi[static_cast<std::size_t>(ell - lag)][static_cast<std::size_t>(mth)]
                                  [static_cast<std::size_t>(j)];
                psi[static_cast<std::size_t>(ell)][static_cast<std::size_t>(i)]
                   [static_cast<std::size_t>(j)] = acc;
            }
        }
    }

    const double lambda = 1e-8 * sigma.trace() / static_cast<double>(k);
    std::vector<std::vector<double>> sig(static_cast<std::size_t>(k),
                                         std::vector<double>(static_cast<std::size_t>(k), 0.0));
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            sig[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                sigma(i, j) + (i == j ? lambda : 0.0);

    Eigen::MatrixXd theta(k, k);
    for (int i = 0; i < k; ++i) {
        double denom = 0.0;
        for (int ell = 0; ell < horizon; ++ell) {
            // (Psi_ell Sigma Psi_ell')_{ii}
            for (int a = 0; a < k; ++a)
                for (int b = 0; b < k; ++b)
                    denom += psi[static_cast<std::size_t>(ell)][static_cast<std::size_t>(i)]
                                [static_cast<std::size_t>(a)] *
                             sig[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] *
                             psi[static_cast<std::size_t>(ell)][static_cast<std::size_t>(i)]
                                [static_cast<std::size_t>(b)];
        }
        for (int j = 0; j < k; ++j) {
            double num = 0.0;
            for (int ell = 0; ell < horizon; ++ell) {
                double impact = 0.0;
                for (int a = 0; a < k; ++a)
                    impact += psi[static_cast<std::size_t>(ell)][static_cast<std::size_t>(i)]
                                 [static_cast<std::size_t>(a)] *
                              sig[static_cast<std::size_t>(a)][static_cast<std::size_t>(j)];
                num += impact * impact;
            }
            theta(i, j) = num / denom;
        }
    }
    for (int i = 0; i < k; ++i) {
        double row_sum = 0.0;
        for (int j = 0; j < k; ++j) row_sum += theta(i, j);
        for (int j = 0; j < k; ++j) theta(i, j) /= row_sum;
    }
    return theta;
}

}  // namespace riskpanel
