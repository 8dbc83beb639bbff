#include "riskpanel/attribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "riskpanel/csv.hpp"
#include "riskpanel/errors.hpp"
#include "riskpanel/util.hpp"

namespace riskpanel {

namespace {

// Per-row engine shared by every ensemble shape: accumulates scaled per-tree
// attributions into one row.
struct RowAccumulator {
    Eigen::VectorXd phi;
    Eigen::MatrixXd interactions;
    double base = 0.0;

    explicit RowAccumulator(int n_features, bool with_interactions)
        : phi(Eigen::VectorXd::Zero(n_features)),
          interactions(with_interactions ? Eigen::MatrixXd::Zero(n_features, n_features)
                                         : Eigen::MatrixXd()) {}

    void add_tree(const Tree& tree, std::span<const double> x, double scale) {
        std::vector<double> buf(static_cast<std::size_t>(phi.size()), 0.0);
        base += scale * tree_shap_values(tree, x, buf);
        for (Eigen::Index j = 0; j < phi.size(); ++j) phi(j) += scale * buf[static_cast<std::size_t>(j)];
        if (interactions.size() > 0)
            interactions += scale * tree_shap_interactions(tree, x, static_cast<int>(phi.size()));
    }
};

}  // namespace

AttributionCube tree_shap(const FittedModel& m, const DesignMatrix& rows,
                          const AttributionOptions& opts) {
    if (!is_tree_family(m.family))
        throw ValidationError("tree_shap: family " + to_string(m.family) +
                              " is not a tree ensemble");
    if (rows.feature_names != m.feature_names)
        throw ValidationError("tree_shap: feature schema mismatch");

    AttributionCube cube;
    cube.feature_names = m.feature_names;
    cube.feature_names.push_back("country");
    cube.has_interactions = opts.interactions;
    const int n_features = static_cast<int>(cube.feature_names.size());

    std::vector<int> remap(rows.country_codes.size(), -1);
    for (std::size_t i = 0; i < rows.country_codes.size(); ++i) {
        auto it = std::find(m.country_codes.begin(), m.country_codes.end(), rows.country_codes[i]);
        if (it == m.country_codes.end())
            throw ValidationError("tree_shap: country " + rows.country_codes[i] +
                                  " not in training set");
        remap[i] = static_cast<int>(it - m.country_codes.begin());
    }

    cube.rows.resize(static_cast<std::size_t>(rows.rows()));
    parallel_for(static_cast<std::size_t>(rows.rows()), opts.jobs, [&](std::size_t r) {
        const auto ri = static_cast<Eigen::Index>(r);
        std::vector<double> x(static_cast<std::size_t>(n_features));
        for (Eigen::Index j = 0; j < rows.cols(); ++j) x[static_cast<std::size_t>(j)] = rows.x(ri, j);
        const int c = remap[static_cast<std::size_t>(rows.country[r])];
        x.back() = static_cast<double>(c);
        const std::span<const double> xs(x.data(), x.size());

        RowAccumulator acc(n_features, opts.interactions);
        double fx = 0.0;
        if (const auto* forest = std::get_if<Forest>(&m.impl)) {
            const double scale = 1.0 / static_cast<double>(forest->trees.size());
            for (const Tree& t : forest->trees) acc.add_tree(t, xs, scale);
            fx = forest->predict(xs);
        } else if (const auto* boosting = std::get_if<BoostingModel>(&m.impl)) {
            for (const Tree& t : boosting->trees) acc.add_tree(t, xs, boosting->learning_rate);
            acc.base += boosting->base;
            fx = boosting->predict(xs);
        } else if (const auto* multi = std::get_if<MultilayerModel>(&m.impl)) {
            const Region region = m.country_region[static_cast<std::size_t>(c)];
            auto it = multi->groups.find(region);
            if (it == multi->groups.end())
                throw ValidationError("tree_shap: no group model for region " + to_string(region));
            const double scale = 1.0 / static_cast<double>(it->second.trees.size());
            for (const Tree& t : it->second.trees) acc.add_tree(t, xs, scale);
            fx = it->second.predict(xs);
        } else {
            throw ValidationError("tree_shap: model holds no trees");
        }

        AttributionRow& out = cube.rows[r];
        out.country = rows.country_codes[static_cast<std::size_t>(rows.country[r])];
        out.date = rows.feature_date[r];
        out.fx = fx;
        out.base = acc.base;
        out.phi = std::move(acc.phi);
        out.interactions = std::move(acc.interactions);
    });
    return cube;
}

namespace {

// Mask of reportable features (the routing feature stays internal).
std::vector<int> reportable_features(const std::vector<std::string>& names) {
    std::vector<int> idx;
    for (std::size_t j = 0; j < names.size(); ++j)
        if (names[j] != "country") idx.push_back(static_cast<int>(j));
    return idx;
}

}  // namespace

ImportanceSummary summarize_importance(const AttributionCube& cube, const Taxonomy& taxonomy) {
    if (cube.rows.empty()) throw ValidationError("summarize_importance: empty cube");
    const auto features = reportable_features(cube.feature_names);
    ImportanceSummary out;
    for (int j : features) out.features.push_back(cube.feature_names[static_cast<std::size_t>(j)]);

    std::map<std::string, std::pair<Eigen::VectorXd, double>> sums;
    for (const auto& row : cube.rows) {
        auto& entry = sums.try_emplace(row.country,
                                       Eigen::VectorXd::Zero(static_cast<Eigen::Index>(features.size())), 0.0)
                          .first->second;
        for (std::size_t k = 0; k < features.size(); ++k)
            entry.first(static_cast<Eigen::Index>(k)) += std::abs(row.phi(features[k]));
        entry.second += 1.0;
    }
    for (auto& [code, entry] : sums) out.by_country[code] = entry.first / entry.second;

    std::map<Region, std::pair<Eigen::VectorXd, double>> region_sums;
    Eigen::VectorXd global = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(features.size()));
    for (const auto& [code, v] : out.by_country) {
        auto& entry = region_sums.try_emplace(taxonomy.region_of(code),
                                              Eigen::VectorXd::Zero(static_cast<Eigen::Index>(features.size())), 0.0)
                          .first->second;
        entry.first += v;
        entry.second += 1.0;
        global += v;
    }
    for (auto& [region, entry] : region_sums) out.by_region[region] = entry.first / entry.second;
    out.global = global / static_cast<double>(out.by_country.size());
    return out;
}

InteractionHeatmap interaction_heatmap(const AttributionCube& cube, const std::string& key_feature,
                                       const Taxonomy& taxonomy) {
    if (!cube.has_interactions)
        throw ValidationError("interaction_heatmap: cube has no interaction tensors");
    const auto key_it = std::find(cube.feature_names.begin(), cube.feature_names.end(), key_feature);
    if (key_it == cube.feature_names.end())
        throw ValidationError("interaction_heatmap: unknown feature " + key_feature);
    const int key = static_cast<int>(key_it - cube.feature_names.begin());

    InteractionHeatmap out;
    out.key_feature = key_feature;
    std::vector<int> columns;
    for (int j : reportable_features(cube.feature_names)) {
        if (j == key) continue;
        columns.push_back(j);
        out.features.push_back(cube.feature_names[static_cast<std::size_t>(j)]);
    }

    std::map<std::string, std::pair<Eigen::VectorXd, double>> sums;
    for (const auto& row : cube.rows) {
        auto& entry = sums.try_emplace(row.country,
                                       Eigen::VectorXd::Zero(static_cast<Eigen::Index>(columns.size())), 0.0)
                          .first->second;
        for (std::size_t k = 0; k < columns.size(); ++k)
            entry.first(static_cast<Eigen::Index>(k)) += std::abs(row.interactions(key, columns[k]));
        entry.second += 1.0;
    }

    // Countries ordered by region then code.
    std::vector<std::string> codes;
    for (const auto& [code, entry] : sums) codes.push_back(code);
    std::stable_sort(codes.begin(), codes.end(), [&](const std::string& a, const std::string& b) {
        const auto ra = static_cast<int>(taxonomy.region_of(a));
        const auto rb = static_cast<int>(taxonomy.region_of(b));
        return ra != rb ? ra < rb : a < b;
    });
    out.countries = codes;
    out.values.resize(static_cast<Eigen::Index>(codes.size()), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t i = 0; i < codes.size(); ++i) {
        const auto& entry = sums.at(codes[i]);
        out.values.row(static_cast<Eigen::Index>(i)) = (entry.first / entry.second).transpose();
    }
    return out;
}

LoessCurve loess(std::vector<double> xs, std::vector<double> ys, double frac, int robust_iters,
                 int grid_points) {
    if (xs.size() != ys.size()) throw ValidationError("loess: x/y size mismatch");
    if (xs.size() < 5) throw ValidationError("loess: need at least 5 points");
    if (frac <= 0.0 || frac > 1.0) throw ValidationError("loess: frac must be in (0,1]");
    if (grid_points < 2) throw ValidationError("loess: need at least 2 grid points");

    LoessCurve curve;
    curve.frac = frac;
    curve.robust_iters = robust_iters;
    curve.clip_lo = quantile(xs, 0.05);
    curve.clip_hi = quantile(xs, 0.95);

    // Clip to the percentile band, then sort by x (the fit itself is
    // order-invariant; sorting just makes neighbor search simple).
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < xs.size(); ++i)
        if (xs[i] >= curve.clip_lo && xs[i] <= curve.clip_hi) pts.emplace_back(xs[i], ys[i]);
    if (pts.size() < 5) throw ValidationError("loess: fewer than 5 points inside clip bounds");
    std::sort(pts.begin(), pts.end());
    const std::size_t n = pts.size();
    const auto q = static_cast<std::size_t>(
        std::min<double>(static_cast<double>(n), std::max(2.0, std::ceil(frac * static_cast<double>(n)))));

    std::vector<double> robustness(n, 1.0);
    auto fit_at = [&](double x0) {
        // Neighborhood = points within the q-th smallest distance.
        std::vector<double> dist(n);
        for (std::size_t i = 0; i < n; ++i) dist[i] = std::abs(pts[i].first - x0);
        std::vector<double> sorted = dist;
        std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(q - 1), sorted.end());
        const double radius = sorted[q - 1];
        double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (dist[i] > radius) continue;
            double w = 1.0;
            if (radius > 0.0) {
                const double u = dist[i] / radius;
                w = std::pow(1.0 - u * u * u, 3);
            }
            w *= robustness[i];
            if (w <= 0.0) continue;
            sw += w;
            swx += w * pts[i].first;
            swy += w * pts[i].second;
            swxx += w * pts[i].first * pts[i].first;
            swxy += w * pts[i].first * pts[i].second;
        }
        if (sw <= 0.0) return std::numeric_limits<double>::quiet_NaN();
        const double det = sw * swxx - swx * swx;
        if (std::abs(det) <= 1e-12 * std::max(1.0, sw * swxx)) return swy / sw;  // local mean fallback
        const double slope = (sw * swxy - swx * swy) / det;
        const double intercept = (swy - slope * swx) / sw;
        return intercept + slope * x0;
    };

    for (int pass = 0; pass <= robust_iters; ++pass) {
        if (pass > 0) {
            // Bisquare reweighting from the previous pass's residuals.
            std::vector<double> resid(n), abs_resid(n);
            for (std::size_t i = 0; i < n; ++i) {
                resid[i] = pts[i].second - fit_at(pts[i].first);
                abs_resid[i] = std::abs(resid[i]);
            }
            const double s = quantile(abs_resid, 0.5);
            for (std::size_t i = 0; i < n; ++i) {
                if (s <= 0.0) {
                    robustness[i] = 1.0;
                    continue;
                }
                const double u = resid[i] / (6.0 * s);
                robustness[i] = std::abs(u) < 1.0 ? (1.0 - u * u) * (1.0 - u * u) : 0.0;
            }
        }
        if (pass == robust_iters) {
            curve.grid.resize(static_cast<std::size_t>(grid_points));
            curve.fitted.resize(static_cast<std::size_t>(grid_points));
            for (int g = 0; g < grid_points; ++g) {
                const double x0 = curve.clip_lo + (curve.clip_hi - curve.clip_lo) *
                                                      static_cast<double>(g) /
                                                      static_cast<double>(grid_points - 1);
                curve.grid[static_cast<std::size_t>(g)] = x0;
                curve.fitted[static_cast<std::size_t>(g)] = fit_at(x0);
            }
        }
    }
    return curve;
}

DependenceSurface dependence_surface(const AttributionCube& cube, const DesignMatrix& rows,
                                     int feature_i, int feature_j, int grid_n) {
    if (!cube.has_interactions)
        throw ValidationError("dependence_surface: cube has no interaction tensors");
    if (cube.rows.size() != static_cast<std::size_t>(rows.rows()))
        throw ValidationError("dependence_surface: cube/design row mismatch");
    if (grid_n < 1) throw ValidationError("dependence_surface: grid_n must be >= 1");

    DependenceSurface out;
    double lo_i = rows.x.col(feature_i).minCoeff(), hi_i = rows.x.col(feature_i).maxCoeff();
    double lo_j = rows.x.col(feature_j).minCoeff(), hi_j = rows.x.col(feature_j).maxCoeff();
    if (lo_i == hi_i) hi_i = lo_i + 1.0;
    if (lo_j == hi_j) hi_j = lo_j + 1.0;
    for (int g = 0; g <= grid_n; ++g) {
        out.x_edges.push_back(lo_i + (hi_i - lo_i) * g / grid_n);
        out.y_edges.push_back(lo_j + (hi_j - lo_j) * g / grid_n);
    }
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(grid_n, grid_n);
    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(grid_n, grid_n);
    for (std::size_t r = 0; r < cube.rows.size(); ++r) {
        const auto ri = static_cast<Eigen::Index>(r);
        auto bin = [&](double v, double lo, double hi) {
            int b = static_cast<int>(std::floor((v - lo) / (hi - lo) * grid_n));
            return std::clamp(b, 0, grid_n - 1);
        };
        const int bi = bin(rows.x(ri, feature_i), lo_i, hi_i);
        const int bj = bin(rows.x(ri, feature_j), lo_j, hi_j);
        const auto& row = cube.rows[r];
        sums(bi, bj) += row.phi(feature_i) + row.phi(feature_j) + 2.0 * row.interactions(feature_i, feature_j);
        counts(bi, bj) += 1.0;
    }
    out.values = Eigen::MatrixXd::Constant(grid_n, grid_n, std::numeric_limits<double>::quiet_NaN());
    for (int a = 0; a < grid_n; ++a)
        for (int b = 0; b < grid_n; ++b)
            if (counts(a, b) > 0) out.values(a, b) = sums(a, b) / counts(a, b);
    return out;
}

void save_cube(const AttributionCube& cube, const std::string& path,
               const std::string& interactions_path) {
    CsvWriter out(path);
    out.row({"country", "date", "feature", "phi", "base", "fx"});
    for (const auto& row : cube.rows)
        for (std::size_t j = 0; j < cube.feature_names.size(); ++j)
            out.row({row.country, row.date.to_string(), cube.feature_names[j],
                     format_double(row.phi(static_cast<Eigen::Index>(j))), format_double(row.base),
                     format_double(row.fx)});
    if (cube.has_interactions && !interactions_path.empty()) {
        CsvWriter ix(interactions_path);
        ix.row({"country", "date", "feature", "feature2", "phi_ij"});
        for (const auto& row : cube.rows)
            for (std::size_t a = 0; a < cube.feature_names.size(); ++a)
                for (std::size_t b = 0; b < cube.feature_names.size(); ++b)
                    ix.row({row.country, row.date.to_string(), cube.feature_names[a],
                            cube.feature_names[b],
                            format_double(row.interactions(static_cast<Eigen::Index>(a),
                                                           static_cast<Eigen::Index>(b)))});
    }
}

AttributionCube load_cube(const std::string& path, const std::string& interactions_path) {
    CsvReader reader(path);
    std::vector<std::string> fields;
    if (!reader.next(fields) ||
        fields != std::vector<std::string>{"country", "date", "feature", "phi", "base", "fx"})
        throw ValidationError(path + ": bad cube header");
    AttributionCube cube;
    std::map<std::pair<std::string, std::string>, std::size_t> row_index;
    std::map<std::string, std::size_t> feature_index;
    struct Raw {
        std::vector<std::pair<std::size_t, double>> phis;
        double base, fx;
    };
    std::vector<AttributionRow> rows;
    while (reader.next(fields)) {
        if (fields.size() != 6) throw ValidationError(path + ": bad cube row");
        const auto key = std::make_pair(fields[0], fields[1]);
        if (!feature_index.count(fields[2])) {
            feature_index[fields[2]] = cube.feature_names.size();
            cube.feature_names.push_back(fields[2]);
        }
        if (!row_index.count(key)) {
            row_index[key] = rows.size();
            AttributionRow r;
            r.country = fields[0];
            r.date = Date::parse(fields[1]);
            rows.push_back(std::move(r));
        }
        auto& row = rows[row_index[key]];
        const auto fi = static_cast<Eigen::Index>(feature_index[fields[2]]);
        if (row.phi.size() <= fi) {
            Eigen::VectorXd grown = Eigen::VectorXd::Zero(fi + 1);
            grown.head(row.phi.size()) = row.phi;
            row.phi = grown;
        }
        row.phi(fi) = std::stod(fields[3]);
        row.base = std::stod(fields[4]);
        row.fx = std::stod(fields[5]);
    }
    const auto m = static_cast<Eigen::Index>(cube.feature_names.size());
    for (auto& row : rows) {
        if (row.phi.size() < m) {
            Eigen::VectorXd grown = Eigen::VectorXd::Zero(m);
            grown.head(row.phi.size()) = row.phi;
            row.phi = grown;
        }
    }
    if (!interactions_path.empty()) {
        CsvReader ix(interactions_path);
        if (!ix.next(fields) ||
            fields != std::vector<std::string>{"country", "date", "feature", "feature2", "phi_ij"})
            throw ValidationError(interactions_path + ": bad interactions header");
        for (auto& row : rows) row.interactions = Eigen::MatrixXd::Zero(m, m);
        while (ix.next(fields)) {
            if (fields.size() != 5) throw ValidationError(interactions_path + ": bad row");
            const auto key = std::make_pair(fields[0], fields[1]);
            auto it = row_index.find(key);
            if (it == row_index.end()) continue;
            rows[it->second].interactions(static_cast<Eigen::Index>(feature_index.at(fields[2])),
                                          static_cast<Eigen::Index>(feature_index.at(fields[3]))) =
                std::stod(fields[4]);
        }
        cube.has_interactions = true;
    }
    cube.rows = std::move(rows);
    return cube;
}

}  // namespace riskpanel
