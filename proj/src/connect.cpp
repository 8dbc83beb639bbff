#include "riskpanel/connect.hpp"

#include <algorithm>
#include <cmath>

#include "riskpanel/csv.hpp"
#include "riskpanel/errors.hpp"
#include "riskpanel/panel.hpp"
#include "riskpanel/util.hpp"

namespace riskpanel {

AttribSeriesMap attribution_series(const AttributionCube& cube, const std::string& feature) {
    const auto it = std::find(cube.feature_names.begin(), cube.feature_names.end(), feature);
    if (it == cube.feature_names.end())
        throw ValidationError("attribution_series: unknown feature " + feature);
    const auto j = static_cast<Eigen::Index>(it - cube.feature_names.begin());
    AttribSeriesMap out;
    for (const auto& row : cube.rows) {
        Series& s = out[row.country];
        s.country = row.country;
        s.obs.push_back({row.date, row.phi(j)});
    }
    for (auto& [code, s] : out) {
        std::sort(s.obs.begin(), s.obs.end(),
                  [](const Observation& a, const Observation& b) { return a.date < b.date; });
        s.obs.erase(std::unique(s.obs.begin(), s.obs.end(),
                                [](const Observation& a, const Observation& b) {
                                    return a.date == b.date;
                                }),
                    s.obs.end());
    }
    return out;
}

std::optional<WindowBlock> build_window(const AttribSeriesMap& series, Date center,
                                        const WindowPlan& plan, std::string* skip_reason) {
    auto fail = [&](const std::string& why) -> std::optional<WindowBlock> {
        if (skip_reason) *skip_reason = why;
        return std::nullopt;
    };

    // Effective dimension from probe coverage.
    int k_eff = 0;
    for (const auto& [code, s] : series)
        if (coverage(s, center, plan.probe_half_width) >= plan.coverage_threshold) ++k_eff;
    if (k_eff < 2) return fail("k_eff<2");

    // Window sizing rule T = 6 * k_eff * p, half-width clipped.
    const int t_rule = 6 * k_eff * plan.target_lag;
    const int h = std::clamp(t_rule / 2, plan.h_min, plan.h_max);

    struct Candidate {
        std::string code;
        Series filled;
        double cov;
        double var;
    };
    std::vector<Candidate> candidates;
    for (const auto& [code, s] : series) {
        // Restrict to the window, interpolate short gaps, then re-measure.
        Series window;
        window.country = s.country;
        window.variable = s.variable;
        for (const auto& o : s.obs)
            if (o.date >= center - h && o.date <= center + h) window.obs.push_back(o);
        if (window.obs.size() < 2) continue;
        Series filled = interpolate_short_gaps(window, plan.interp_max_gap);
        // Interpolation may only fill interior gaps; clamp back to the window.
        const double cov = coverage(filled, center, h);
        if (cov < plan.coverage_threshold) continue;
        const auto vals = filled.values();
        const double sd = stdev(vals);
        if (sd < 1e-10) continue;  // near-constant
        candidates.push_back({code, std::move(filled), cov, sd * sd});
    }
    if (candidates.size() < 2) return fail("k<2 after cleaning");

    // Keep the strongest n_max by coverage, then variance, then code.
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.cov != b.cov) return a.cov > b.cov;
        if (a.var != b.var) return a.var > b.var;
        return a.code < b.code;
    });
    if (static_cast<int>(candidates.size()) > plan.n_max)
        candidates.resize(static_cast<std::size_t>(plan.n_max));
    std::sort(candidates.begin(), candidates.end(),
              [](const Candidate& a, const Candidate& b) { return a.code < b.code; });

    // Standardize inside the window, then align on complete days.
    std::vector<std::map<std::int32_t, double>> z(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto vals = candidates[i].filled.values();
        const double m = mean(vals);
        const double sd = stdev(vals);
        for (const auto& o : candidates[i].filled.obs) z[i][o.date.days()] = (o.value - m) / sd;
    }
    std::vector<Date> dates;
    for (Date d = center - h; d <= center + h; ++d) {
        bool complete = true;
        for (const auto& zi : z)
            if (!zi.count(d.days())) {
                complete = false;
                break;
            }
        if (complete) dates.push_back(d);
    }
    if (dates.size() < 8) return fail("too few complete days");

    WindowBlock block;
    block.k_eff = k_eff;
    block.h = h;
    block.dates = dates;
    for (const auto& c : candidates) block.countries.push_back(c.code);
    block.values.resize(static_cast<Eigen::Index>(dates.size()),
                        static_cast<Eigen::Index>(candidates.size()));
    for (std::size_t t = 0; t < dates.size(); ++t)
        for (std::size_t i = 0; i < candidates.size(); ++i)
            block.values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i)) =
                z[i].at(dates[t].days());
    return block;
}

namespace {

VarModel fit_var_lag(const Eigen::MatrixXd& block, int p) {
    const Eigen::Index total = block.rows();
    const Eigen::Index k = block.cols();
    const Eigen::Index t_eff = total - p;
    VarModel m;
    m.k = static_cast<int>(k);
    m.p = p;

    // Regressors: intercept + p lagged vectors.
    Eigen::MatrixXd regressors(t_eff, 1 + k * p);
    Eigen::MatrixXd targets(t_eff, k);
    for (Eigen::Index t = 0; t < t_eff; ++t) {
        regressors(t, 0) = 1.0;
        for (int lag = 1; lag <= p; ++lag)
            regressors.block(t, 1 + k * (lag - 1), 1, k) = block.row(t + p - lag);
        targets.row(t) = block.row(t + p);
    }
    const Eigen::MatrixXd gram = regressors.transpose() * regressors;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
    if (!lu.isInvertible())
        throw NumericError("fit_var: singular regressor cross-product");
    const Eigen::MatrixXd beta = lu.solve(regressors.transpose() * targets);  // (1+kp) x k

    m.intercept = beta.row(0).transpose();
    for (int lag = 1; lag <= p; ++lag)
        m.coef.push_back(beta.block(1 + k * (lag - 1), 0, k, k).transpose());

    const Eigen::MatrixXd resid = targets - regressors * beta;
    m.sigma_u = resid.transpose() * resid / static_cast<double>(t_eff);
    m.lambda_ridge = 1e-8 * m.sigma_u.trace() / static_cast<double>(k);

    const double det = (m.sigma_u + 1e-300 * Eigen::MatrixXd::Identity(k, k)).determinant();
    if (!(det > 0.0)) {
        m.aic = std::numeric_limits<double>::infinity();
    } else {
        m.aic = std::log(det) +
                2.0 * (static_cast<double>(k) * k * p + k) / static_cast<double>(t_eff);
    }

    // Companion-form stability.
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(k * p, k * p);
    for (int lag = 0; lag < p; ++lag) companion.block(0, k * lag, k, k) = m.coef[static_cast<std::size_t>(lag)];
    if (p > 1)
        companion.block(k, 0, k * (p - 1), k * (p - 1)) =
            Eigen::MatrixXd::Identity(k * (p - 1), k * (p - 1));
    const auto eigenvalues = companion.eigenvalues();
    double radius = 0.0;
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i)
        radius = std::max(radius, std::abs(eigenvalues(i)));
    m.stable = radius < 1.0;
    return m;
}

}  // namespace

VarModel fit_var(const Eigen::MatrixXd& block, int p_max) {
    if (p_max < 1) throw ValidationError("fit_var: p_max must be >= 1");
    const Eigen::Index k = block.cols();
    if (k < 1 || block.rows() <= k * p_max + 1)
        throw ValidationError("fit_var: need T > k * p_max + 1");
    std::optional<VarModel> best;
    for (int p = 1; p <= p_max; ++p) {
        VarModel candidate = fit_var_lag(block, p);
        if (!best || candidate.aic < best->aic) best = std::move(candidate);
        // Ties keep the smaller p because replacement requires strict improvement.
    }
    return *best;
}

Eigen::MatrixXd gfevd(const VarModel& m, int horizon) {
    if (horizon < 1) throw ValidationError("gfevd: horizon must be >= 1");
    const Eigen::Index k = m.k;
    const Eigen::MatrixXd sigma =
        m.sigma_u + m.lambda_ridge * Eigen::MatrixXd::Identity(k, k);

    // MA coefficients Psi_0..Psi_{H-1} by recursion.
    std::vector<Eigen::MatrixXd> psi;
    psi.push_back(Eigen::MatrixXd::Identity(k, k));
    for (int ell = 1; ell < horizon; ++ell) {
        Eigen::MatrixXd next = Eigen::MatrixXd::Zero(k, k);
        for (int j = 1; j <= std::min(ell, m.p); ++j)
            next += m.coef[static_cast<std::size_t>(j - 1)] * psi[static_cast<std::size_t>(ell - j)];
        if (!next.allFinite()) throw NumericError("gfevd: non-finite MA coefficient at horizon " +
                                                  std::to_string(ell));
        psi.push_back(std::move(next));
    }

    Eigen::MatrixXd theta(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        double denom = 0.0;
        for (const auto& p : psi) denom += (p.row(i) * sigma * p.row(i).transpose())(0, 0);
        for (Eigen::Index j = 0; j < k; ++j) {
            double num = 0.0;
            for (const auto& p : psi) {
                const double impact = (p.row(i) * sigma.col(j))(0, 0);
                num += impact * impact;
            }
            theta(i, j) = num / denom;
        }
    }
    // Row normalization.
    for (Eigen::Index i = 0; i < k; ++i) theta.row(i) /= theta.row(i).sum();
    return theta;
}

double dy_index(const Eigen::MatrixXd& theta) {
    const Eigen::Index k = theta.rows();
    if (k != theta.cols() || k < 1) throw ValidationError("dy_index: square matrix required");
    const double off_diagonal = theta.sum() - theta.trace();
    return 100.0 * off_diagonal / static_cast<double>(k);
}

double density(const Eigen::MatrixXd& block, double tau) {
    const Eigen::Index k = block.cols();
    if (k < 2) throw ValidationError("density: need at least 2 series");
    double total = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = i + 1; j < k; ++j) {
            std::vector<double> a(block.rows()), b(block.rows());
            for (Eigen::Index t = 0; t < block.rows(); ++t) {
                a[static_cast<std::size_t>(t)] = block(t, i);
                b[static_cast<std::size_t>(t)] = block(t, j);
            }
            const double rho = std::abs(spearman(a, b));
            if (rho >= tau) total += rho;
        }
    }
    const double pairs = static_cast<double>(k * (k - 1)) / 2.0;
    return 100.0 * total / pairs;
}

SpilloverSeries rolling_connectedness(const AttributionCube& cube,
                                      const std::vector<std::string>& features,
                                      const WindowPlan& plan, int jobs) {
    if (plan.last_center < plan.first_center || plan.step_days < 1)
        throw ValidationError("rolling_connectedness: invalid plan");
    std::vector<std::pair<std::string, Date>> grid;
    for (const auto& feature : features)
        for (Date c = plan.first_center; c <= plan.last_center; c += plan.step_days)
            grid.emplace_back(feature, c);

    std::map<std::string, AttribSeriesMap> per_feature;
    for (const auto& feature : features) per_feature[feature] = attribution_series(cube, feature);

    SpilloverSeries series;
    series.points.resize(grid.size());
    parallel_for(grid.size(), jobs, [&](std::size_t idx) {
        const auto& [feature, center] = grid[idx];
        SpilloverPoint& point = series.points[idx];
        point.feature = feature;
        point.center = center;
        point.horizon = plan.horizon;
        std::string reason;
        const auto block = build_window(per_feature.at(feature), center, plan, &reason);
        if (!block) {
            point.skip_reason = reason;
            return;
        }
        point.k_eff = block->k_eff;
        point.h = block->h;
        point.countries = block->countries;
        try {
            if (block->values.rows() <= block->values.cols() * plan.p_max + 1) {
                point.skip_reason = "window too short for VAR";
                return;
            }
            const VarModel var = fit_var(block->values, plan.p_max);
            point.p = var.p;
            point.stable = var.stable;
            const Eigen::MatrixXd theta = gfevd(var, plan.horizon);
            point.s_dy = dy_index(theta);
            point.density = density(block->values, plan.density_tau);
            point.computed = true;
        } catch (const NumericError& e) {
            point.skip_reason = e.what();
        }
    });
    return series;
}

void save_spillovers(const SpilloverSeries& series, const std::string& path) {
    CsvWriter out(path);
    out.row({"feature", "center", "k_eff", "h", "p", "H", "S_dy", "density", "countries",
             "skip_reason"});
    for (const auto& p : series.points) {
        std::string countries;
        for (std::size_t i = 0; i < p.countries.size(); ++i) {
            if (i) countries += '|';
            countries += p.countries[i];
        }
        out.row({p.feature, p.center.to_string(), std::to_string(p.k_eff), std::to_string(p.h),
                 std::to_string(p.p), std::to_string(p.horizon),
                 p.computed ? format_double(p.s_dy) : "", p.computed ? format_double(p.density) : "",
                 countries, p.skip_reason});
    }
}

}  // namespace riskpanel
