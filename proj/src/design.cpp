#include "riskpanel/design.hpp"

#include <algorithm>

#include "riskpanel/errors.hpp"

namespace riskpanel {

std::string to_string(InfoSet k) {
    return k == InfoSet::MarketsOnly ? "markets" : "markets_news";
}

InfoSet parse_infoset(const std::string& s) {
    if (s == "markets") return InfoSet::MarketsOnly;
    if (s == "markets_news") return InfoSet::MarketsPlusNews;
    throw ValidationError("unknown infoset: '" + s + "' (markets | markets_news)");
}

std::vector<Variable> infoset_variables(InfoSet k) {
    std::vector<Variable> vars = {Variable::Fed, Variable::Vix};
    if (k == InfoSet::MarketsPlusNews) {
        vars.insert(vars.end(), {Variable::Gpr, Variable::Epu, Variable::Tpu, Variable::Eco,
                                 Variable::Int, Variable::Pol});
    }
    return vars;
}

void DesignMatrix::within_demean(Eigen::MatrixXd& xd, Eigen::VectorXd& yd) const {
    Eigen::MatrixXd x_mean;
    Eigen::VectorXd y_mean;
    group_means(x_mean, y_mean);
    xd = x;
    yd = y;
    for (Eigen::Index r = 0; r < rows(); ++r) {
        xd.row(r) -= x_mean.row(country[static_cast<std::size_t>(r)]);
        yd(r) -= y_mean(country[static_cast<std::size_t>(r)]);
    }
}

void DesignMatrix::group_means(Eigen::MatrixXd& x_mean, Eigen::VectorXd& y_mean) const {
    const auto c = static_cast<Eigen::Index>(country_codes.size());
    x_mean = Eigen::MatrixXd::Zero(c, cols());
    y_mean = Eigen::VectorXd::Zero(c);
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(c);
    for (Eigen::Index r = 0; r < rows(); ++r) {
        const int g = country[static_cast<std::size_t>(r)];
        x_mean.row(g) += x.row(r);
        y_mean(g) += y(r);
        counts(g) += 1.0;
    }
    for (Eigen::Index g = 0; g < c; ++g) {
        if (counts(g) > 0) {
            x_mean.row(g) /= counts(g);
            y_mean(g) /= counts(g);
        }
    }
}

DesignMatrix build_design(const Panel& panel, InfoSet infoset, const DesignOptions& opts) {
    const auto vars = infoset_variables(infoset);
    DesignMatrix d;
    for (Variable v : vars) d.feature_names.push_back(to_string(v));

    struct Row {
        int country;
        Date date;
        std::vector<double> x;
        double y;
    };
    std::vector<Row> rows;

    const int lead = opts.target == DesignOptions::Target::NextDay ? 1 : 0;
    d.target_lead = lead;
    for (const auto& meta : panel.countries()) {
        const Series* cds = panel.find(meta.code, Variable::Cds);
        if (!cds) continue;
        const int cidx = static_cast<int>(d.country_codes.size());
        bool used = false;
        for (const auto& o : cds->obs) {
            const Date t = o.date - lead;  // feature date for this target
            if (opts.exact_feature_date && t != *opts.exact_feature_date) continue;
            if (opts.max_date && o.date > *opts.max_date) continue;
            std::vector<double> x;
            x.reserve(vars.size());
            bool complete = true;
            for (Variable v : vars) {
                const Series* s = panel.find(meta.code, v);
                const auto val = s ? s->value_at(t) : std::nullopt;
                if (!val) {
                    complete = false;
                    break;
                }
                x.push_back(*val);
            }
            if (!complete) continue;
            if (opts.access_log) {
                for (std::size_t j = 0; j < vars.size(); ++j)
                    opts.access_log->record(meta.code, vars[j], t);
                opts.access_log->record(meta.code, Variable::Cds, o.date);
            }
            rows.push_back({cidx, t, std::move(x), o.value});
            used = true;
        }
        if (used) d.country_codes.push_back(meta.code);
    }

    d.x.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(vars.size()));
    d.y.resize(static_cast<Eigen::Index>(rows.size()));
    d.country.reserve(rows.size());
    d.feature_date.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t j = 0; j < vars.size(); ++j) d.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = rows[r].x[j];
        d.y(static_cast<Eigen::Index>(r)) = rows[r].y;
        d.country.push_back(rows[r].country);
        d.feature_date.push_back(rows[r].date);
    }
    return d;
}

}  // namespace riskpanel
