#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "riskpanel/panel.hpp"

namespace riskpanel {

enum class InfoSet { MarketsOnly, MarketsPlusNews };

std::string to_string(InfoSet k);
InfoSet parse_infoset(const std::string& s);

// Feature variables for an information set, in canonical order.
std::vector<Variable> infoset_variables(InfoSet k);

// Records every panel observation consumed while building a design matrix.
// Used by the harness to certify that training never touches embargoed dates.
struct AccessLog {
    struct Entry {
        std::string country;
        Variable variable;
        Date date;
    };
    std::vector<Entry> entries;
    Date max_date{INT32_MIN};

    void record(const std::string& country, Variable v, Date d) {
        entries.push_back({country, v, d});
        if (d > max_date) max_date = d;
    }
};

// Complete-case regression rows. Feature order is stable between fit and
// predict; rows with any missing feature are never emitted.
struct DesignMatrix {
    Eigen::MatrixXd x;                       // n x M substantive features
    Eigen::VectorXd y;                       // target
    std::vector<int> country;                // row -> index into country_codes
    std::vector<Date> feature_date;          // date of the feature vector
    std::vector<std::string> feature_names;  // size M
    std::vector<std::string> country_codes;  // dense index -> code
    int target_lead = 1;  // days between feature date and target date

    Eigen::Index rows() const { return x.rows(); }
    Eigen::Index cols() const { return x.cols(); }

    // Country-demeaned copies of x and y (the within transformation that
    // absorbs fixed effects).
    void within_demean(Eigen::MatrixXd& xd, Eigen::VectorXd& yd) const;

    // Per-country means of y and of each column of x.
    void group_means(Eigen::MatrixXd& x_mean, Eigen::VectorXd& y_mean) const;
};

struct DesignOptions {
    // Target alignment: one step ahead (y at t+1 from x at t) for
    // forecasting, same day for the attribution stage.
    enum class Target { NextDay, SameDay };
    Target target = Target::NextDay;
    // Only rows whose every accessed date is <= max_date are emitted
    // (no constraint when unset).
    std::optional<Date> max_date;
    // Restrict feature dates to [min_feature_date, max_feature_date] for
    // prediction-row extraction.
    std::optional<Date> exact_feature_date;
    AccessLog* access_log = nullptr;
};

// Builds complete-case rows from a standardized panel for one information set.
DesignMatrix build_design(const Panel& panel, InfoSet infoset, const DesignOptions& opts = {});

}  // namespace riskpanel
