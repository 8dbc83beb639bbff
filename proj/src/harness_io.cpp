#include "riskpanel/csv.hpp"
#include "riskpanel/errors.hpp"
#include "riskpanel/harness.hpp"
#include "riskpanel/util.hpp"

namespace riskpanel {

void save_ledger(const ForecastLedger& ledger, const std::string& path) {
    CsvWriter out(path);
    out.row({"country", "origin", "family", "infoset", "yhat", "y", "err"});
    for (const auto& r : ledger.records)
        out.row({r.country, r.origin.to_string(), to_string(r.family), to_string(r.infoset),
                 format_double(r.yhat), format_double(r.y), format_double(r.err)});
}

ForecastLedger load_ledger(const std::string& path) {
    CsvReader reader(path);
    std::vector<std::string> fields;
    if (!reader.next(fields) ||
        fields != std::vector<std::string>{"country", "origin", "family", "infoset", "yhat", "y", "err"})
        throw ValidationError(path + ": bad ledger header");
    ForecastLedger ledger;
    while (reader.next(fields)) {
        if (fields.size() != 7)
            throw ValidationError(path + " line " + std::to_string(reader.line_number()) +
                                  ": expected 7 columns");
        ForecastRecord r;
        r.country = fields[0];
        r.origin = Date::parse(fields[1]);
        r.family = parse_family(fields[2]);
        r.infoset = parse_infoset(fields[3]);
        r.yhat = std::stod(fields[4]);
        r.y = std::stod(fields[5]);
        r.err = std::stod(fields[6]);
        ledger.records.push_back(std::move(r));
    }
    return ledger;
}

void save_metrics(const MetricsTable& table, const std::string& path) {
    CsvWriter out(path);
    out.row({"family", "infoset", "level", "unit", "mae", "rmse", "n"});
    for (const auto& [key, cell] : table.cells)
        out.row({to_string(key.family), to_string(key.infoset), to_string(key.level), key.unit,
                 format_double(cell.mae), format_double(cell.rmse), std::to_string(cell.n)});
}

// Benchmark / news-extended / difference layout, one row per (family, unit, metric).
void save_increments(const IncrementTable& table, const std::string& path) {
    CsvWriter out(path);
    out.row({"family", "level", "unit", "metric", "markets", "markets_news", "delta", "pct", "defined"});
    for (const auto& [key, cell] : table)
        out.row({to_string(key.family), to_string(key.level), key.unit, key.metric,
                 format_double(cell.metric_mkt), format_double(cell.metric_news),
                 format_double(cell.delta), format_double(cell.pct), cell.defined ? "1" : "0"});
}

}  // namespace riskpanel
