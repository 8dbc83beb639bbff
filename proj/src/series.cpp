#include "riskpanel/series.hpp"

#include <algorithm>
#include <cmath>

#include "riskpanel/csv.hpp"
#include "riskpanel/errors.hpp"

namespace riskpanel {

std::string to_string(Region r) {
    switch (r) {
        case Region::AdvancedEconomies: return "AdvancedEconomies";
        case Region::EMAsia: return "EMAsia";
        case Region::EMLatam: return "EMLatam";
        case Region::EMEurope: return "EMEurope";
        case Region::EMMENA: return "EMMENA";
    }
    return "?";
}

Region parse_region(const std::string& s) {
    if (s == "AdvancedEconomies") return Region::AdvancedEconomies;
    if (s == "EMAsia") return Region::EMAsia;
    if (s == "EMLatam") return Region::EMLatam;
    if (s == "EMEurope") return Region::EMEurope;
    if (s == "EMMENA") return Region::EMMENA;
    throw ValidationError("unknown region: '" + s + "'");
}

std::string to_string(Variable v) {
    switch (v) {
        case Variable::Cds: return "CDS";
        case Variable::Fed: return "FED";
        case Variable::Vix: return "VIX";
        case Variable::Gpr: return "GPR";
        case Variable::Epu: return "EPU";
        case Variable::Tpu: return "TPU";
        case Variable::Eco: return "ECO";
        case Variable::Int: return "INT";
        case Variable::Pol: return "POL";
    }
    return "?";
}

Variable parse_variable(const std::string& s) {
    if (s == "CDS") return Variable::Cds;
    if (s == "FED") return Variable::Fed;
    if (s == "VIX") return Variable::Vix;
    if (s == "GPR") return Variable::Gpr;
    if (s == "EPU") return Variable::Epu;
    if (s == "TPU") return Variable::Tpu;
    if (s == "ECO") return Variable::Eco;
    if (s == "INT") return Variable::Int;
    if (s == "POL") return Variable::Pol;
    throw ValidationError("unknown variable: '" + s + "'");
}

bool is_global_variable(Variable v) {
    return v == Variable::Fed || v == Variable::Vix;
}

namespace {

// 42 supported countries grouped by region.
const std::vector<CountryMeta>& builtin_table() {
    static const std::vector<CountryMeta> table = {
        {"AR", Region::EMLatam},          {"AT", Region::AdvancedEconomies},
        {"AU", Region::AdvancedEconomies},{"BE", Region::AdvancedEconomies},
        {"BR", Region::EMLatam},          {"CA", Region::AdvancedEconomies},
        {"CL", Region::EMLatam},          {"CN", Region::EMAsia},
        {"CO", Region::EMLatam},          {"CZ", Region::EMEurope},
        {"DE", Region::AdvancedEconomies},{"DK", Region::AdvancedEconomies},
        {"EG", Region::EMMENA},           {"ES", Region::AdvancedEconomies},
        {"FI", Region::AdvancedEconomies},{"FR", Region::AdvancedEconomies},
        {"GB", Region::AdvancedEconomies},{"HU", Region::EMEurope},
        {"ID", Region::EMAsia},           {"IL", Region::EMMENA},
        {"IN", Region::EMAsia},           {"IT", Region::AdvancedEconomies},
        {"JO", Region::EMMENA},           {"JP", Region::AdvancedEconomies},
        {"MA", Region::EMMENA},           {"MX", Region::EMLatam},
        {"MY", Region::EMAsia},           {"NL", Region::AdvancedEconomies},
        {"NO", Region::AdvancedEconomies},{"PE", Region::EMLatam},
        {"PH", Region::EMAsia},           {"PL", Region::EMEurope},
        {"QA", Region::EMMENA},           {"RU", Region::EMEurope},
        {"SA", Region::EMMENA},           {"SE", Region::AdvancedEconomies},
        {"TH", Region::EMAsia},           {"TR", Region::EMEurope},
        {"UA", Region::EMEurope},         {"US", Region::AdvancedEconomies},
        {"UY", Region::EMLatam},          {"VN", Region::EMAsia},
    };
    return table;
}

}  // namespace

Taxonomy Taxonomy::builtin() {
    Taxonomy t;
    t.table_ = builtin_table();
    return t;
}

Taxonomy Taxonomy::from_csv(const std::string& path) {
    Taxonomy t;
    CsvReader reader(path);
    std::vector<std::string> fields;
    bool header = true;
    while (reader.next(fields)) {
        if (header) {
            header = false;
            if (fields.size() >= 2 && fields[0] == "country") continue;
        }
        if (fields.size() != 2)
            throw ValidationError("regions sidecar line " + std::to_string(reader.line_number()) +
                                  ": expected country,region");
        t.add({fields[0], parse_region(fields[1])});
    }
    return t;
}

Taxonomy Taxonomy::builtin_with_sidecar(const std::string& path) {
    Taxonomy t = builtin();
    Taxonomy side = from_csv(path);
    for (const auto& meta : side.countries()) t.add(meta);
    return t;
}

void Taxonomy::add(const CountryMeta& meta) {
    auto it = std::lower_bound(table_.begin(), table_.end(), meta.code,
                               [](const CountryMeta& m, const std::string& c) { return m.code < c; });
    if (it != table_.end() && it->code == meta.code) {
        it->region = meta.region;
    } else {
        table_.insert(it, meta);
    }
}

bool Taxonomy::contains(const std::string& code) const {
    auto it = std::lower_bound(table_.begin(), table_.end(), code,
                               [](const CountryMeta& m, const std::string& c) { return m.code < c; });
    return it != table_.end() && it->code == code;
}

Region Taxonomy::region_of(const std::string& code) const {
    auto it = std::lower_bound(table_.begin(), table_.end(), code,
                               [](const CountryMeta& m, const std::string& c) { return m.code < c; });
    if (it == table_.end() || it->code != code)
        throw ValidationError("country not in taxonomy: '" + code + "'");
    return it->region;
}

std::vector<std::string> Taxonomy::region_interleaved_codes() {
    std::vector<std::vector<std::string>> buckets(5);
    for (const auto& meta : builtin_table())
        buckets[static_cast<int>(meta.region)].push_back(meta.code);
    std::vector<std::string> out;
    for (std::size_t i = 0; out.size() < builtin_table().size(); ++i)
        for (auto& bucket : buckets)
            if (i < bucket.size()) out.push_back(bucket[i]);
    return out;
}

std::optional<double> Series::value_at(Date d) const {
    auto it = std::lower_bound(obs.begin(), obs.end(), d,
                               [](const Observation& o, Date x) { return o.date < x; });
    if (it == obs.end() || it->date != d) return std::nullopt;
    return it->value;
}

std::vector<double> Series::values() const {
    std::vector<double> out;
    out.reserve(obs.size());
    for (const auto& o : obs) out.push_back(o.value);
    return out;
}

void Series::check() const {
    for (std::size_t i = 0; i < obs.size(); ++i) {
        if (!std::isfinite(obs[i].value))
            throw ValidationError("non-finite value in series " + country + "/" +
                                  to_string(variable) + " at " + obs[i].date.to_string());
        if (i > 0 && obs[i].date <= obs[i - 1].date)
            throw ValidationError("dates not strictly increasing in series " + country + "/" +
                                  to_string(variable) + " near " + obs[i].date.to_string());
    }
}

}  // namespace riskpanel
