#pragma once

#include <optional>
#include <string>
#include <vector>

#include "riskpanel/dates.hpp"

namespace riskpanel {

enum class Region { AdvancedEconomies, EMAsia, EMLatam, EMEurope, EMMENA };

// Panel variables. CDS is the target; FED and VIX are global (one series
// shared by all countries); the remaining six are country-level news indices.
enum class Variable { Cds, Fed, Vix, Gpr, Epu, Tpu, Eco, Int, Pol };

inline constexpr int kNumVariables = 9;
inline constexpr const char* kGlobalCountry = "GLOBAL";

std::string to_string(Region r);
std::string to_string(Variable v);
Region parse_region(const std::string& s);
Variable parse_variable(const std::string& s);
bool is_global_variable(Variable v);

struct CountryMeta {
    std::string code;  // ISO-like short code
    Region region;
};

// Country -> region mapping. A built-in table covers the 42 supported
// countries; a `regions.csv` sidecar (country,region) extends or overrides it.
class Taxonomy {
public:
    static Taxonomy builtin();
    static Taxonomy from_csv(const std::string& path);         // sidecar only
    static Taxonomy builtin_with_sidecar(const std::string& path);

    void add(const CountryMeta& meta);           // replaces an existing code
    bool contains(const std::string& code) const;
    Region region_of(const std::string& code) const;           // throws on unknown
    const std::vector<CountryMeta>& countries() const { return table_; }

    // Codes in a fixed order that cycles through the five regions, so a
    // prefix of any length spans several regions.
    static std::vector<std::string> region_interleaved_codes();

private:
    std::vector<CountryMeta> table_;  // sorted by code
};

struct Observation {
    Date date;
    double value;
};

// One (country, variable) series: strictly increasing dates, finite values,
// daily grid with gaps allowed.
struct Series {
    std::string country;  // country code, or GLOBAL for FED/VIX
    Variable variable = Variable::Cds;
    std::vector<Observation> obs;

    bool empty() const { return obs.empty(); }
    std::size_t size() const { return obs.size(); }
    Date first_date() const { return obs.front().date; }
    Date last_date() const { return obs.back().date; }
    std::optional<double> value_at(Date d) const;
    std::vector<double> values() const;

    // Throws ValidationError unless dates strictly increase and values are finite.
    void check() const;
};

}  // namespace riskpanel
