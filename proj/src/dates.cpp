#include "riskpanel/dates.hpp"

#include <cctype>
#include <cstdio>

#include "riskpanel/errors.hpp"

namespace riskpanel {

namespace {

// Civil-calendar conversions (proleptic Gregorian), Howard Hinnant's algorithms.
std::int32_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u
                         + static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
    return era * 146097 + static_cast<int>(doe) - 719468;
}

void civil_from_days(std::int32_t z, int& y, int& m, int& d) {
    z += 719468;
    const int era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int yr = static_cast<int>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
    y = yr + (m <= 2);
}

bool days_in_month_ok(int y, int m, int d) {
    static const int lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m < 1 || m > 12 || d < 1) return false;
    int n = lengths[m - 1];
    if (m == 2 && (y % 4 == 0 && (y % 100 != 0 || y % 400 == 0))) n = 29;
    return d <= n;
}

}  // namespace

Date Date::from_ymd(int year, int month, int day) {
    if (!days_in_month_ok(year, month, day))
        throw ValidationError("invalid calendar date: " + std::to_string(year) + "-" +
                              std::to_string(month) + "-" + std::to_string(day));
    return Date(days_from_civil(year, month, day));
}

Date Date::parse(const std::string& iso) {
    auto bad = [&] { throw ValidationError("expected ISO date YYYY-MM-DD, got '" + iso + "'"); };
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') bad();
    for (int i : {0, 1, 2, 3, 5, 6, 8, 9})
        if (!std::isdigit(static_cast<unsigned char>(iso[i]))) bad();
    int y = std::stoi(iso.substr(0, 4));
    int m = std::stoi(iso.substr(5, 2));
    int d = std::stoi(iso.substr(8, 2));
    return from_ymd(y, m, d);
}

std::string Date::to_string() const {
    int y, m, d;
    to_ymd(y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
    return buf;
}

void Date::to_ymd(int& year, int& month, int& day) const {
    civil_from_days(days_, year, month, day);
}

}  // namespace riskpanel
