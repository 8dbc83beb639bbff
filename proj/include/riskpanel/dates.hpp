#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace riskpanel {

// Whole calendar days since 1970-01-01. No timezones, no intraday grid.
class Date {
public:
    constexpr Date() = default;
    explicit constexpr Date(std::int32_t days) : days_(days) {}

    static Date from_ymd(int year, int month, int day);
    static Date parse(const std::string& iso);  // strict YYYY-MM-DD
    std::string to_string() const;
    void to_ymd(int& year, int& month, int& day) const;

    constexpr std::int32_t days() const { return days_; }
    constexpr auto operator<=>(const Date&) const = default;

    constexpr Date operator+(int n) const { return Date(days_ + n); }
    constexpr Date operator-(int n) const { return Date(days_ - n); }
    constexpr int operator-(Date o) const { return days_ - o.days_; }
    Date& operator+=(int n) { days_ += n; return *this; }
    Date& operator-=(int n) { days_ -= n; return *this; }
    Date& operator++() { ++days_; return *this; }

private:
    std::int32_t days_ = 0;
};

}  // namespace riskpanel
