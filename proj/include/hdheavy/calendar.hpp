#pragma once

#include <compare>
#include <string>
#include <string_view>

namespace hdh {

struct YearMonth {
    int year = 1970;
    int month = 1;

    /// Parses `YYYY-MM`; throws Error(Parse) otherwise.
    static YearMonth parse(std::string_view text);

    [[nodiscard]] std::string str() const;
    [[nodiscard]] YearMonth next() const;
    [[nodiscard]] YearMonth plus(int months) const;

    auto operator<=>(const YearMonth&) const = default;
};

struct Date {
    int year = 1970;
    int month = 1;
    int day = 1;

    /// Parses ISO `YYYY-MM-DD` with calendar validation.
    static Date parse(std::string_view text);

    [[nodiscard]] std::string str() const;
    [[nodiscard]] YearMonth year_month() const { return {year, month}; }

    auto operator<=>(const Date&) const = default;
};

[[nodiscard]] int days_in_month(int year, int month);

}  // namespace hdh
