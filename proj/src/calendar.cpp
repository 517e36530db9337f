#include "hdheavy/calendar.hpp"

#include "hdheavy/common.hpp"

#include <charconv>
#include <cstdio>

namespace hdh {

namespace {

int parse_digits(std::string_view text, std::string_view whole) {
    int value = 0;
    for (char c : text) {
        if (c < '0' || c > '9') {
            fail(ErrorCode::Parse, "invalid date '" + std::string(whole) + "'");
        }
        value = value * 10 + (c - '0');
    }
    return value;
}

}  // namespace

int days_in_month(int year, int month) {
    static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
    return month == 2 && leap ? 29 : kDays[month - 1];
}

YearMonth YearMonth::parse(std::string_view text) {
    if (text.size() != 7 || text[4] != '-') {
        fail(ErrorCode::Parse, "invalid month key '" + std::string(text) + "', expected YYYY-MM");
    }
    YearMonth ym{parse_digits(text.substr(0, 4), text), parse_digits(text.substr(5, 2), text)};
    if (ym.month < 1 || ym.month > 12) {
        fail(ErrorCode::Parse, "invalid month key '" + std::string(text) + "'");
    }
    return ym;
}

std::string YearMonth::str() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
    return buf;
}

YearMonth YearMonth::next() const { return plus(1); }

YearMonth YearMonth::plus(int months) const {
    const int index = year * 12 + (month - 1) + months;
    return {index / 12, index % 12 + 1};
}

Date Date::parse(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        fail(ErrorCode::Parse, "invalid date '" + std::string(text) + "', expected YYYY-MM-DD");
    }
    Date d{parse_digits(text.substr(0, 4), text), parse_digits(text.substr(5, 2), text),
           parse_digits(text.substr(8, 2), text)};
    if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > days_in_month(d.year, d.month)) {
        fail(ErrorCode::Parse, "invalid calendar date '" + std::string(text) + "'");
    }
    return d;
}

std::string Date::str() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
    return buf;
}

}  // namespace hdh
