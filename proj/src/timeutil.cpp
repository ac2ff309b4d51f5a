#include "dirplan/timeutil.hpp"

#include <cstdio>

namespace dirplan::timeutil {

std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

CivilTime civil_from_epoch(std::int64_t t) {
    std::int64_t days = t / 86400;
    std::int64_t rem = t % 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    std::int64_t z = days + 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);

    CivilTime c;
    c.year = static_cast<int>(y + (m <= 2));
    c.month = static_cast<int>(m);
    c.day = static_cast<int>(d);
    c.hour = static_cast<int>(rem / 3600);
    c.minute = static_cast<int>(rem % 3600 / 60);
    c.second = static_cast<int>(rem % 60);
    return c;
}

std::int64_t epoch_from_civil(const CivilTime& c) {
    return days_from_civil(c.year, c.month, c.day) * 86400 + c.hour * 3600 +
           c.minute * 60 + c.second;
}

bool is_valid_civil(const CivilTime& c) {
    if (c.month < 1 || c.month > 12) return false;
    if (c.hour < 0 || c.hour > 23) return false;
    if (c.minute < 0 || c.minute > 59) return false;
    if (c.second < 0 || c.second > 59) return false;
    static const int days_in[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    int max_day = days_in[c.month - 1];
    const bool leap =
        c.year % 4 == 0 && (c.year % 100 != 0 || c.year % 400 == 0);
    if (c.month == 2 && leap) max_day = 29;
    return c.day >= 1 && c.day <= max_day;
}

std::string iso8601_utc(std::int64_t epoch_seconds) {
    const CivilTime c = civil_from_epoch(epoch_seconds);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", c.year,
                  c.month, c.day, c.hour, c.minute, c.second);
    return buf;
}

std::optional<std::int64_t> parse_iso8601_utc(const std::string& text) {
    CivilTime c;
    char tail = '\0';
    if (std::sscanf(text.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%c", &c.year,
                    &c.month, &c.day, &c.hour, &c.minute, &c.second,
                    &tail) != 7 ||
        tail != 'Z' || text.size() != 20) {
        return std::nullopt;
    }
    if (!is_valid_civil(c)) return std::nullopt;
    return epoch_from_civil(c);
}

}  // namespace dirplan::timeutil
