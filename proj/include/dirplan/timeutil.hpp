#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace dirplan::timeutil {

struct CivilTime {
    int year = 1970;
    int month = 1;  // 1..12
    int day = 1;    // 1..31
    int hour = 0;
    int minute = 0;
    int second = 0;
};

// Proleptic Gregorian calendar, no leap seconds. All instants are UTC
// epoch seconds.
std::int64_t days_from_civil(int year, int month, int day);
CivilTime civil_from_epoch(std::int64_t epoch_seconds);
std::int64_t epoch_from_civil(const CivilTime& c);

bool is_valid_civil(const CivilTime& c);

// "YYYY-MM-DDTHH:MM:SSZ"
std::string iso8601_utc(std::int64_t epoch_seconds);
std::optional<std::int64_t> parse_iso8601_utc(const std::string& text);

}  // namespace dirplan::timeutil
