#include "kgmem/time.hpp"

#include "kgmem/error.hpp"

#include <chrono>
#include <cstdio>
#include <string>

namespace kgmem {
namespace {

// Days since 1970-01-01 for a proleptic Gregorian date.
std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp < 10 ? mp + 3 : mp - 9;
    y = static_cast<int>(yoe) + static_cast<int>(era) * 400 + (m <= 2);
}

bool valid_fields(int mo, int d, int h, int mi, double s) {
    return mo >= 1 && mo <= 12 && d >= 1 && d <= 31 && h >= 0 && h <= 23 && mi >= 0 && mi <= 59 &&
           s >= 0.0 && s < 61.0;
}

Timestamp compose(int y, int mo, int d, int h, int mi, double s) {
    if (!valid_fields(mo, d, h, mi, s)) {
        throw ValidationError("timestamp field out of range");
    }
    const std::int64_t days = days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d));
    const std::int64_t whole_seconds = static_cast<std::int64_t>(s);
    const auto millis = static_cast<std::int64_t>((s - static_cast<double>(whole_seconds)) * 1000.0 + 0.5);
    return Timestamp{((days * 24 + h) * 60 + mi) * 60000 + whole_seconds * 1000 + millis};
}

}  // namespace

Timestamp Timestamp::now() {
    using namespace std::chrono;
    return Timestamp{duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count()};
}

std::string to_iso8601(Timestamp t) {
    std::int64_t days = t.ms / 86400000;
    std::int64_t rem = t.ms % 86400000;
    if (rem < 0) {
        rem += 86400000;
        --days;
    }
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    civil_from_days(days, y, m, d);
    const auto h = static_cast<int>(rem / 3600000);
    const auto mi = static_cast<int>((rem / 60000) % 60);
    const auto s = static_cast<int>((rem / 1000) % 60);
    const auto ms = static_cast<int>(rem % 1000);
    char buf[40];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d.%03dZ", y, m, d, h, mi, s, ms);
    return buf;
}

Timestamp parse_timestamp(std::string_view text) {
    const std::string s(text);
    int y = 0, mo = 0, d = 0, h = 0, mi = 0;
    double sec = 0.0;
    int consumed = 0;

    // LongMemEval: "2023/05/20 (Sat) 02:21"
    char weekday[8] = {0};
    if (std::sscanf(s.c_str(), "%d/%d/%d (%7[A-Za-z]) %d:%d%n", &y, &mo, &d, weekday, &h, &mi, &consumed) == 6 &&
        consumed == static_cast<int>(s.size())) {
        return compose(y, mo, d, h, mi, 0.0);
    }
    if (std::sscanf(s.c_str(), "%d/%d/%d %d:%d%n", &y, &mo, &d, &h, &mi, &consumed) == 5 &&
        consumed == static_cast<int>(s.size())) {
        return compose(y, mo, d, h, mi, 0.0);
    }

    // ISO-8601 with 'T' or ' ' separator.
    char sep = 0;
    consumed = 0;
    if (std::sscanf(s.c_str(), "%4d-%2d-%2d%c%2d:%2d%n", &y, &mo, &d, &sep, &h, &mi, &consumed) == 6 &&
        (sep == 'T' || sep == ' ')) {
        std::string_view rest(s.c_str() + consumed);
        if (!rest.empty() && rest.front() == ':') {
            int used = 0;
            if (std::sscanf(rest.data(), ":%lf%n", &sec, &used) != 1) {
                throw ValidationError("malformed seconds in timestamp: " + s);
            }
            rest.remove_prefix(static_cast<std::size_t>(used));
        }
        if (rest == "Z" || rest == "+00:00" || rest.empty()) {
            return compose(y, mo, d, h, mi, sec);
        }
        throw ValidationError("only UTC timestamps are accepted: " + s);
    }
    consumed = 0;
    if (std::sscanf(s.c_str(), "%4d-%2d-%2d%n", &y, &mo, &d, &consumed) == 3 &&
        consumed == static_cast<int>(s.size())) {
        return compose(y, mo, d, 0, 0, 0.0);
    }
    throw ValidationError("unrecognised timestamp: " + s);
}

}  // namespace kgmem
