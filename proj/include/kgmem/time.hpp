#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace kgmem {

// UTC instant with millisecond resolution.
struct Timestamp {
    std::int64_t ms = 0;

    static Timestamp now();
    static constexpr Timestamp from_ms(std::int64_t v) { return Timestamp{v}; }

    constexpr Timestamp plus_minutes(double minutes) const {
        return Timestamp{ms + static_cast<std::int64_t>(minutes * 60000.0)};
    }

    auto operator<=>(const Timestamp&) const = default;
};

// Exact (non-truncated) minutes from `earlier` to `later`.
inline double minutes_between(Timestamp earlier, Timestamp later) {
    return static_cast<double>(later.ms - earlier.ms) / 60000.0;
}

// "YYYY-MM-DDTHH:MM:SS.mmmZ"
std::string to_iso8601(Timestamp t);

// Accepts ISO-8601 ("2023-05-20T02:21:00Z", optional fraction, optional 'Z'),
// "YYYY-MM-DD HH:MM[:SS]", date-only "YYYY-MM-DD", and the LongMemEval style
// "2023/05/20 (Sat) 02:21". Throws ValidationError otherwise.
Timestamp parse_timestamp(std::string_view text);

}  // namespace kgmem
