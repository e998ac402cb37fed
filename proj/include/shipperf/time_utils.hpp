#pragma once

#include <cstdint>
#include <string>

namespace shipperf {

// UTC instants are carried as whole seconds since the Unix epoch.
using UtcSeconds = std::int64_t;

// Parses "YYYY-MM-DDTHH:MM:SS" (optional trailing 'Z', optional ' ' separator).
// Throws std::invalid_argument on malformed input.
UtcSeconds parse_iso8601(const std::string& text);

std::string format_iso8601(UtcSeconds t);

constexpr double seconds_to_hours(double s) { return s / 3600.0; }

}  // namespace shipperf
