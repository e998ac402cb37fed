#include "shipperf/time_utils.hpp"

#include <cstdio>
#include <ctime>
#include <stdexcept>

namespace shipperf {

UtcSeconds parse_iso8601(const std::string& text) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    char sep = 0;
    int n = std::sscanf(text.c_str(), "%d-%d-%d%c%d:%d:%d", &y, &mo, &d, &sep, &h, &mi, &s);
    if (n < 3 || (n > 3 && sep != 'T' && sep != ' '))
        throw std::invalid_argument("bad ISO-8601 timestamp: '" + text + "'");
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || s > 60)
        throw std::invalid_argument("bad ISO-8601 timestamp: '" + text + "'");
    std::tm tm{};
    tm.tm_year = y - 1900;
    tm.tm_mon = mo - 1;
    tm.tm_mday = d;
    tm.tm_hour = h;
    tm.tm_min = mi;
    tm.tm_sec = s;
    std::tm probe = tm;
    time_t t = timegm(&probe);
    // timegm normalizes out-of-range days (e.g. Feb 30); reject them.
    if (probe.tm_mday != tm.tm_mday || probe.tm_mon != tm.tm_mon)
        throw std::invalid_argument("bad ISO-8601 timestamp: '" + text + "'");
    return static_cast<UtcSeconds>(t);
}

std::string format_iso8601(UtcSeconds t) {
    time_t tt = static_cast<time_t>(t);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
    return buf;
}

}  // namespace shipperf
