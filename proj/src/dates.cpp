#include "bundlescope/dates.hpp"

#include <cctype>
#include <cstdio>

#include "bundlescope/errors.hpp"

namespace bundlescope {

namespace {

// Howard Hinnant's civil-calendar algorithms.
int64_t days_from_civil(int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<int64_t>(doe) - 719468;
}

void civil_from_days(int64_t z, int64_t& y, unsigned& m, unsigned& d) {
    z += 719468;
    const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y += m <= 2;
}

int parse_uint(std::string_view s, size_t pos, size_t len) {
    int v = 0;
    if (pos + len > s.size()) throw DataError("truncated date/time field");
    for (size_t i = pos; i < pos + len; ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i])))
            throw DataError("non-digit in date/time field: " + std::string(s));
        v = v * 10 + (s[i] - '0');
    }
    return v;
}

}  // namespace

Date make_date(int year, int month, int day) {
    return Date{static_cast<int32_t>(days_from_civil(year, static_cast<unsigned>(month),
                                                     static_cast<unsigned>(day)))};
}

void civil_from_date(Date d, int& year, int& month, int& day) {
    int64_t y;
    unsigned m, dd;
    civil_from_days(d.days, y, m, dd);
    year = static_cast<int>(y);
    month = static_cast<int>(m);
    day = static_cast<int>(dd);
}

int weekday(Date d) {
    // 1970-01-01 was a Thursday (index 3 with Monday = 0).
    int w = (d.days + 3) % 7;
    return w < 0 ? w + 7 : w;
}

std::string to_iso(Date d) {
    int y, m, dd;
    civil_from_date(d, y, m, dd);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, dd);
    return buf;
}

Date parse_iso_date(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-')
        throw DataError("expected YYYY-MM-DD, got '" + std::string(s) + "'");
    int y = parse_uint(s, 0, 4);
    int m = parse_uint(s, 5, 2);
    int d = parse_uint(s, 8, 2);
    if (m < 1 || m > 12 || d < 1 || d > 31)
        throw DataError("date out of range: '" + std::string(s) + "'");
    return make_date(y, m, d);
}

int64_t parse_rfc3339(std::string_view s) {
    // YYYY-MM-DDThh:mm:ss[.frac](Z|±hh:mm)
    if (s.size() < 20) throw DataError("timestamp too short: '" + std::string(s) + "'");
    if (s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != 't' && s[10] != ' ') ||
        s[13] != ':' || s[16] != ':')
        throw DataError("malformed timestamp: '" + std::string(s) + "'");
    int y = parse_uint(s, 0, 4);
    int mo = parse_uint(s, 5, 2);
    int d = parse_uint(s, 8, 2);
    int h = parse_uint(s, 11, 2);
    int mi = parse_uint(s, 14, 2);
    int se = parse_uint(s, 17, 2);
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || se > 60)
        throw DataError("timestamp field out of range: '" + std::string(s) + "'");
    size_t pos = 19;
    if (pos < s.size() && s[pos] == '.') {
        ++pos;
        size_t digits = 0;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
            ++pos;
            ++digits;
        }
        if (digits == 0) throw DataError("empty fractional seconds: '" + std::string(s) + "'");
    }
    if (pos >= s.size()) throw DataError("missing timezone: '" + std::string(s) + "'");
    int64_t offset = 0;
    if (s[pos] == 'Z' || s[pos] == 'z') {
        if (pos + 1 != s.size()) throw DataError("trailing data after Z: '" + std::string(s) + "'");
    } else if (s[pos] == '+' || s[pos] == '-') {
        if (pos + 6 != s.size() || s[pos + 3] != ':')
            throw DataError("malformed timezone offset: '" + std::string(s) + "'");
        int oh = parse_uint(s, pos + 1, 2);
        int om = parse_uint(s, pos + 4, 2);
        if (oh > 23 || om > 59)
            throw DataError("timezone offset out of range: '" + std::string(s) + "'");
        offset = static_cast<int64_t>(oh) * 3600 + om * 60;
        if (s[pos] == '-') offset = -offset;
    } else {
        throw DataError("malformed timezone: '" + std::string(s) + "'");
    }
    int64_t days = days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d));
    return days * 86400 + h * 3600 + mi * 60 + se - offset;
}

Date date_of_unix(int64_t unix_seconds) {
    int64_t days = unix_seconds / 86400;
    if (unix_seconds < 0 && unix_seconds % 86400 != 0) --days;
    return Date{static_cast<int32_t>(days)};
}

std::vector<Date> weekday_calendar(Date first, Date last) {
    std::vector<Date> out;
    for (int32_t d = first.days; d <= last.days; ++d) {
        Date day{d};
        if (is_business_day(day)) out.push_back(day);
    }
    return out;
}

}  // namespace bundlescope
