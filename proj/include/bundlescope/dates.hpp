#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace bundlescope {

// Civil date stored as days since 1970-01-01.
struct Date {
    int32_t days = 0;

    friend bool operator==(Date a, Date b) { return a.days == b.days; }
    friend bool operator!=(Date a, Date b) { return a.days != b.days; }
    friend bool operator<(Date a, Date b) { return a.days < b.days; }
    friend bool operator<=(Date a, Date b) { return a.days <= b.days; }
    friend bool operator>(Date a, Date b) { return a.days > b.days; }
    friend bool operator>=(Date a, Date b) { return a.days >= b.days; }
};

Date make_date(int year, int month, int day);
void civil_from_date(Date d, int& year, int& month, int& day);

// 0 = Monday ... 6 = Sunday.
int weekday(Date d);
inline bool is_business_day(Date d) { return weekday(d) < 5; }

std::string to_iso(Date d);

// "YYYY-MM-DD"; throws DataError on malformed input.
Date parse_iso_date(std::string_view s);

// RFC 3339 timestamp, e.g. "2007-01-03T09:31:22Z" or with a "+05:00"
// offset. Returns Unix seconds (UTC). Throws DataError on malformed input.
int64_t parse_rfc3339(std::string_view s);

// Calendar date (UTC) containing the given Unix instant.
Date date_of_unix(int64_t unix_seconds);

// All Mon-Fri dates in [first, last], inclusive.
std::vector<Date> weekday_calendar(Date first, Date last);

}  // namespace bundlescope
