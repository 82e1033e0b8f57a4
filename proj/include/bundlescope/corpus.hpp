#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <unordered_map>
#include <vector>

#include "bundlescope/dates.hpp"

namespace bundlescope::corpus {

struct MessageRecord {
    int64_t unix_ts = 0;
    std::string sender;
    std::string receiver;
    std::string text;
};

struct ParseResult {
    std::vector<MessageRecord> records;
    size_t malformed = 0;
    std::vector<std::string> errors;  // "line N: reason", capped
};

// JSON Lines with fields ts (RFC 3339), from, to, text. In lenient mode a
// malformed line is skipped and counted; in strict mode it is fatal.
ParseResult parse_messages(std::istream& in, bool strict = false);
ParseResult parse_messages_file(const std::filesystem::path& p, bool strict = false);

// Lowercased tokens split on anything that is not alphanumeric, '&' or
// "'"; the two survive word-internally ("s&p", "don't") but are stripped
// at token edges; pure-number tokens are dropped. Bytes >= 0x80 are kept
// as word characters so non-ASCII words pass through whole.
std::vector<std::string> tokenize(std::string_view text);

// Daily business-date x word count matrix. totals(t) is the row sum over
// the FULL pre-filter vocabulary and is stored independently: vocabulary
// filtering must never change N(t).
class DailyFrequencyMatrix {
public:
    std::vector<Date> dates;
    std::vector<std::string> vocabulary;             // unique, sorted
    std::vector<std::vector<uint32_t>> counts;       // [date][word]
    std::vector<uint64_t> totals;                    // N(t), full vocabulary

    size_t n_dates() const { return dates.size(); }
    size_t n_words() const { return vocabulary.size(); }

    uint64_t word_total(size_t w) const;
    std::vector<double> word_series(size_t w) const;
    std::vector<double> totals_series() const;

    // Restriction to a subset of word indices; totals are carried over.
    DailyFrequencyMatrix submatrix(const std::vector<size_t>& word_idx) const;
    // Restriction to a date range [first, last) by row index.
    DailyFrequencyMatrix date_slice(size_t first, size_t last) const;

    // Rows with N(t) > 0 (the ones eta and correlation math may use).
    std::vector<size_t> active_days() const;

    void check_invariants() const;  // throws InternalError
};

struct BuildStats {
    size_t dropped_outside_calendar = 0;
};

// Aggregates tokens per (UTC date, word) over the supplied calendar.
// Messages on non-calendar dates are dropped and counted. Throws
// DataError if the calendar is empty or no message falls on it.
DailyFrequencyMatrix build_matrix(const std::vector<MessageRecord>& records,
                                  const std::vector<Date>& calendar,
                                  BuildStats* stats = nullptr);

// Keeps words with total count STRICTLY greater than min_total. N(t) is
// untouched. Throws DataError when nothing survives.
DailyFrequencyMatrix filter_vocabulary(const DailyFrequencyMatrix& m, uint64_t min_total);

struct ZipfFit {
    double exponent = 0.0;
    double ks_statistic = 0.0;
    double ks_p = 0.0;
    double xmin = 0.0;
};

// Continuous-approximation power-law MLE over word total counts >= xmin
// (default: smallest positive total), KS distance against the fitted law
// and a parametric-bootstrap KS p.
ZipfFit zipf_diagnostic(const DailyFrequencyMatrix& m, uint64_t seed,
                        size_t bootstrap = 500, double xmin = 0.0);

// ------------------------------------------------------------------- i/o

// CSV export: header "date,word,count", zero cells omitted.
std::string matrix_to_csv(const DailyFrequencyMatrix& m);

// Compact binary cache; layout documented at write_matrix_cache().
void write_matrix_cache(const std::filesystem::path& p, const DailyFrequencyMatrix& m);
DailyFrequencyMatrix read_matrix_cache(const std::filesystem::path& p);

std::vector<Date> read_calendar_csv(const std::filesystem::path& p);

}  // namespace bundlescope::corpus
