#include "bundlescope/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "bundlescope/errors.hpp"
#include "bundlescope/stats.hpp"
#include "bundlescope/textio.hpp"

namespace bundlescope::corpus {

using nlohmann::json;

ParseResult parse_messages(std::istream& in, bool strict) {
    ParseResult out;
    std::string line;
    size_t line_no = 0;
    constexpr size_t kMaxStoredErrors = 100;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::string reason;
        try {
            json j = json::parse(line);
            if (!j.contains("ts") || !j.contains("from") || !j.contains("to") ||
                !j.contains("text")) {
                reason = "missing field (need ts, from, to, text)";
            } else {
                MessageRecord rec;
                rec.unix_ts = parse_rfc3339(j.at("ts").get<std::string>());
                rec.sender = j.at("from").get<std::string>();
                rec.receiver = j.at("to").get<std::string>();
                rec.text = j.at("text").get<std::string>();
                out.records.push_back(std::move(rec));
                continue;
            }
        } catch (const json::exception& e) {
            reason = e.what();
        } catch (const DataError& e) {
            reason = e.what();
        }
        if (strict)
            throw DataError("line " + std::to_string(line_no) + ": " + reason);
        ++out.malformed;
        if (out.errors.size() < kMaxStoredErrors)
            out.errors.push_back("line " + std::to_string(line_no) + ": " + reason);
    }
    if (in.bad()) throw DataError("unreadable message stream");
    return out;
}

ParseResult parse_messages_file(const std::filesystem::path& p, bool strict) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw DataError("cannot open messages file: " + p.string());
    return parse_messages(in, strict);
}

namespace {

inline bool is_word_char(unsigned char c) {
    return std::isalnum(c) || c == '&' || c == '\'' || c >= 0x80;
}

inline bool is_edge_punct(unsigned char c) { return c == '&' || c == '\''; }

bool all_digits(std::string_view t) {
    for (unsigned char c : t)
        if (!std::isdigit(c)) return false;
    return !t.empty();
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    size_t i = 0;
    const size_t n = text.size();
    while (i < n) {
        while (i < n && !is_word_char(static_cast<unsigned char>(text[i]))) ++i;
        size_t start = i;
        while (i < n && is_word_char(static_cast<unsigned char>(text[i]))) ++i;
        if (start == i) continue;
        size_t lo = start, hi = i;
        while (lo < hi && is_edge_punct(static_cast<unsigned char>(text[lo]))) ++lo;
        while (hi > lo && is_edge_punct(static_cast<unsigned char>(text[hi - 1]))) --hi;
        if (lo == hi) continue;
        std::string tok(text.substr(lo, hi - lo));
        for (char& c : tok)
            c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (all_digits(tok)) continue;
        tokens.push_back(std::move(tok));
    }
    return tokens;
}

uint64_t DailyFrequencyMatrix::word_total(size_t w) const {
    uint64_t s = 0;
    for (const auto& row : counts) s += row[w];
    return s;
}

std::vector<double> DailyFrequencyMatrix::word_series(size_t w) const {
    std::vector<double> s(n_dates());
    for (size_t t = 0; t < n_dates(); ++t) s[t] = static_cast<double>(counts[t][w]);
    return s;
}

std::vector<double> DailyFrequencyMatrix::totals_series() const {
    return std::vector<double>(totals.begin(), totals.end());
}

DailyFrequencyMatrix DailyFrequencyMatrix::submatrix(const std::vector<size_t>& word_idx) const {
    DailyFrequencyMatrix out;
    out.dates = dates;
    out.totals = totals;
    out.vocabulary.reserve(word_idx.size());
    for (size_t w : word_idx) out.vocabulary.push_back(vocabulary.at(w));
    out.counts.resize(n_dates());
    for (size_t t = 0; t < n_dates(); ++t) {
        out.counts[t].reserve(word_idx.size());
        for (size_t w : word_idx) out.counts[t].push_back(counts[t][w]);
    }
    return out;
}

DailyFrequencyMatrix DailyFrequencyMatrix::date_slice(size_t first, size_t last) const {
    if (first > last || last > n_dates()) throw InternalError("date_slice: bad range");
    DailyFrequencyMatrix out;
    out.vocabulary = vocabulary;
    out.dates.assign(dates.begin() + static_cast<ptrdiff_t>(first),
                     dates.begin() + static_cast<ptrdiff_t>(last));
    out.totals.assign(totals.begin() + static_cast<ptrdiff_t>(first),
                      totals.begin() + static_cast<ptrdiff_t>(last));
    out.counts.assign(counts.begin() + static_cast<ptrdiff_t>(first),
                      counts.begin() + static_cast<ptrdiff_t>(last));
    return out;
}

std::vector<size_t> DailyFrequencyMatrix::active_days() const {
    std::vector<size_t> idx;
    for (size_t t = 0; t < n_dates(); ++t)
        if (totals[t] > 0) idx.push_back(t);
    return idx;
}

void DailyFrequencyMatrix::check_invariants() const {
    if (counts.size() != dates.size() || totals.size() != dates.size())
        throw InternalError("matrix: row count mismatch");
    for (size_t t = 1; t < dates.size(); ++t)
        if (!(dates[t - 1] < dates[t])) throw InternalError("matrix: dates not increasing");
    for (const auto& row : counts)
        if (row.size() != vocabulary.size()) throw InternalError("matrix: ragged rows");
    std::set<std::string> uniq(vocabulary.begin(), vocabulary.end());
    if (uniq.size() != vocabulary.size()) throw InternalError("matrix: duplicate words");
}

DailyFrequencyMatrix build_matrix(const std::vector<MessageRecord>& records,
                                  const std::vector<Date>& calendar, BuildStats* stats) {
    if (calendar.empty()) throw DataError("build_matrix: empty calendar");
    std::vector<Date> cal = calendar;
    std::sort(cal.begin(), cal.end());
    cal.erase(std::unique(cal.begin(), cal.end()), cal.end());
    std::unordered_map<int32_t, size_t> date_row;
    date_row.reserve(cal.size());
    for (size_t i = 0; i < cal.size(); ++i) date_row.emplace(cal[i].days, i);

    // First pass: per-day word counts keyed by string.
    std::vector<std::map<std::string, uint32_t>> day_counts(cal.size());
    std::vector<uint64_t> totals(cal.size(), 0);
    size_t dropped = 0;
    size_t placed = 0;
    for (const auto& rec : records) {
        const Date d = date_of_unix(rec.unix_ts);
        auto it = date_row.find(d.days);
        if (it == date_row.end()) {
            ++dropped;
            continue;
        }
        ++placed;
        for (auto& tok : tokenize(rec.text)) {
            ++day_counts[it->second][tok];
            ++totals[it->second];
        }
    }
    if (stats) stats->dropped_outside_calendar = dropped;
    if (placed == 0 && !records.empty())
        throw DataError("build_matrix: every message falls outside the calendar");

    std::set<std::string> vocab_set;
    for (const auto& dc : day_counts)
        for (const auto& [w, c] : dc) vocab_set.insert(w);

    DailyFrequencyMatrix m;
    m.dates = cal;
    m.vocabulary.assign(vocab_set.begin(), vocab_set.end());
    m.totals = totals;
    std::unordered_map<std::string_view, size_t> word_col;
    word_col.reserve(m.vocabulary.size());
    for (size_t w = 0; w < m.vocabulary.size(); ++w) word_col.emplace(m.vocabulary[w], w);
    m.counts.assign(cal.size(), std::vector<uint32_t>(m.vocabulary.size(), 0));
    for (size_t t = 0; t < cal.size(); ++t)
        for (const auto& [w, c] : day_counts[t]) m.counts[t][word_col.at(w)] = c;
    return m;
}

DailyFrequencyMatrix filter_vocabulary(const DailyFrequencyMatrix& m, uint64_t min_total) {
    std::vector<size_t> keep;
    for (size_t w = 0; w < m.n_words(); ++w)
        if (m.word_total(w) > min_total) keep.push_back(w);
    if (keep.empty())
        throw DataError("filter_vocabulary: no word exceeds total " +
                        std::to_string(min_total));
    return m.submatrix(keep);
}

ZipfFit zipf_diagnostic(const DailyFrequencyMatrix& m, uint64_t seed, size_t bootstrap,
                        double xmin) {
    if (m.n_words() < 100) throw DataError("zipf_diagnostic: need at least 100 words");
    std::vector<double> totals;
    totals.reserve(m.n_words());
    for (size_t w = 0; w < m.n_words(); ++w) {
        const double c = static_cast<double>(m.word_total(w));
        if (c > 0.0) totals.push_back(c);
    }
    if (xmin <= 0.0) xmin = *std::min_element(totals.begin(), totals.end());

    ZipfFit fit;
    fit.xmin = xmin;
    fit.exponent = stats::powerlaw_fit(totals, xmin);

    std::vector<double> tail;
    for (double v : totals)
        if (v >= xmin) tail.push_back(v);

    const double xm = xmin;
    auto pareto_cdf = [](double alpha, double x0) {
        return [alpha, x0](double x) {
            return x < x0 ? 0.0 : 1.0 - std::pow(x / x0, 1.0 - alpha);
        };
    };
    fit.ks_statistic = stats::ks_statistic(tail, pareto_cdf(fit.exponent, xm));

    // Parametric bootstrap: resample from the fitted law, refit, compare.
    if (bootstrap < 500) bootstrap = 500;
    size_t exceed = 0;
    const size_t n = tail.size();
    for (size_t b = 0; b < bootstrap; ++b) {
        Rng rng(derive_seed(seed, b));
        std::vector<double> sim(n);
        for (size_t i = 0; i < n; ++i) {
            double u = rng.next_double();
            while (u <= 0.0) u = rng.next_double();
            sim[i] = xm * std::pow(u, -1.0 / (fit.exponent - 1.0));
        }
        const double alpha_b = stats::powerlaw_fit(sim, xm);
        const double d_b = stats::ks_statistic(sim, pareto_cdf(alpha_b, xm));
        if (d_b >= fit.ks_statistic) ++exceed;
    }
    // Add-one convention keeps the bootstrap p away from exact zero.
    fit.ks_p = static_cast<double>(exceed + 1) / static_cast<double>(bootstrap + 1);
    return fit;
}

std::string matrix_to_csv(const DailyFrequencyMatrix& m) {
    std::string out = "date,word,count\n";
    for (size_t t = 0; t < m.n_dates(); ++t) {
        const std::string day = to_iso(m.dates[t]);
        for (size_t w = 0; w < m.n_words(); ++w) {
            if (m.counts[t][w] == 0) continue;
            out += day;
            out += ',';
            out += m.vocabulary[w];
            out += ',';
            out += std::to_string(m.counts[t][w]);
            out += '\n';
        }
    }
    return out;
}

namespace {

constexpr char kCacheMagic[4] = {'B', 'S', 'M', 'X'};
constexpr uint8_t kCacheVersion = 1;

template <typename T>
void put(std::string& buf, T v) {
    char tmp[sizeof(T)];
    std::memcpy(tmp, &v, sizeof(T));
    buf.append(tmp, sizeof(T));
}

template <typename T>
T take(const std::string& buf, size_t& pos) {
    if (pos + sizeof(T) > buf.size()) throw DataError("matrix cache: truncated");
    T v;
    std::memcpy(&v, buf.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
}

}  // namespace

void write_matrix_cache(const std::filesystem::path& p, const DailyFrequencyMatrix& m) {
    // Layout (little-endian): magic "BSMX", version byte, u32 n_dates,
    // u32 n_words, i32 date days[], u64 totals[], vocabulary as
    // (u16 len, bytes)[], rows as CSR: per row u32 nnz then (u32 word,
    // u32 count) pairs.
    std::string buf;
    buf.append(kCacheMagic, 4);
    put<uint8_t>(buf, kCacheVersion);
    put<uint32_t>(buf, static_cast<uint32_t>(m.n_dates()));
    put<uint32_t>(buf, static_cast<uint32_t>(m.n_words()));
    for (Date d : m.dates) put<int32_t>(buf, d.days);
    for (uint64_t t : m.totals) put<uint64_t>(buf, t);
    for (const auto& w : m.vocabulary) {
        if (w.size() > 0xffff) throw DataError("matrix cache: word too long");
        put<uint16_t>(buf, static_cast<uint16_t>(w.size()));
        buf.append(w);
    }
    for (const auto& row : m.counts) {
        uint32_t nnz = 0;
        for (uint32_t c : row) nnz += c != 0;
        put<uint32_t>(buf, nnz);
        for (size_t w = 0; w < row.size(); ++w) {
            if (row[w] == 0) continue;
            put<uint32_t>(buf, static_cast<uint32_t>(w));
            put<uint32_t>(buf, row[w]);
        }
    }
    atomic_write(p, buf);
}

DailyFrequencyMatrix read_matrix_cache(const std::filesystem::path& p) {
    const std::string buf = read_file(p);
    size_t pos = 0;
    if (buf.size() < 5 || std::memcmp(buf.data(), kCacheMagic, 4) != 0)
        throw DataError("matrix cache: bad magic in " + p.string());
    pos = 4;
    const auto version = take<uint8_t>(buf, pos);
    if (version != kCacheVersion)
        throw DataError("matrix cache: unsupported version " + std::to_string(version));
    const auto n_dates = take<uint32_t>(buf, pos);
    const auto n_words = take<uint32_t>(buf, pos);
    DailyFrequencyMatrix m;
    m.dates.resize(n_dates);
    for (auto& d : m.dates) d.days = take<int32_t>(buf, pos);
    m.totals.resize(n_dates);
    for (auto& t : m.totals) t = take<uint64_t>(buf, pos);
    m.vocabulary.resize(n_words);
    for (auto& w : m.vocabulary) {
        const auto len = take<uint16_t>(buf, pos);
        if (pos + len > buf.size()) throw DataError("matrix cache: truncated");
        w.assign(buf, pos, len);
        pos += len;
    }
    m.counts.assign(n_dates, std::vector<uint32_t>(n_words, 0));
    for (auto& row : m.counts) {
        const auto nnz = take<uint32_t>(buf, pos);
        for (uint32_t i = 0; i < nnz; ++i) {
            const auto w = take<uint32_t>(buf, pos);
            const auto c = take<uint32_t>(buf, pos);
            if (w >= n_words) throw DataError("matrix cache: word index out of range");
            row[w] = c;
        }
    }
    m.check_invariants();
    return m;
}

std::vector<Date> read_calendar_csv(const std::filesystem::path& p) {
    std::vector<Date> out;
    for (const auto& line : read_lines(p)) {
        if (line.empty() || line == "date") continue;
        out.push_back(parse_iso_date(line));
    }
    if (out.empty()) throw DataError("calendar file has no dates: " + p.string());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace bundlescope::corpus
