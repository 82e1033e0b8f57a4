#include "bundlescope/textio.hpp"

#include <atomic>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "bundlescope/errors.hpp"

namespace bundlescope {

std::string format_double(double v) {
    char buf[40];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw InternalError("format_double: to_chars failed");
    return std::string(buf, ptr);
}

std::vector<std::string> split(std::string_view line, char sep) {
    std::vector<std::string> out;
    size_t start = 0;
    while (true) {
        size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(line.substr(start));
            break;
        }
        out.emplace_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

double parse_double_field(std::string_view s, const char* what) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw DataError(std::string(what) + ": expected a number, got '" + std::string(s) + "'");
    return v;
}

int64_t parse_int_field(std::string_view s, const char* what) {
    int64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw DataError(std::string(what) + ": expected an integer, got '" + std::string(s) + "'");
    return v;
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw DataError("error reading file: " + p.string());
    return ss.str();
}

std::vector<std::string> read_lines(const std::filesystem::path& p) {
    std::string content = read_file(p);
    std::vector<std::string> lines;
    size_t start = 0;
    while (start < content.size()) {
        size_t pos = content.find('\n', start);
        if (pos == std::string::npos) {
            lines.emplace_back(content.substr(start));
            break;
        }
        std::string_view line(content.data() + start, pos - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.emplace_back(line);
        start = pos + 1;
    }
    return lines;
}

void atomic_write(const std::filesystem::path& p, std::string_view content) {
    namespace fs = std::filesystem;
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    fs::path tmp = p;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot open for writing: " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw DataError("write failed: " + tmp.string());
    }
    fs::rename(tmp, p);
}

void parallel_for(size_t n, int threads, const std::function<void(size_t)>& fn) {
    if (threads <= 1 || n < 2) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    size_t workers = std::min<size_t>(static_cast<size_t>(threads), n);
    std::atomic<size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (!failed.load(std::memory_order_relaxed)) {
                size_t i = next.fetch_add(1, std::memory_order_relaxed);
                if (i >= n) break;
                try {
                    fn(i);
                } catch (...) {
                    bool expected = false;
                    if (failed.compare_exchange_strong(expected, true))
                        error = std::current_exception();
                    break;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failed && error) std::rethrow_exception(error);
}

}  // namespace bundlescope
