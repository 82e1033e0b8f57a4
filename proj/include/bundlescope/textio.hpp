#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace bundlescope {

// Shortest round-trip decimal representation (std::to_chars). Used for
// every CSV/report number so outputs are byte-stable across runs.
std::string format_double(double v);

std::vector<std::string> split(std::string_view line, char sep);

// Whole-field numeric parses; throw DataError naming the field on junk.
double parse_double_field(std::string_view s, const char* what);
int64_t parse_int_field(std::string_view s, const char* what);

std::string read_file(const std::filesystem::path& p);
std::vector<std::string> read_lines(const std::filesystem::path& p);

// Write via temp file + rename so readers never see partial output.
void atomic_write(const std::filesystem::path& p, std::string_view content);

// Deterministic work distribution: fn(i) must depend only on i. Results
// are identical for any thread count, including 1.
void parallel_for(size_t n, int threads, const std::function<void(size_t)>& fn);

}  // namespace bundlescope
