#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace bundlescope::toml {

// Minimal TOML subset: [section] headers, key = value with strings,
// integers, floats, booleans and single-line arrays of those, # comments.
// Enough for run configs; anything fancier is rejected loudly.
struct Value {
    enum class Type { kString, kInt, kFloat, kBool, kArray };
    Type type = Type::kString;
    std::string str;
    int64_t integer = 0;
    double real = 0.0;
    bool boolean = false;
    std::vector<Value> array;

    double as_number() const;  // int or float
};

class Table {
public:
    // Keys are "section.key" (or bare "key" before any section header).
    std::map<std::string, Value> values;

    bool has(const std::string& key) const { return values.count(key) != 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const;
    int64_t get_int(const std::string& key, int64_t fallback) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<int64_t> get_int_array(const std::string& key,
                                       const std::vector<int64_t>& fallback) const;
};

Table parse(const std::string& content);           // throws ConfigError
Table parse_file(const std::filesystem::path& p);  // throws ConfigError

}  // namespace bundlescope::toml
