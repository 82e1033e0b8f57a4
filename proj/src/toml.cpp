#include "bundlescope/toml.hpp"

#include <cctype>
#include <charconv>

#include "bundlescope/errors.hpp"
#include "bundlescope/textio.hpp"

namespace bundlescope::toml {

double Value::as_number() const {
    if (type == Type::kInt) return static_cast<double>(integer);
    if (type == Type::kFloat) return real;
    throw ConfigError("config value is not numeric");
}

namespace {

std::string_view trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

// Strips a trailing comment that is not inside a quoted string.
std::string_view strip_comment(std::string_view s) {
    bool quoted = false;
    for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"') quoted = !quoted;
        if (s[i] == '#' && !quoted) return s.substr(0, i);
    }
    return s;
}

Value parse_scalar(std::string_view tok, size_t line_no) {
    Value v;
    if (tok.size() >= 2 && tok.front() == '"' && tok.back() == '"') {
        v.type = Value::Type::kString;
        std::string out;
        for (size_t i = 1; i + 1 < tok.size(); ++i) {
            if (tok[i] == '\\' && i + 2 < tok.size()) {
                ++i;
                switch (tok[i]) {
                    case 'n': out += '\n'; break;
                    case 't': out += '\t'; break;
                    case '"': out += '"'; break;
                    case '\\': out += '\\'; break;
                    default:
                        throw ConfigError("line " + std::to_string(line_no) +
                                          ": unsupported escape in string");
                }
            } else {
                out += tok[i];
            }
        }
        v.str = out;
        return v;
    }
    if (tok == "true" || tok == "false") {
        v.type = Value::Type::kBool;
        v.boolean = tok == "true";
        return v;
    }
    // Integer, then float.
    {
        int64_t iv = 0;
        auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), iv);
        if (ec == std::errc{} && p == tok.data() + tok.size()) {
            v.type = Value::Type::kInt;
            v.integer = iv;
            return v;
        }
    }
    {
        double dv = 0.0;
        auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), dv);
        if (ec == std::errc{} && p == tok.data() + tok.size()) {
            v.type = Value::Type::kFloat;
            v.real = dv;
            return v;
        }
    }
    throw ConfigError("line " + std::to_string(line_no) + ": cannot parse value '" +
                      std::string(tok) + "'");
}

Value parse_value(std::string_view tok, size_t line_no) {
    tok = trim(tok);
    if (tok.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty value");
    if (tok.front() == '[') {
        if (tok.back() != ']')
            throw ConfigError("line " + std::to_string(line_no) + ": unterminated array");
        Value v;
        v.type = Value::Type::kArray;
        std::string_view inner = trim(tok.substr(1, tok.size() - 2));
        if (inner.empty()) return v;
        size_t start = 0;
        bool quoted = false;
        for (size_t i = 0; i <= inner.size(); ++i) {
            if (i < inner.size() && inner[i] == '"') quoted = !quoted;
            if (i == inner.size() || (inner[i] == ',' && !quoted)) {
                v.array.push_back(parse_scalar(trim(inner.substr(start, i - start)), line_no));
                start = i + 1;
            }
        }
        return v;
    }
    return parse_scalar(tok, line_no);
}

}  // namespace

Table parse(const std::string& content) {
    Table table;
    std::string section;
    size_t line_no = 0;
    size_t start = 0;
    while (start <= content.size()) {
        size_t end = content.find('\n', start);
        if (end == std::string::npos) end = content.size();
        ++line_no;
        std::string_view line = trim(strip_comment(
            std::string_view(content.data() + start, end - start)));
        start = end + 1;
        if (line.empty()) {
            if (end == content.size()) break;
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(line_no) + ": malformed section");
            section = std::string(trim(line.substr(1, line.size() - 2)));
            if (section.empty())
                throw ConfigError("line " + std::to_string(line_no) + ": empty section name");
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        const std::string key(trim(line.substr(0, eq)));
        if (key.empty())
            throw ConfigError("line " + std::to_string(line_no) + ": empty key");
        const std::string full = section.empty() ? key : section + "." + key;
        table.values[full] = parse_value(line.substr(eq + 1), line_no);
        if (end == content.size()) break;
    }
    return table;
}

Table parse_file(const std::filesystem::path& p) {
    try {
        return parse(read_file(p));
    } catch (const DataError& e) {
        throw ConfigError("cannot read config: " + std::string(e.what()));
    }
}

std::string Table::get_string(const std::string& key, const std::string& fallback) const {
    auto it = values.find(key);
    if (it == values.end()) return fallback;
    if (it->second.type != Value::Type::kString)
        throw ConfigError("config field '" + key + "' must be a string");
    return it->second.str;
}

int64_t Table::get_int(const std::string& key, int64_t fallback) const {
    auto it = values.find(key);
    if (it == values.end()) return fallback;
    if (it->second.type != Value::Type::kInt)
        throw ConfigError("config field '" + key + "' must be an integer");
    return it->second.integer;
}

double Table::get_double(const std::string& key, double fallback) const {
    auto it = values.find(key);
    if (it == values.end()) return fallback;
    if (it->second.type != Value::Type::kInt && it->second.type != Value::Type::kFloat)
        throw ConfigError("config field '" + key + "' must be a number");
    return it->second.as_number();
}

bool Table::get_bool(const std::string& key, bool fallback) const {
    auto it = values.find(key);
    if (it == values.end()) return fallback;
    if (it->second.type != Value::Type::kBool)
        throw ConfigError("config field '" + key + "' must be a boolean");
    return it->second.boolean;
}

std::vector<int64_t> Table::get_int_array(const std::string& key,
                                          const std::vector<int64_t>& fallback) const {
    auto it = values.find(key);
    if (it == values.end()) return fallback;
    if (it->second.type != Value::Type::kArray)
        throw ConfigError("config field '" + key + "' must be an array");
    std::vector<int64_t> out;
    for (const auto& v : it->second.array) {
        if (v.type != Value::Type::kInt)
            throw ConfigError("config field '" + key + "' must hold integers");
        out.push_back(v.integer);
    }
    return out;
}

}  // namespace bundlescope::toml
