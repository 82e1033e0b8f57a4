#pragma once

#include <stdexcept>
#include <string>

namespace bundlescope {

// Error categories map 1:1 onto CLI exit codes (see tools/).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Violated internal invariant; indicates a bug, not bad input.
struct InternalError : std::logic_error {
    explicit InternalError(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace bundlescope
