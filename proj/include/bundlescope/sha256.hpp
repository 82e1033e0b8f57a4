#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace bundlescope {

// Hex-encoded SHA-256; used for manifest input/output digests.
std::string sha256_hex(std::string_view data);
std::string sha256_file_hex(const std::filesystem::path& p);

}  // namespace bundlescope
