#pragma once

#include <string>
#include <string_view>

namespace arvote {

/// Lower-case hex SHA-256 of the given bytes.
std::string sha256_hex(std::string_view bytes);

/// SHA-256 of a file's contents; throws EnvironmentError if unreadable.
std::string sha256_file(const std::string& path);

}  // namespace arvote
