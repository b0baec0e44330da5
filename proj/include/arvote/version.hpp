#pragma once

namespace arvote {

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace arvote
