#pragma once

namespace ebma {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace ebma
