#pragma once

namespace decoh {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace decoh
