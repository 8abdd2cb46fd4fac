#pragma once

namespace traffic {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace traffic
