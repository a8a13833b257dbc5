#pragma once

namespace gps {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace gps
