#pragma once

namespace opforge {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace opforge
