#pragma once

namespace vortexscale {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace vortexscale
