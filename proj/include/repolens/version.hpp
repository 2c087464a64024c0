#pragma once

namespace repolens {

inline constexpr const char* kToolVersion = "0.3.0";

}  // namespace repolens
