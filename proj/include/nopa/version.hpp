#pragma once

namespace nopa {

inline constexpr const char* kToolkitVersion = "1.0.0";

}  // namespace nopa
