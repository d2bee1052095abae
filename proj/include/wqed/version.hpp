#pragma once

namespace wqed {

inline constexpr const char* kToolName = "wqed";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace wqed
