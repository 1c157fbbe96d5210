#pragma once

namespace driftboost {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace driftboost
