#pragma once

namespace iffl {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace iffl
