#pragma once

namespace recfair {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace recfair
