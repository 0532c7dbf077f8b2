#pragma once

namespace expsamp {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace expsamp
