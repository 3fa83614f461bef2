#pragma once

namespace irtgrid {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace irtgrid
