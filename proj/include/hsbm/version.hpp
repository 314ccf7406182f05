#pragma once

namespace hsbm {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace hsbm
