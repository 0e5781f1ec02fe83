#pragma once

namespace cowqkd {

inline constexpr const char* kVersion = "0.1.0";

} // namespace cowqkd
