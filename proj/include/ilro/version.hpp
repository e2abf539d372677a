#pragma once

namespace ilro {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace ilro
