#pragma once

namespace adiavac {

inline constexpr const char* version = "0.1.0";

}  // namespace adiavac
