#pragma once

namespace dcebr {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace dcebr
