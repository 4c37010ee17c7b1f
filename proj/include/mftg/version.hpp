#pragma once

namespace mftg {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mftg
