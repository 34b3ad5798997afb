#pragma once

namespace harnn {

inline constexpr const char* kVersion = "harnn 0.1.0";
inline constexpr unsigned kCheckpointVersion = 1;

}  // namespace harnn
