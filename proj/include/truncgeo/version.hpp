#pragma once

namespace truncgeo {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace truncgeo
