#pragma once

namespace nrb {

inline constexpr const char* library_version = "0.1.0";
inline constexpr int output_schema_version = 1;

} // namespace nrb
