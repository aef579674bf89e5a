#pragma once

namespace specrank {

inline constexpr const char* kVersion = "specrank-0.1.0";

}  // namespace specrank
