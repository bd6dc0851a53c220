#pragma once

namespace omtopo {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace omtopo
