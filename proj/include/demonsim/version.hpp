#pragma once

namespace demonsim {

inline constexpr const char* kVersion = "demonsim 0.1.0";

}  // namespace demonsim
