#pragma once

namespace magnomech {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace magnomech
