#pragma once

namespace cqwave {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace cqwave
