#pragma once

namespace pdna {
inline constexpr const char* kVersion = "0.1.0";
}
