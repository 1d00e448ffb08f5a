#pragma once

namespace kyano {
inline constexpr const char* kVersion = "0.1.0";
}
