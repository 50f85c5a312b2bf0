#pragma once

namespace ridcov {

inline constexpr const char* kVersion = "0.1.0";

} // namespace ridcov
