#pragma once

namespace bethelab {
inline constexpr const char* kCodeVersion = "0.1.0";
}
