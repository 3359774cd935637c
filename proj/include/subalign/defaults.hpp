#pragma once

#include <cstddef>
#include <cstdint>

namespace subalign::defaults {

// Duration of one encoder frame: 10 ms features after two stride-2 convolutions.
inline constexpr double kFrameMs = 40.0;

// Median filter width applied along frames before attention DTW.
inline constexpr std::size_t kMedianWidth = 7;

// Negative attention values are replaced by -kClipEps before SBAAM.
inline constexpr double kClipEps = 0.01;

// Columns whose population std falls below this become all-zero.
inline constexpr double kStdFloor = 1e-9;

// TED subtitling guidelines.
inline constexpr int kCplLimit = 42;
inline constexpr double kCpsLimit = 21.0;

// Shifts below this are perceived as instantaneous; offered as a threshold,
// not applied by default.
inline constexpr std::int64_t kPerceptionThresholdMs = 120;
inline constexpr std::int64_t kShiftThresholdMs = 0;

// Relative tolerance under which two alignment scores count as tied.
inline constexpr double kTieTolerance = 1e-9;

} // namespace subalign::defaults
