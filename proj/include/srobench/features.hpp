#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "srobench/types.hpp"

namespace srobench {

inline constexpr std::size_t kSpatialDims = 35;
inline constexpr double kFeatureEps = 1e-6;
inline constexpr double kStdFloor = 1e-8;

// Geometry of a (subject, object) box pair. Slot layout:
//   0-3   x_S y_S w_S h_S            4-7   x_O y_O w_O h_O
//   8-11  ln w_S, ln h_S, ln w_O, ln h_O
//   12    center distance d          13    ln(d + eps)
//   14-15 unit vector S->O centers ((0,0) when d < eps)
//   16-19 h_S/w_S, h_O/w_O, h_S/h_O, w_S/w_O
//   20-21 sqrt(area_S), sqrt(area_O)  22-23 their ratio and its ln
//   24    intersection area           25    IoU
//   26    sqrt(I/area_O)             27    sqrt(I/area_S)
//   28    I/area_O < 0.25            29    I/area_S < 0.25
//   30    I/area_S > 0.85            31    x_S < x_O
//   32    y_S < y_O                  33    (y_S < y_O) and (x_S < x_O)
//   34    (y_S < y_O) and not (x_S < x_O)
using SpatialFeatures = std::array<double, kSpatialDims>;

namespace slot {
inline constexpr std::size_t kDistance = 12;
inline constexpr std::size_t kUnitX = 14;
inline constexpr std::size_t kUnitY = 15;
inline constexpr std::size_t kIntersection = 24;
inline constexpr std::size_t kIoU = 25;
inline constexpr std::size_t kRelOverlapSO = 26;
inline constexpr std::size_t kRelOverlapOS = 27;
inline constexpr std::size_t kFirstBinary = 28;
}  // namespace slot

SpatialFeatures spatial_features(const BoundingBox& subject, const BoundingBox& object);

double intersection_area(const BoundingBox& a, const BoundingBox& b);

// Per-dimension z-score parameters fit on training features.
struct Normalizer {
  SpatialFeatures mean{};
  SpatialFeatures stddev{};
};

// Sample mean and population standard deviation, std clamped to kStdFloor.
Normalizer fit_normalizer(std::span<const SpatialFeatures> train);
SpatialFeatures normalize(const Normalizer& n, const SpatialFeatures& f);
SpatialFeatures denormalize(const Normalizer& n, const SpatialFeatures& z);

}  // namespace srobench
