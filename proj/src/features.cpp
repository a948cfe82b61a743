#include "srobench/features.hpp"

#include <algorithm>
#include <cmath>

namespace srobench {
namespace {

double safe_div(double num, double den) { return num / std::max(den, kFeatureEps); }
double flag(bool b) { return b ? 1.0 : 0.0; }

}  // namespace

double intersection_area(const BoundingBox& a, const BoundingBox& b) {
  const double iw = std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
  const double ih = std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  return iw * ih;
}

SpatialFeatures spatial_features(const BoundingBox& s, const BoundingBox& o) {
  SpatialFeatures f{};
  f[0] = s.x;
  f[1] = s.y;
  f[2] = s.w;
  f[3] = s.h;
  f[4] = o.x;
  f[5] = o.y;
  f[6] = o.w;
  f[7] = o.h;
  f[8] = std::log(std::max(s.w, kFeatureEps));
  f[9] = std::log(std::max(s.h, kFeatureEps));
  f[10] = std::log(std::max(o.w, kFeatureEps));
  f[11] = std::log(std::max(o.h, kFeatureEps));

  const double dx = o.center_x() - s.center_x();
  const double dy = o.center_y() - s.center_y();
  const double d = std::hypot(dx, dy);
  f[12] = d;
  f[13] = std::log(d + kFeatureEps);
  if (d >= kFeatureEps) {
    f[14] = dx / d;
    f[15] = dy / d;
  }

  f[16] = safe_div(s.h, s.w);
  f[17] = safe_div(o.h, o.w);
  f[18] = safe_div(s.h, o.h);
  f[19] = safe_div(s.w, o.w);

  const double area_s = s.area();
  const double area_o = o.area();
  const double root_s = std::sqrt(area_s);
  const double root_o = std::sqrt(area_o);
  f[20] = root_s;
  f[21] = root_o;
  f[22] = safe_div(root_s, root_o);
  f[23] = std::log(std::max(f[22], kFeatureEps));

  const double inter = intersection_area(s, o);
  const double uni = area_s + area_o - inter;
  f[24] = inter;
  f[25] = safe_div(inter, uni);
  const double rel_so = safe_div(inter, area_o);
  const double rel_os = safe_div(inter, area_s);
  f[26] = std::sqrt(rel_so);
  f[27] = std::sqrt(rel_os);

  const bool left = s.x < o.x;
  const bool above = s.y < o.y;
  f[28] = flag(rel_so < 0.25);
  f[29] = flag(rel_os < 0.25);
  f[30] = flag(rel_os > 0.85);
  f[31] = flag(left);
  f[32] = flag(above);
  f[33] = flag(above && left);
  f[34] = flag(above && !left);
  return f;
}

Normalizer fit_normalizer(std::span<const SpatialFeatures> train) {
  if (train.empty()) throw Error("fit_normalizer: empty training set");
  Normalizer n;
  const double count = static_cast<double>(train.size());
  for (std::size_t d = 0; d < kSpatialDims; ++d) {
    double sum = 0.0;
    for (const auto& f : train) sum += f[d];
    const double mean = sum / count;
    double ss = 0.0;
    for (const auto& f : train) ss += (f[d] - mean) * (f[d] - mean);
    n.mean[d] = mean;
    n.stddev[d] = std::max(std::sqrt(ss / count), kStdFloor);
  }
  return n;
}

SpatialFeatures normalize(const Normalizer& n, const SpatialFeatures& f) {
  SpatialFeatures z{};
  for (std::size_t d = 0; d < kSpatialDims; ++d) z[d] = (f[d] - n.mean[d]) / n.stddev[d];
  return z;
}

SpatialFeatures denormalize(const Normalizer& n, const SpatialFeatures& z) {
  SpatialFeatures f{};
  for (std::size_t d = 0; d < kSpatialDims; ++d) f[d] = n.mean[d] + n.stddev[d] * z[d];
  return f;
}

}  // namespace srobench
