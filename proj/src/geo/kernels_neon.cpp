#include <arm_neon.h>

#include "mep/geo/kernels.hpp"

namespace mep::geo::kernels {

namespace {

inline float64x2_t chord2_lane(const double* x, const double* y, const double* z,
                               float64x2_t cx, float64x2_t cy, float64x2_t cz) {
  const float64x2_t dx = vsubq_f64(vld1q_f64(x), cx);
  const float64x2_t dy = vsubq_f64(vld1q_f64(y), cy);
  const float64x2_t dz = vsubq_f64(vld1q_f64(z), cz);
  // vmulq + vaddq, never vfmaq: must round like the scalar path
  const float64x2_t xy = vaddq_f64(vmulq_f64(dx, dx), vmulq_f64(dy, dy));
  return vaddq_f64(xy, vmulq_f64(dz, dz));
}

inline double chord2_one(const UnitVectorsSoA& pts, std::size_t i, UnitVector c) {
  const double dx = pts.x[i] - c.x;
  const double dy = pts.y[i] - c.y;
  const double dz = pts.z[i] - c.z;
  return (dx * dx + dy * dy) + dz * dz;
}

void chord2_neon(const UnitVectorsSoA& pts, UnitVector c, std::span<double> out) {
  const std::size_t n = pts.size();
  const float64x2_t cx = vdupq_n_f64(c.x);
  const float64x2_t cy = vdupq_n_f64(c.y);
  const float64x2_t cz = vdupq_n_f64(c.z);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(out.data() + i,
              chord2_lane(pts.x.data() + i, pts.y.data() + i, pts.z.data() + i, cx, cy, cz));
  }
  for (; i < n; ++i) out[i] = chord2_one(pts, i, c);
}

std::size_t select_within_neon(const UnitVectorsSoA& pts, UnitVector c, double limit,
                               std::span<std::uint32_t> out) {
  const std::size_t n = pts.size();
  const float64x2_t cx = vdupq_n_f64(c.x);
  const float64x2_t cy = vdupq_n_f64(c.y);
  const float64x2_t cz = vdupq_n_f64(c.z);
  const float64x2_t lim = vdupq_n_f64(limit);
  std::size_t count = 0;
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const uint64x2_t le = vcleq_f64(
        chord2_lane(pts.x.data() + i, pts.y.data() + i, pts.z.data() + i, cx, cy, cz), lim);
    if (vgetq_lane_u64(le, 0) != 0) out[count++] = static_cast<std::uint32_t>(i);
    if (vgetq_lane_u64(le, 1) != 0) out[count++] = static_cast<std::uint32_t>(i + 1);
  }
  for (; i < n; ++i) {
    if (chord2_one(pts, i, c) <= limit) out[count++] = static_cast<std::uint32_t>(i);
  }
  return count;
}

}  // namespace

const ChordKernels& neon_kernels() noexcept {
  static const ChordKernels k{"neon", &chord2_neon, &select_within_neon};
  return k;
}

}  // namespace mep::geo::kernels
