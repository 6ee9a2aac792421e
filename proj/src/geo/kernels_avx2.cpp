// Built with -mavx2 -mno-fma; only reached after a runtime CPU check.
#include <immintrin.h>

#include "mep/geo/kernels.hpp"

namespace mep::geo::kernels {

namespace {

inline __m256d chord2_lane(const double* x, const double* y, const double* z, __m256d cx,
                           __m256d cy, __m256d cz) {
  const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(x), cx);
  const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(y), cy);
  const __m256d dz = _mm256_sub_pd(_mm256_loadu_pd(z), cz);
  const __m256d xy = _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
  return _mm256_add_pd(xy, _mm256_mul_pd(dz, dz));
}

inline double chord2_one(const UnitVectorsSoA& pts, std::size_t i, UnitVector c) {
  const double dx = pts.x[i] - c.x;
  const double dy = pts.y[i] - c.y;
  const double dz = pts.z[i] - c.z;
  return (dx * dx + dy * dy) + dz * dz;
}

void chord2_avx2(const UnitVectorsSoA& pts, UnitVector c, std::span<double> out) {
  const std::size_t n = pts.size();
  const __m256d cx = _mm256_set1_pd(c.x);
  const __m256d cy = _mm256_set1_pd(c.y);
  const __m256d cz = _mm256_set1_pd(c.z);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out.data() + i,
                     chord2_lane(pts.x.data() + i, pts.y.data() + i, pts.z.data() + i, cx, cy, cz));
  }
  for (; i < n; ++i) out[i] = chord2_one(pts, i, c);
}

std::size_t select_within_avx2(const UnitVectorsSoA& pts, UnitVector c, double limit,
                               std::span<std::uint32_t> out) {
  const std::size_t n = pts.size();
  const __m256d cx = _mm256_set1_pd(c.x);
  const __m256d cy = _mm256_set1_pd(c.y);
  const __m256d cz = _mm256_set1_pd(c.z);
  const __m256d lim = _mm256_set1_pd(limit);
  std::size_t count = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d2 =
        chord2_lane(pts.x.data() + i, pts.y.data() + i, pts.z.data() + i, cx, cy, cz);
    // ordered compare: NaN slots (no position) never pass
    int mask = _mm256_movemask_pd(_mm256_cmp_pd(d2, lim, _CMP_LE_OQ));
    while (mask != 0) {
      const int bit = __builtin_ctz(static_cast<unsigned>(mask));
      out[count++] = static_cast<std::uint32_t>(i + static_cast<std::size_t>(bit));
      mask &= mask - 1;
    }
  }
  for (; i < n; ++i) {
    if (chord2_one(pts, i, c) <= limit) out[count++] = static_cast<std::uint32_t>(i);
  }
  return count;
}

}  // namespace

const ChordKernels& avx2_kernels() noexcept {
  static const ChordKernels k{"avx2", &chord2_avx2, &select_within_avx2};
  return k;
}

}  // namespace mep::geo::kernels
