#include "mep/geo/kernels.hpp"

namespace mep::geo::kernels {

namespace {

void chord2_scalar(const UnitVectorsSoA& pts, UnitVector c, std::span<double> out) {
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = pts.x[i] - c.x;
    const double dy = pts.y[i] - c.y;
    const double dz = pts.z[i] - c.z;
    out[i] = (dx * dx + dy * dy) + dz * dz;
  }
}

std::size_t select_within_scalar(const UnitVectorsSoA& pts, UnitVector c, double limit,
                                 std::span<std::uint32_t> out) {
  std::size_t count = 0;
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = pts.x[i] - c.x;
    const double dy = pts.y[i] - c.y;
    const double dz = pts.z[i] - c.z;
    if ((dx * dx + dy * dy) + dz * dz <= limit) out[count++] = static_cast<std::uint32_t>(i);
  }
  return count;
}

}  // namespace

const ChordKernels& scalar_kernels() noexcept {
  static const ChordKernels k{"scalar", &chord2_scalar, &select_within_scalar};
  return k;
}

}  // namespace mep::geo::kernels
