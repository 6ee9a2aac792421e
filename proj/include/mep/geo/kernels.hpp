#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "mep/geo/geo.hpp"

namespace mep::geo::kernels {

// Structure-of-arrays unit vectors for a batch of positions. Slots without a
// position hold NaN and never compare as within any limit.
struct UnitVectorsSoA {
  std::span<const double> x;
  std::span<const double> y;
  std::span<const double> z;

  std::size_t size() const noexcept { return x.size(); }
};

// One implementation of the proximity prefilter. Every variant evaluates
//   chord2 = ((dx*dx + dy*dy) + dz*dz)
// in the same order without FMA contraction, so all variants produce
// bit-identical results to the scalar reference.
struct ChordKernels {
  std::string_view name;

  // out[i] = squared chord between slot i and `center`.
  void (*chord2)(const UnitVectorsSoA& pts, UnitVector center, std::span<double> out);

  // Writes ascending slot indices whose chord2 <= limit into `out` (which must
  // hold pts.size() entries) and returns how many were written.
  std::size_t (*select_within)(const UnitVectorsSoA& pts, UnitVector center, double limit,
                               std::span<std::uint32_t> out);
};

const ChordKernels& scalar_kernels() noexcept;

// Variants compiled into this binary that the running CPU supports, scalar
// first.
std::vector<const ChordKernels*> available_kernels();

// Kernel set used by the tracker. Picks the widest supported variant on first
// call; the MEP_SIMD environment variable ("scalar", "avx2", "neon") forces a
// choice when that variant is available.
const ChordKernels& active_kernels();

}  // namespace mep::geo::kernels
