#include <cstdlib>
#include <string_view>

#include "mep/geo/kernels.hpp"

namespace mep::geo::kernels {

#if defined(MEP_HAVE_AVX2)
const ChordKernels& avx2_kernels() noexcept;
#endif
#if defined(MEP_HAVE_NEON)
const ChordKernels& neon_kernels() noexcept;
#endif

std::vector<const ChordKernels*> available_kernels() {
  std::vector<const ChordKernels*> out{&scalar_kernels()};
#if defined(MEP_HAVE_AVX2)
  if (__builtin_cpu_supports("avx2")) out.push_back(&avx2_kernels());
#endif
#if defined(MEP_HAVE_NEON)
  out.push_back(&neon_kernels());
#endif
  return out;
}

namespace {

const ChordKernels& choose() {
  const auto all = available_kernels();
  if (const char* forced = std::getenv("MEP_SIMD")) {
    for (const ChordKernels* k : all) {
      if (k->name == std::string_view(forced)) return *k;
    }
  }
  return *all.back();
}

}  // namespace

const ChordKernels& active_kernels() {
  static const ChordKernels& k = choose();
  return k;
}

}  // namespace mep::geo::kernels
