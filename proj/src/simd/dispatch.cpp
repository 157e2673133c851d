#include <cstdlib>
#include <string_view>

#include "fksteer/simd/kernels.hpp"

namespace fks::simd {

#ifndef FKSTEER_HAVE_AVX2
const KernelTable* avx2_kernels() { return nullptr; }
#endif

namespace {

const KernelTable& select() {
  if (const char* forced = std::getenv("FKSTEER_SIMD")) {
    if (std::string_view(forced) == "scalar") return scalar_kernels();
  }
  if (const KernelTable* avx2 = avx2_kernels()) return *avx2;
  return scalar_kernels();
}

}  // namespace

const KernelTable& active() {
  static const KernelTable& table = select();
  return table;
}

}  // namespace fks::simd
