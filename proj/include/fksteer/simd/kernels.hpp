#pragma once

// Data-parallel inner loops used by the steering engine.
//
// Every kernel has a scalar reference implementation and, on x86-64 builds
// with FKSTEER_HAVE_AVX2, an AVX2/FMA variant. The variant is picked once at
// startup from CPUID; setting FKSTEER_SIMD=scalar in the environment forces
// the reference path. Reductions in the vector path use a different
// summation order, so the two agree to rounding, not bit-for-bit.

#include <cstddef>
#include <span>
#include <string_view>

namespace fks::simd {

struct PairPotential {
  double epsilon = 1.0;
  double sigma = 1.0;
  double cutoff = 3.0;
};

struct KernelTable {
  std::string_view name;
  // Largest element; -inf for an empty span.
  double (*max_value)(std::span<const double> values);
  double (*sum)(std::span<const double> values);
  double (*sum_squares)(std::span<const double> values);
  void (*scale)(std::span<double> values, double factor);
  // out[j] = sum_i row[i] * mat[i * cols + j]
  void (*vec_mat)(std::span<const double> row, std::span<const double> mat, std::size_t cols,
                  std::span<double> out);
  // out[i] = sum_j mat[i * cols + j] * vec[j]
  void (*mat_vec)(std::span<const double> mat, std::size_t cols, std::span<const double> vec,
                  std::span<double> out);
  // Truncated 12-6 energy summed over all pairs between two interleaved xy point sets.
  double (*pair_energy)(std::span<const double> a_xy, std::span<const double> b_xy,
                        const PairPotential& params);
};

const KernelTable& scalar_kernels();

// nullptr when the build or the host CPU lacks AVX2+FMA.
const KernelTable* avx2_kernels();

// The table selected for this process.
const KernelTable& active();

}  // namespace fks::simd
