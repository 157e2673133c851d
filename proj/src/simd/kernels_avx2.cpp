#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "fksteer/simd/kernels.hpp"

namespace fks::simd {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

inline double hmax(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_max_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_max_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

double max_value_avx2(std::span<const double> values) {
  const double* p = values.data();
  const std::size_t n = values.size();
  std::size_t i = 0;
  double best = -std::numeric_limits<double>::infinity();
  if (n >= 4) {
    __m256d acc = _mm256_set1_pd(best);
    for (; i + 4 <= n; i += 4) acc = _mm256_max_pd(acc, _mm256_loadu_pd(p + i));
    best = hmax(acc);
  }
  for (; i < n; ++i) best = std::max(best, p[i]);
  return best;
}

double sum_avx2(std::span<const double> values) {
  const double* p = values.data();
  const std::size_t n = values.size();
  std::size_t i = 0;
  __m256d a0 = _mm256_setzero_pd();
  __m256d a1 = _mm256_setzero_pd();
  for (; i + 8 <= n; i += 8) {
    a0 = _mm256_add_pd(a0, _mm256_loadu_pd(p + i));
    a1 = _mm256_add_pd(a1, _mm256_loadu_pd(p + i + 4));
  }
  for (; i + 4 <= n; i += 4) a0 = _mm256_add_pd(a0, _mm256_loadu_pd(p + i));
  double total = hsum(_mm256_add_pd(a0, a1));
  for (; i < n; ++i) total += p[i];
  return total;
}

double sum_squares_avx2(std::span<const double> values) {
  const double* p = values.data();
  const std::size_t n = values.size();
  std::size_t i = 0;
  __m256d a0 = _mm256_setzero_pd();
  __m256d a1 = _mm256_setzero_pd();
  for (; i + 8 <= n; i += 8) {
    const __m256d x0 = _mm256_loadu_pd(p + i);
    const __m256d x1 = _mm256_loadu_pd(p + i + 4);
    a0 = _mm256_fmadd_pd(x0, x0, a0);
    a1 = _mm256_fmadd_pd(x1, x1, a1);
  }
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_loadu_pd(p + i);
    a0 = _mm256_fmadd_pd(x, x, a0);
  }
  double total = hsum(_mm256_add_pd(a0, a1));
  for (; i < n; ++i) total += p[i] * p[i];
  return total;
}

void scale_avx2(std::span<double> values, double factor) {
  double* p = values.data();
  const std::size_t n = values.size();
  const __m256d f = _mm256_set1_pd(factor);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(p + i, _mm256_mul_pd(_mm256_loadu_pd(p + i), f));
  for (; i < n; ++i) p[i] *= factor;
}

void vec_mat_avx2(std::span<const double> row, std::span<const double> mat, std::size_t cols,
                  std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  double* o = out.data();
  for (std::size_t i = 0; i < row.size(); ++i) {
    const __m256d r = _mm256_set1_pd(row[i]);
    const double* m = mat.data() + i * cols;
    std::size_t j = 0;
    for (; j + 4 <= cols; j += 4) {
      _mm256_storeu_pd(o + j, _mm256_fmadd_pd(r, _mm256_loadu_pd(m + j), _mm256_loadu_pd(o + j)));
    }
    for (; j < cols; ++j) o[j] = std::fma(row[i], m[j], o[j]);
  }
}

void mat_vec_avx2(std::span<const double> mat, std::size_t cols, std::span<const double> vec,
                  std::span<double> out) {
  const double* v = vec.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double* m = mat.data() + i * cols;
    __m256d acc = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 4 <= cols; j += 4) {
      acc = _mm256_fmadd_pd(_mm256_loadu_pd(m + j), _mm256_loadu_pd(v + j), acc);
    }
    double total = hsum(acc);
    for (; j < cols; ++j) total += m[j] * v[j];
    out[i] = total;
  }
}

double pair_energy_avx2(std::span<const double> a_xy, std::span<const double> b_xy,
                        const PairPotential& p) {
  const std::size_t nb = b_xy.size() / 2;
  const double cutoff2 = p.cutoff * p.cutoff;
  const double sigma2 = p.sigma * p.sigma;
  const __m256d vcut2 = _mm256_set1_pd(cutoff2);
  const __m256d vsig2 = _mm256_set1_pd(sigma2);
  const __m256d v4eps = _mm256_set1_pd(4.0 * p.epsilon);
  const __m256d zero = _mm256_setzero_pd();
  // Gather indices for the interleaved layout: x at 2j, y at 2j+1.
  const __m128i xi = _mm_setr_epi32(0, 2, 4, 6);
  const __m128i yi = _mm_setr_epi32(1, 3, 5, 7);

  __m256d acc = zero;
  double tail = 0.0;
  for (std::size_t i = 0; i + 1 < a_xy.size(); i += 2) {
    const double ax = a_xy[i];
    const double ay = a_xy[i + 1];
    const __m256d vax = _mm256_set1_pd(ax);
    const __m256d vay = _mm256_set1_pd(ay);
    std::size_t j = 0;
    for (; j + 4 <= nb; j += 4) {
      const double* base = b_xy.data() + 2 * j;
      const __m256d bx = _mm256_i32gather_pd(base, xi, 8);
      const __m256d by = _mm256_i32gather_pd(base, yi, 8);
      const __m256d dx = _mm256_sub_pd(vax, bx);
      const __m256d dy = _mm256_sub_pd(vay, by);
      const __m256d r2 = _mm256_fmadd_pd(dx, dx, _mm256_mul_pd(dy, dy));
      const __m256d inside = _mm256_cmp_pd(r2, vcut2, _CMP_LT_OQ);
      const __m256d s2 = _mm256_div_pd(vsig2, r2);
      const __m256d s6 = _mm256_mul_pd(_mm256_mul_pd(s2, s2), s2);
      const __m256d e = _mm256_mul_pd(v4eps, _mm256_fmsub_pd(s6, s6, s6));
      acc = _mm256_add_pd(acc, _mm256_blendv_pd(zero, e, inside));
    }
    for (; j < nb; ++j) {
      const double dx = ax - b_xy[2 * j];
      const double dy = ay - b_xy[2 * j + 1];
      const double r2 = dx * dx + dy * dy;
      if (r2 >= cutoff2) continue;
      const double s2 = sigma2 / r2;
      const double s6 = s2 * s2 * s2;
      tail += 4.0 * p.epsilon * (s6 * s6 - s6);
    }
  }
  return hsum(acc) + tail;
}

}  // namespace

const KernelTable* avx2_kernels() {
  static const KernelTable table{
      "avx2",       max_value_avx2, sum_avx2,     sum_squares_avx2,
      scale_avx2,   vec_mat_avx2,   mat_vec_avx2, pair_energy_avx2,
  };
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &table : nullptr;
}

}  // namespace fks::simd
