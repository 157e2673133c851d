#include "fksteer/simd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fks::simd {
namespace {

double max_value_scalar(std::span<const double> values) {
  double best = -std::numeric_limits<double>::infinity();
  for (double v : values) best = std::max(best, v);
  return best;
}

double sum_scalar(std::span<const double> values) {
  double total = 0.0;
  for (double v : values) total += v;
  return total;
}

double sum_squares_scalar(std::span<const double> values) {
  double total = 0.0;
  for (double v : values) total += v * v;
  return total;
}

void scale_scalar(std::span<double> values, double factor) {
  for (double& v : values) v *= factor;
}

void vec_mat_scalar(std::span<const double> row, std::span<const double> mat, std::size_t cols,
                    std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < row.size(); ++i) {
    const double r = row[i];
    const double* m = mat.data() + i * cols;
    for (std::size_t j = 0; j < cols; ++j) out[j] += r * m[j];
  }
}

void mat_vec_scalar(std::span<const double> mat, std::size_t cols, std::span<const double> vec,
                    std::span<double> out) {
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double* m = mat.data() + i * cols;
    double acc = 0.0;
    for (std::size_t j = 0; j < cols; ++j) acc += m[j] * vec[j];
    out[i] = acc;
  }
}

double pair_energy_scalar(std::span<const double> a_xy, std::span<const double> b_xy,
                          const PairPotential& p) {
  const double cutoff2 = p.cutoff * p.cutoff;
  const double sigma2 = p.sigma * p.sigma;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < a_xy.size(); i += 2) {
    for (std::size_t j = 0; j + 1 < b_xy.size(); j += 2) {
      const double dx = a_xy[i] - b_xy[j];
      const double dy = a_xy[i + 1] - b_xy[j + 1];
      const double r2 = dx * dx + dy * dy;
      if (r2 >= cutoff2) continue;
      const double s2 = sigma2 / r2;
      const double s6 = s2 * s2 * s2;
      total += 4.0 * p.epsilon * (s6 * s6 - s6);
    }
  }
  return total;
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{
      "scalar",         max_value_scalar, sum_scalar,     sum_squares_scalar,
      scale_scalar,     vec_mat_scalar,   mat_vec_scalar, pair_energy_scalar,
  };
  return table;
}

}  // namespace fks::simd
