#include <arm_neon.h>

#include "kernels_internal.hpp"

namespace catch919::kernels::detail {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void gemv_rows(const double* rows, std::size_t n_rows, std::size_t n_cols, std::size_t stride,
               const double* x, double* out) {
  for (std::size_t r = 0; r < n_rows; ++r) out[r] = dot(rows + r * stride, x, n_cols);
}

void gram(const double* a, std::size_t n_rows, std::size_t n_cols, const double* y, double* ata,
          double* aty) {
  for (std::size_t r = 0; r < n_rows; ++r) {
    const double* row = a + r * n_cols;
    const float64x2_t yr = vdupq_n_f64(y[r]);
    std::size_t i = 0;
    for (; i + 2 <= n_cols; i += 2) vst1q_f64(aty + i, vfmaq_f64(vld1q_f64(aty + i), vld1q_f64(row + i), yr));
    for (; i < n_cols; ++i) aty[i] += row[i] * y[r];

    for (std::size_t k = 0; k < n_cols; ++k) {
      const float64x2_t rk = vdupq_n_f64(row[k]);
      double* dst = ata + k * n_cols;
      std::size_t j = 0;
      for (; j + 2 <= n_cols; j += 2) vst1q_f64(dst + j, vfmaq_f64(vld1q_f64(dst + j), rk, vld1q_f64(row + j)));
      for (; j < n_cols; ++j) dst[j] += row[k] * row[j];
    }
  }
}

double sum_sq_diff(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    acc = vfmaq_f64(acc, d, d);
  }
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace

const KernelTable& neon_table() {
  static const KernelTable t{dot, gemv_rows, gram, sum_sq_diff};
  return t;
}

}  // namespace catch919::kernels::detail
