// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include <immintrin.h>

#include "kernels_internal.hpp"

namespace catch919::kernels::detail {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
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
    const __m256d yr = _mm256_set1_pd(y[r]);
    std::size_t i = 0;
    for (; i + 4 <= n_cols; i += 4) {
      _mm256_storeu_pd(aty + i, _mm256_fmadd_pd(_mm256_loadu_pd(row + i), yr, _mm256_loadu_pd(aty + i)));
    }
    for (; i < n_cols; ++i) aty[i] += row[i] * y[r];

    for (std::size_t k = 0; k < n_cols; ++k) {
      const __m256d rk = _mm256_set1_pd(row[k]);
      double* dst = ata + k * n_cols;
      std::size_t j = 0;
      for (; j + 4 <= n_cols; j += 4) {
        _mm256_storeu_pd(dst + j, _mm256_fmadd_pd(rk, _mm256_loadu_pd(row + j), _mm256_loadu_pd(dst + j)));
      }
      for (; j < n_cols; ++j) dst[j] += row[k] * row[j];
    }
  }
}

double sum_sq_diff(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable t{dot, gemv_rows, gram, sum_sq_diff};
  return t;
}

}  // namespace catch919::kernels::detail
