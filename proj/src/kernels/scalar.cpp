#include "kernels_internal.hpp"

namespace catch919::kernels::detail {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
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
    for (std::size_t i = 0; i < n_cols; ++i) {
      const double ri = row[i];
      double* dst = ata + i * n_cols;
      for (std::size_t j = 0; j < n_cols; ++j) dst[j] += ri * row[j];
      aty[i] += ri * y[r];
    }
  }
}

double sum_sq_diff(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable t{dot, gemv_rows, gram, sum_sq_diff};
  return t;
}

}  // namespace catch919::kernels::detail
