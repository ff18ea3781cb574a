#pragma once

#include <cstddef>
#include <string_view>

// Data-parallel inner loops used by batch excursion evaluation, calibration
// least squares and curve-fit residuals. Each kernel has a scalar reference
// and vectorized variants; the variant is chosen once at runtime from CPU
// features and can be forced with CATCH919_ISA=scalar|avx2|neon.
namespace catch919::kernels {

enum class Isa { Scalar, Avx2, Neon };

struct KernelTable {
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);

  // out[r] = rows[r * stride .. r * stride + n_cols) . x
  void (*gemv_rows)(const double* rows, std::size_t n_rows, std::size_t n_cols, std::size_t stride,
                    const double* x, double* out);

  // Accumulates ata += A^T A (n_cols x n_cols, row-major) and aty += A^T y for
  // a row-major A with n_rows rows of n_cols entries.
  void (*gram)(const double* a, std::size_t n_rows, std::size_t n_cols, const double* y, double* ata,
               double* aty);

  // sum_i (a[i] - b[i])^2
  double (*sum_sq_diff)(const double* a, const double* b, std::size_t n);
};

bool supported(Isa isa);
const KernelTable& table(Isa isa);  // throws catch919::Error if unsupported
const KernelTable& active();
Isa active_isa();
std::string_view to_string(Isa isa);

}  // namespace catch919::kernels
