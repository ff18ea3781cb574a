#pragma once

#include "catch919/kernels.hpp"

namespace catch919::kernels::detail {

const KernelTable& scalar_table();
#if defined(CATCH919_HAVE_AVX2)
const KernelTable& avx2_table();
#endif
#if defined(CATCH919_HAVE_NEON)
const KernelTable& neon_table();
#endif

}  // namespace catch919::kernels::detail
