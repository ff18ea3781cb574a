#include <cstdlib>
#include <string>

#include "catch919/error.hpp"
#include "kernels_internal.hpp"

namespace catch919::kernels {
namespace {

Isa detect() {
#if defined(CATCH919_HAVE_AVX2)
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return Isa::Avx2;
#endif
#if defined(CATCH919_HAVE_NEON)
  return Isa::Neon;
#endif
  return Isa::Scalar;
}

Isa choose() {
  const Isa best = detect();
  const char* forced = std::getenv("CATCH919_ISA");
  if (forced == nullptr) return best;
  const std::string want(forced);
  if (want == "scalar") return Isa::Scalar;
  if (want == "avx2" && supported(Isa::Avx2)) return Isa::Avx2;
  if (want == "neon" && supported(Isa::Neon)) return Isa::Neon;
  return best;
}

}  // namespace

bool supported(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(CATCH919_HAVE_AVX2)
      __builtin_cpu_init();
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(CATCH919_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table(Isa isa) {
  if (!supported(isa)) throw Error("kernel variant " + std::string(to_string(isa)) + " not available");
  switch (isa) {
#if defined(CATCH919_HAVE_AVX2)
    case Isa::Avx2:
      return detail::avx2_table();
#endif
#if defined(CATCH919_HAVE_NEON)
    case Isa::Neon:
      return detail::neon_table();
#endif
    default:
      return detail::scalar_table();
  }
}

Isa active_isa() {
  static const Isa isa = choose();
  return isa;
}

const KernelTable& active() {
  static const KernelTable& t = table(active_isa());
  return t;
}

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return "scalar";
    case Isa::Avx2:
      return "avx2";
    case Isa::Neon:
      return "neon";
  }
  return "unknown";
}

}  // namespace catch919::kernels
