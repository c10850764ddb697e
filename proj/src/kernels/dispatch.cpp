#include <atomic>
#include <cstdlib>
#include <string>

#include "kernel_impl.hpp"
#include "monolocal/error.hpp"

namespace monolocal::kernels {

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
  }
  return "unknown";
}

bool available(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if defined(MONOLOCAL_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table(Isa isa) {
  if (!available(isa)) {
    throw Error(ErrorCode::InvalidArgument,
                "kernel ISA '" + std::string(to_string(isa)) + "' not available on this build/CPU");
  }
#ifdef MONOLOCAL_HAVE_AVX2
  if (isa == Isa::Avx2) return detail::avx2_table();
#endif
  return detail::scalar_table();
}

namespace {

const KernelTable* initial_selection() {
  if (const char* env = std::getenv("MONOLOCAL_ISA")) {
    const std::string want(env);
    if (want == "scalar") return &table(Isa::Scalar);
    if (want == "avx2" && available(Isa::Avx2)) return &table(Isa::Avx2);
  }
  return available(Isa::Avx2) ? &table(Isa::Avx2) : &table(Isa::Scalar);
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> ptr{initial_selection()};
  return ptr;
}

}  // namespace

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

void select(Isa isa) { current().store(&table(isa), std::memory_order_release); }

}  // namespace monolocal::kernels
