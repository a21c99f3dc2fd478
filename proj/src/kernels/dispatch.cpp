#include <atomic>

#include "spikeid/common.hpp"
#include "spikeid/kernels.hpp"

namespace spikeid::kernels {

#ifndef SPIKEID_HAVE_AVX2
const KernelTable* avx2_table() { return nullptr; }
#endif

bool cpu_has_avx2() {
#if defined(SPIKEID_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

const KernelTable* best_table() {
  if (cpu_has_avx2() && avx2_table() != nullptr) return avx2_table();
  return &scalar_table();
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{best_table()};
  return table;
}

}  // namespace

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

void select(Isa isa) {
  if (isa == Isa::Scalar) {
    current().store(&scalar_table(), std::memory_order_release);
    return;
  }
  if (!cpu_has_avx2() || avx2_table() == nullptr) {
    throw ValidationError("AVX2 kernels are not available on this build or CPU");
  }
  current().store(avx2_table(), std::memory_order_release);
}

void select_auto() { current().store(best_table(), std::memory_order_release); }

std::string isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

Isa parse_isa(const std::string& name) {
  if (name == "scalar") return Isa::Scalar;
  if (name == "avx2") return Isa::Avx2;
  throw ValidationError("unknown ISA '" + name + "' (expected scalar or avx2)");
}

}  // namespace spikeid::kernels
