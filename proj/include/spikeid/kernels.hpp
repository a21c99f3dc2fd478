#pragma once

// Inner-loop kernels shared by the ANN and the spiking simulator.
// Every kernel has a scalar reference implementation; SIMD variants are
// selected once at runtime and must match the reference (bit-exact for the
// elementwise neuron updates, to rounding for reductions).

#include <cstddef>
#include <cstdint>
#include <string>

namespace spikeid::kernels {

enum class Isa { Scalar, Avx2 };

// Constants for one float-mode LIF population update.
struct LifConsts {
  double syn_decay;   // exp(-dt / tau_syn)
  double leak;        // dt / tau_m
  double v_rest;
  double v_reset;
  double v_thresh;
  bool soft_reset;    // subtract threshold instead of resetting to v_reset
  int refractory_steps;
};

// Constants for one fixed-point population update. Potentials are integers
// in units of 2^-frac_bits; leak_q14 = round(leak * 2^14), leak <= 0.5.
struct FixedConsts {
  std::int32_t leak_q14;
  std::int32_t v_rest;
  std::int32_t v_reset;
  std::int32_t v_thresh;
  std::int32_t v_min;
  std::int32_t v_max;
  bool soft_reset;
};

struct KernelTable {
  Isa isa;
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // i_syn = i_syn * decay + input + bias; v += leak * (v_rest - v) + leak * i_syn;
  // spike where v >= thresh. `input` is consumed and zeroed. Returns spike count.
  std::size_t (*lif_update)(double* v, double* i_syn, double* input, const double* bias,
                            std::int32_t* refrac, std::uint8_t* spiked, std::size_t n,
                            const LifConsts& c);
  // v += input + bias - round(leak * (v - v_rest)), saturating to [v_min, v_max].
  // `input` is consumed and zeroed.
  // Returns spike count; adds saturation events to *saturations.
  std::size_t (*fixed_lif_update)(std::int32_t* v, std::int32_t* input, const std::int32_t* bias,
                                  std::uint8_t* spiked, std::size_t n, const FixedConsts& c,
                                  std::uint64_t* saturations);
};

const KernelTable& scalar_table();
// Null when the AVX2 variant was not compiled in.
const KernelTable* avx2_table();

bool cpu_has_avx2();

// The table in use. Defaults to the best ISA the CPU supports.
const KernelTable& active();
// Force a specific ISA (throws ValidationError if unavailable).
void select(Isa isa);
void select_auto();

std::string isa_name(Isa isa);
Isa parse_isa(const std::string& name);

}  // namespace spikeid::kernels
