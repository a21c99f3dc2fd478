#include "spikeid/kernels.hpp"

#include <algorithm>

namespace spikeid::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

std::size_t lif_update_scalar(double* v, double* i_syn, double* input, const double* bias,
                              std::int32_t* refrac, std::uint8_t* spiked, std::size_t n,
                              const LifConsts& c) {
  std::size_t count = 0;
  for (std::size_t k = 0; k < n; ++k) {
    double i = i_syn[k] * c.syn_decay + input[k];
    i = i + bias[k];
    i_syn[k] = i;
    input[k] = 0.0;
    spiked[k] = 0;
    if (c.refractory_steps > 0 && refrac[k] > 0) {
      --refrac[k];
      v[k] = c.v_reset;
      continue;
    }
    double vk = v[k] + c.leak * (c.v_rest - v[k]);
    vk = vk + c.leak * i;
    if (vk >= c.v_thresh) {
      spiked[k] = 1;
      ++count;
      vk = c.soft_reset ? vk - c.v_thresh : c.v_reset;
      if (c.refractory_steps > 0) refrac[k] = c.refractory_steps;
    }
    v[k] = vk;
  }
  return count;
}

std::size_t fixed_lif_update_scalar(std::int32_t* v, std::int32_t* input, const std::int32_t* bias,
                                    std::uint8_t* spiked, std::size_t n, const FixedConsts& c,
                                    std::uint64_t* saturations) {
  std::size_t count = 0;
  std::uint64_t sat = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const std::int32_t d = v[k] - c.v_rest;
    const std::int32_t leak_term = (d * c.leak_q14 + (1 << 13)) >> 14;
    std::int32_t vk = v[k] + input[k] + bias[k] - leak_term;
    input[k] = 0;
    if (vk > c.v_max) {
      vk = c.v_max;
      ++sat;
    } else if (vk < c.v_min) {
      vk = c.v_min;
      ++sat;
    }
    spiked[k] = 0;
    if (vk >= c.v_thresh) {
      spiked[k] = 1;
      ++count;
      vk = c.soft_reset ? vk - c.v_thresh : c.v_reset;
    }
    v[k] = vk;
  }
  *saturations += sat;
  return count;
}

const KernelTable kScalar{Isa::Scalar, dot_scalar, axpy_scalar, lif_update_scalar,
                          fixed_lif_update_scalar};

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

}  // namespace spikeid::kernels
