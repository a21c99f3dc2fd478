// AVX2/FMA variants. Compiled with -mavx2 -mfma; only reached through the
// dispatch table after a CPUID check.

#include <immintrin.h>

#include <bit>

#include "spikeid/kernels.hpp"

namespace spikeid::kernels {
namespace {

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  if (i + 4 <= n) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    i += 4;
  }
  acc0 = _mm256_add_pd(acc0, acc1);
  __m128d lo = _mm256_castpd256_pd128(acc0);
  __m128d hi = _mm256_extractf128_pd(acc0, 1);
  lo = _mm_add_pd(lo, hi);
  lo = _mm_add_sd(lo, _mm_unpackhi_pd(lo, lo));
  double s = _mm_cvtsd_f64(lo);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

// No FMA here: elementwise results stay bit-identical to the scalar path.
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

std::size_t lif_update_avx2(double* v, double* i_syn, double* input, const double* bias,
                            std::int32_t* refrac, std::uint8_t* spiked, std::size_t n,
                            const LifConsts& c) {
  if (c.refractory_steps > 0) {
    return scalar_table().lif_update(v, i_syn, input, bias, refrac, spiked, n, c);
  }
  const __m256d decay = _mm256_set1_pd(c.syn_decay);
  const __m256d leak = _mm256_set1_pd(c.leak);
  const __m256d rest = _mm256_set1_pd(c.v_rest);
  const __m256d reset = _mm256_set1_pd(c.v_reset);
  const __m256d thresh = _mm256_set1_pd(c.v_thresh);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t count = 0;
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    __m256d i = _mm256_add_pd(_mm256_mul_pd(_mm256_loadu_pd(i_syn + k), decay),
                              _mm256_loadu_pd(input + k));
    i = _mm256_add_pd(i, _mm256_loadu_pd(bias + k));
    _mm256_storeu_pd(i_syn + k, i);
    _mm256_storeu_pd(input + k, zero);
    __m256d vk = _mm256_loadu_pd(v + k);
    vk = _mm256_add_pd(vk, _mm256_mul_pd(leak, _mm256_sub_pd(rest, vk)));
    vk = _mm256_add_pd(vk, _mm256_mul_pd(leak, i));
    const __m256d fire = _mm256_cmp_pd(vk, thresh, _CMP_GE_OQ);
    const __m256d after = c.soft_reset ? _mm256_sub_pd(vk, thresh) : reset;
    _mm256_storeu_pd(v + k, _mm256_blendv_pd(vk, after, fire));
    const int bits = _mm256_movemask_pd(fire);
    for (int lane = 0; lane < 4; ++lane) spiked[k + lane] = static_cast<std::uint8_t>((bits >> lane) & 1);
    count += static_cast<std::size_t>(std::popcount(static_cast<unsigned>(bits)));
  }
  if (k < n) {
    count += scalar_table().lif_update(v + k, i_syn + k, input + k, bias + k, refrac + k,
                                       spiked + k, n - k, c);
  }
  return count;
}

std::size_t fixed_lif_update_avx2(std::int32_t* v, std::int32_t* input, const std::int32_t* bias,
                                  std::uint8_t* spiked, std::size_t n, const FixedConsts& c,
                                  std::uint64_t* saturations) {
  const __m256i leak = _mm256_set1_epi32(c.leak_q14);
  const __m256i rest = _mm256_set1_epi32(c.v_rest);
  const __m256i half = _mm256_set1_epi32(1 << 13);
  const __m256i vmax = _mm256_set1_epi32(c.v_max);
  const __m256i vmin = _mm256_set1_epi32(c.v_min);
  const __m256i thresh_m1 = _mm256_set1_epi32(c.v_thresh - 1);
  const __m256i thresh = _mm256_set1_epi32(c.v_thresh);
  const __m256i reset = _mm256_set1_epi32(c.v_reset);
  const __m256i zero = _mm256_setzero_si256();
  std::size_t count = 0;
  std::uint64_t sat = 0;
  std::size_t k = 0;
  for (; k + 8 <= n; k += 8) {
    const __m256i vk0 = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(v + k));
    const __m256i in = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(input + k));
    const __m256i b = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(bias + k));
    const __m256i d = _mm256_sub_epi32(vk0, rest);
    const __m256i leak_term = _mm256_srai_epi32(_mm256_add_epi32(_mm256_mullo_epi32(d, leak), half), 14);
    __m256i vk = _mm256_sub_epi32(_mm256_add_epi32(_mm256_add_epi32(vk0, in), b), leak_term);
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(input + k), zero);
    const __m256i over = _mm256_or_si256(_mm256_cmpgt_epi32(vk, vmax), _mm256_cmpgt_epi32(vmin, vk));
    sat += static_cast<std::uint64_t>(
        std::popcount(static_cast<unsigned>(_mm256_movemask_ps(_mm256_castsi256_ps(over)))));
    vk = _mm256_max_epi32(_mm256_min_epi32(vk, vmax), vmin);
    const __m256i fire = _mm256_cmpgt_epi32(vk, thresh_m1);
    const __m256i after = c.soft_reset ? _mm256_sub_epi32(vk, thresh) : reset;
    vk = _mm256_blendv_epi8(vk, after, fire);
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(v + k), vk);
    const int bits = _mm256_movemask_ps(_mm256_castsi256_ps(fire));
    for (int lane = 0; lane < 8; ++lane) spiked[k + lane] = static_cast<std::uint8_t>((bits >> lane) & 1);
    count += static_cast<std::size_t>(std::popcount(static_cast<unsigned>(bits)));
  }
  *saturations += sat;
  if (k < n) {
    count += scalar_table().fixed_lif_update(v + k, input + k, bias + k, spiked + k, n - k, c,
                                             saturations);
  }
  return count;
}

const KernelTable kAvx2{Isa::Avx2, dot_avx2, axpy_avx2, lif_update_avx2, fixed_lif_update_avx2};

}  // namespace

const KernelTable* avx2_table() { return &kAvx2; }

}  // namespace spikeid::kernels
