#pragma once

// Independent reference implementations used as test oracles. Nothing here
// calls into the library's numeric kernels.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "spikeid/ann.hpp"

namespace oracle {

// Forward pass with plain nested loops, written directly from the layer
// definitions: conv out[t][o] = b[o] + sum_k sum_c w[o][k][c] * in[t*s + k][c].
inline std::vector<std::vector<double>> naive_forward(const spikeid::ann::NetworkModel& m,
                                                      const std::vector<double>& x) {
  using spikeid::ann::Activation;
  using spikeid::ann::LayerKind;
  std::vector<std::vector<double>> outs;
  std::vector<double> cur = x;
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    const auto& s = m.layers[l];
    const auto& p = m.params[l];
    std::vector<double> next;
    if (s.kind == LayerKind::Conv1D) {
      next.assign(static_cast<std::size_t>(s.out_len * s.out_channels), 0.0);
      for (int t = 0; t < s.out_len; ++t) {
        for (int o = 0; o < s.out_channels; ++o) {
          double acc = p.biases[o];
          for (int k = 0; k < s.kernel_size; ++k) {
            for (int c = 0; c < s.in_channels; ++c) {
              acc += p.weights[(o * s.kernel_size + k) * s.in_channels + c] *
                     cur[(t * s.stride + k) * s.in_channels + c];
            }
          }
          next[t * s.out_channels + o] = acc;
        }
      }
    } else if (s.kind == LayerKind::Dense) {
      next.assign(static_cast<std::size_t>(s.out_units), 0.0);
      for (int o = 0; o < s.out_units; ++o) {
        double acc = p.biases[o];
        for (int j = 0; j < s.in_units; ++j) acc += p.weights[o * s.in_units + j] * cur[j];
        next[o] = acc;
      }
    } else {
      next = cur;
    }
    if (s.activation == Activation::ReLU) {
      for (auto& v : next) v = std::max(v, 0.0);
    } else if (s.activation == Activation::Softmax) {
      double mx = *std::max_element(next.begin(), next.end());
      double sum = 0.0;
      for (auto& v : next) {
        v = std::exp(v - mx);
        sum += v;
      }
      for (auto& v : next) v /= sum;
    }
    outs.push_back(next);
    cur = next;
  }
  return outs;
}

// Cyclic Jacobi eigendecomposition of a symmetric n x n matrix (row-major).
// Returns eigenvalues descending and eigenvectors as rows.
inline void jacobi_eigen(std::vector<double> a, int n, std::vector<double>& values,
                         std::vector<std::vector<double>>& vectors) {
  std::vector<double> v(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) v[i * n + i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += a[i * n + j] * a[i * n + j];
    if (off < 1e-30) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (std::abs(apq) < 1e-300) continue;
        const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a[k * n + p], akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a[p * n + k], aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v[k * n + p], vkq = v[k * n + q];
          v[k * n + p] = c * vkp - s * vkq;
          v[k * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int x, int y) { return a[x * n + x] > a[y * n + y]; });
  values.clear();
  vectors.clear();
  for (int i : order) {
    values.push_back(a[i * n + i]);
    std::vector<double> col(n);
    for (int k = 0; k < n; ++k) col[k] = v[k * n + i];
    vectors.push_back(col);
  }
}

// Largest principal angle between two k-dimensional subspaces given by
// orthonormal rows: acos of the smallest singular value of A B^T.
inline double max_principal_angle(const std::vector<std::vector<double>>& a,
                                  const std::vector<std::vector<double>>& b) {
  const int k = static_cast<int>(a.size());
  std::vector<double> m(static_cast<std::size_t>(k) * k, 0.0);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      double s = 0.0;
      for (std::size_t t = 0; t < a[i].size(); ++t) s += a[i][t] * b[j][t];
      m[i * k + j] = s;
    }
  // singular values^2 = eigenvalues of M M^T
  std::vector<double> mmt(static_cast<std::size_t>(k) * k, 0.0);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      for (int t = 0; t < k; ++t) mmt[i * k + j] += m[i * k + t] * m[j * k + t];
  std::vector<double> ev;
  std::vector<std::vector<double>> vecs;
  jacobi_eigen(mmt, k, ev, vecs);
  const double smin = std::sqrt(std::clamp(ev.back(), 0.0, 1.0));
  return std::acos(std::min(1.0, smin));
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

// Continuous-time LIF interspike interval for constant effective current
// I with reset to v_reset: tau_m * ln((I - v_reset) / (I - v_thresh)), taking
// v_rest = 0 so the membrane relaxes towards I itself.
inline double lif_isi(double tau_m, double current, double v_reset, double v_thresh) {
  return tau_m * std::log((current - v_reset) / (current - v_thresh));
}

inline std::filesystem::path temp_dir(const std::string& tag) {
  auto p = std::filesystem::temp_directory_path() /
           ("spikeid_" + tag + "_" + std::to_string(std::random_device{}()));
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace oracle
