#pragma once

// Optional histogram conditioning: local polynomial smoothing, Anscombe
// variance stabilization and PCA projection.

#include <cstdint>
#include <vector>

namespace spikeid::preprocess {

struct SmootherConfig {
  int window_half_width = 3;
  int degree = 2;  // 0, 1 or 2

  void validate() const;
};

// Local least-squares polynomial fit evaluated at each point. The window is
// truncated at the edges (no padding); output clamped at zero.
std::vector<double> smooth(const std::vector<double>& hist, const SmootherConfig& cfg);

// Anscombe transform 2 * sqrt(x + 3/8).
std::vector<double> stabilize(const std::vector<std::int64_t>& counts);
std::vector<double> stabilize(const std::vector<double>& values);
// Algebraic inverse (y / 2)^2 - 3/8.
std::vector<double> unstabilize(const std::vector<double>& values);

struct ProjectionBasis {
  std::vector<double> mean;        // length n
  std::vector<double> components;  // k x n, row-major, orthonormal rows
  std::vector<double> explained_variance;  // length k, non-increasing
  int n = 0;
  int k = 0;

  const double* row(int i) const { return components.data() + static_cast<std::size_t>(i) * n; }
  void validate() const;
};

// Top-k principal directions of the mean-centered rows of `data` (m x n,
// row-major). Sign convention: each component's largest-magnitude entry is
// positive.
ProjectionBasis fit_pca(const std::vector<double>& data, int m, int n, int k);

std::vector<double> project(const std::vector<double>& hist, const ProjectionBasis& basis);
std::vector<double> reconstruct(const std::vector<double>& coords, const ProjectionBasis& basis);

}  // namespace spikeid::preprocess

#include <optional>

namespace spikeid::preprocess {

// Conditioning chain applied before the classifier: smooth -> stabilize -> project.
// Each stage is optional; an empty chain passes raw counts through.
struct InputTransform {
  std::optional<SmootherConfig> smoother;
  bool stabilize = false;
  std::optional<ProjectionBasis> pca;

  bool empty() const { return !smoother && !stabilize && !pca; }
  // Output dimension for an input of raw length n.
  int output_len(int n) const { return pca ? pca->k : n; }
  std::vector<double> apply(const std::vector<double>& raw) const;
};

// Transform chain, then divide by max |x| (an all-zero result stays zero).
std::vector<double> prepare(const InputTransform& transform, const std::vector<double>& raw);

}  // namespace spikeid::preprocess
