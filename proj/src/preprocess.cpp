#include "spikeid/preprocess.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "spikeid/common.hpp"

namespace spikeid::preprocess {

void SmootherConfig::validate() const {
  require(window_half_width >= 1, "smoother window_half_width must be >= 1");
  require(degree >= 0 && degree <= 2, "smoother degree must be 0, 1 or 2");
  require(2 * window_half_width + 1 >= degree + 1, "smoother window must cover degree + 1 points");
}

std::vector<double> smooth(const std::vector<double>& hist, const SmootherConfig& cfg) {
  cfg.validate();
  const int n = static_cast<int>(hist.size());
  require(n >= 2 * cfg.window_half_width + 1,
          "input of length " + std::to_string(n) + " is shorter than the smoothing window");
  std::vector<double> out(hist.size());
  const int p = cfg.degree + 1;
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - cfg.window_half_width);
    const int hi = std::min(n - 1, i + cfg.window_half_width);
    // Centered abscissa keeps the normal equations well conditioned; the fit
    // evaluated at x = 0 is the intercept.
    Eigen::MatrixXd design(hi - lo + 1, p);
    Eigen::VectorXd y(hi - lo + 1);
    for (int j = lo; j <= hi; ++j) {
      const double x = j - i;
      double xp = 1.0;
      for (int d = 0; d < p; ++d) {
        design(j - lo, d) = xp;
        xp *= x;
      }
      y(j - lo) = hist[static_cast<std::size_t>(j)];
    }
    const Eigen::VectorXd coef = design.colPivHouseholderQr().solve(y);
    out[static_cast<std::size_t>(i)] = std::max(0.0, coef(0));
  }
  return out;
}

std::vector<double> stabilize(const std::vector<std::int64_t>& counts) {
  std::vector<double> out(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    require(counts[i] >= 0, "stabilize: negative count at index " + std::to_string(i));
    out[i] = 2.0 * std::sqrt(static_cast<double>(counts[i]) + 0.375);
  }
  return out;
}

std::vector<double> stabilize(const std::vector<double>& values) {
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    require(values[i] >= 0.0, "stabilize: negative value at index " + std::to_string(i));
    out[i] = 2.0 * std::sqrt(values[i] + 0.375);
  }
  return out;
}

std::vector<double> unstabilize(const std::vector<double>& values) {
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double h = 0.5 * values[i];
    out[i] = h * h - 0.375;
  }
  return out;
}

void ProjectionBasis::validate() const {
  require(n >= 1 && k >= 1 && k <= n, "projection basis needs 1 <= k <= n");
  require(mean.size() == static_cast<std::size_t>(n), "projection basis mean has wrong length");
  require(components.size() == static_cast<std::size_t>(k) * static_cast<std::size_t>(n),
          "projection basis components have wrong size");
}

ProjectionBasis fit_pca(const std::vector<double>& data, int m, int n, int k) {
  require(m >= 2, "fit_pca needs at least 2 rows");
  require(n >= 1, "fit_pca needs at least 1 column");
  require(data.size() == static_cast<std::size_t>(m) * static_cast<std::size_t>(n),
          "fit_pca data size does not match m x n");
  require(k >= 1 && k <= std::min(m, n),
          "fit_pca: k = " + std::to_string(k) + " outside [1, min(m, n)]");

  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMat> x(data.data(), m, n);
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - mean;

  Eigen::MatrixXd dirs(n, k);
  Eigen::VectorXd var(k);
  if (n <= m) {
    const Eigen::MatrixXd cov = centered.transpose() * centered / (m - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    require(es.info() == Eigen::Success, "fit_pca: eigendecomposition failed");
    for (int j = 0; j < k; ++j) {
      dirs.col(j) = es.eigenvectors().col(n - 1 - j);
      var(j) = es.eigenvalues()(n - 1 - j);
    }
  } else {
    // Fewer samples than features: diagonalize the m x m Gram matrix instead.
    const Eigen::MatrixXd gram = centered * centered.transpose() / (m - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    require(es.info() == Eigen::Success, "fit_pca: eigendecomposition failed");
    for (int j = 0; j < k; ++j) {
      const double ev = es.eigenvalues()(m - 1 - j);
      Eigen::VectorXd d = centered.transpose() * es.eigenvectors().col(m - 1 - j);
      const double norm = d.norm();
      if (norm > 0.0) {
        d /= norm;
      } else {
        // Zero-variance direction: pick any unit vector orthogonal to the previous ones.
        d = Eigen::VectorXd::Unit(n, j % n);
        for (int q = 0; q < j; ++q) d -= dirs.col(q).dot(d) * dirs.col(q);
        d.normalize();
      }
      dirs.col(j) = d;
      var(j) = std::max(ev, 0.0);
    }
  }

  ProjectionBasis basis;
  basis.n = n;
  basis.k = k;
  basis.mean.assign(mean.data(), mean.data() + n);
  basis.components.resize(static_cast<std::size_t>(k) * n);
  basis.explained_variance.resize(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    Eigen::Index arg = 0;
    dirs.col(j).cwiseAbs().maxCoeff(&arg);
    const double sign = dirs(arg, j) < 0.0 ? -1.0 : 1.0;
    for (int c = 0; c < n; ++c) {
      basis.components[static_cast<std::size_t>(j) * n + c] = sign * dirs(c, j);
    }
    basis.explained_variance[static_cast<std::size_t>(j)] = std::max(var(j), 0.0);
  }
  return basis;
}

std::vector<double> project(const std::vector<double>& hist, const ProjectionBasis& basis) {
  basis.validate();
  require(hist.size() == static_cast<std::size_t>(basis.n),
          "project: input length " + std::to_string(hist.size()) + " != basis length " +
              std::to_string(basis.n));
  std::vector<double> out(static_cast<std::size_t>(basis.k), 0.0);
  for (int j = 0; j < basis.k; ++j) {
    const double* r = basis.row(j);
    double s = 0.0;
    for (int c = 0; c < basis.n; ++c) s += r[c] * (hist[static_cast<std::size_t>(c)] - basis.mean[static_cast<std::size_t>(c)]);
    out[static_cast<std::size_t>(j)] = s;
  }
  return out;
}

std::vector<double> reconstruct(const std::vector<double>& coords, const ProjectionBasis& basis) {
  basis.validate();
  require(coords.size() == static_cast<std::size_t>(basis.k), "reconstruct: coordinate count != k");
  std::vector<double> out(basis.mean);
  for (int j = 0; j < basis.k; ++j) {
    const double* r = basis.row(j);
    for (int c = 0; c < basis.n; ++c) out[static_cast<std::size_t>(c)] += coords[static_cast<std::size_t>(j)] * r[c];
  }
  return out;
}

}  // namespace spikeid::preprocess

namespace spikeid::preprocess {

std::vector<double> InputTransform::apply(const std::vector<double>& raw) const {
  std::vector<double> x = raw;
  if (smoother) x = smooth(x, *smoother);
  if (stabilize) x = preprocess::stabilize(x);
  if (pca) x = project(x, *pca);
  return x;
}

std::vector<double> prepare(const InputTransform& transform, const std::vector<double>& raw) {
  auto x = transform.empty() ? raw : transform.apply(raw);
  double peak = 0.0;
  for (double v : x) {
    require(std::isfinite(v), "input contains a non-finite value");
    peak = std::max(peak, std::abs(v));
  }
  if (peak > 0.0) {
    for (auto& v : x) v /= peak;
  }
  return x;
}

}  // namespace spikeid::preprocess
