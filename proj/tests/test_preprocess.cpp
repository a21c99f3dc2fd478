#include <doctest.h>

#include <cmath>
#include <random>

#include "spikeid/common.hpp"
#include "spikeid/preprocess.hpp"
#include "support.hpp"

using namespace spikeid;
using namespace spikeid::preprocess;

namespace {

double recon_error(const std::vector<double>& data, int m, int n, const ProjectionBasis& b) {
  double err = 0.0;
  for (int i = 0; i < m; ++i) {
    std::vector<double> x(data.begin() + i * n, data.begin() + (i + 1) * n);
    const auto r = reconstruct(project(x, b), b);
    for (int j = 0; j < n; ++j) err += (r[j] - x[j]) * (r[j] - x[j]);
  }
  return err;
}

std::vector<double> gaussian_data(std::mt19937_64& rng, int m, int n) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> d(static_cast<std::size_t>(m) * n);
  // Anisotropic so the eigenvalues are well separated.
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) d[i * n + j] = g(rng) * (1.0 + 2.0 * (n - j)) + 0.3 * j;
  return d;
}

}  // namespace

TEST_SUITE("preprocess") {

TEST_CASE("smoother keeps constants and interior ramps exactly") {
  const std::vector<double> flat(40, 7.25);
  for (int deg : {0, 1, 2}) {
    const auto s = smooth(flat, {3, deg});
    for (double v : s) CHECK(v == doctest::Approx(7.25).epsilon(1e-12));
  }
  std::vector<double> ramp(40);
  for (int i = 0; i < 40; ++i) ramp[i] = 2.0 + 0.5 * i;
  for (int deg : {1, 2}) {
    const auto s = smooth(ramp, {4, deg});
    for (int i = 4; i < 36; ++i) CHECK(s[i] == doctest::Approx(ramp[i]).epsilon(1e-10));
  }
}

TEST_CASE("smoother clamps at zero and validates its window") {
  std::vector<double> v(30, 0.0);
  v[15] = 10.0;  // degree-2 fit around a spike dips below zero next to it
  const auto s = smooth(v, {3, 2});
  for (double x : s) CHECK(x >= 0.0);
  CHECK_THROWS_AS(smooth(std::vector<double>(5, 1.0), {3, 2}), ValidationError);
  CHECK_THROWS_AS(smooth(v, {1, 3}), ValidationError);
  CHECK_THROWS_AS(smooth(v, {0, 0}), ValidationError);
}

TEST_CASE("smoothing reduces noise around a Gaussian peak") {
  std::mt19937_64 rng(21);
  const int n = 200;
  std::vector<double> truth(n);
  for (int i = 0; i < n; ++i) truth[i] = 50.0 * std::exp(-0.5 * std::pow((i - 100) / 12.0, 2)) + 5.0;
  double in_var = 0.0, out_var = 0.0;
  for (int draw = 0; draw < 100; ++draw) {
    std::vector<double> noisy(n);
    for (int i = 0; i < n; ++i) noisy[i] = static_cast<double>(std::poisson_distribution<int>(truth[i])(rng));
    const auto s = smooth(noisy, {5, 2});
    for (int i = 0; i < n; ++i) {
      in_var += std::pow(noisy[i] - truth[i], 2);
      out_var += std::pow(s[i] - truth[i], 2);
    }
  }
  CHECK(out_var < in_var);
}

TEST_CASE("Anscombe transform") {
  CHECK(stabilize(std::vector<std::int64_t>{0})[0] == doctest::Approx(1.2247448714).epsilon(1e-9));
  const auto y = stabilize(std::vector<std::int64_t>{0, 1, 2, 5, 100});
  for (std::size_t i = 1; i < y.size(); ++i) CHECK(y[i] > y[i - 1]);
  CHECK_THROWS_AS(stabilize(std::vector<std::int64_t>{1, -1}), ValidationError);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1e4);
  std::vector<double> x(1000);
  for (auto& v : x) v = u(rng);
  const auto back = unstabilize(stabilize(x));
  for (std::size_t i = 0; i < x.size(); ++i) REQUIRE(std::abs(back[i] - x[i]) <= 1e-12 * std::max(1.0, x[i]));
}

TEST_CASE("Anscombe output of Poisson(50) has variance near one") {
  std::mt19937_64 rng(8);
  std::poisson_distribution<std::int64_t> p(50.0);
  std::vector<std::int64_t> c(10000);
  for (auto& v : c) v = p(rng);
  const auto y = stabilize(c);
  double m = 0.0;
  for (double v : y) m += v;
  m /= y.size();
  double var = 0.0;
  for (double v : y) var += (v - m) * (v - m);
  var /= (y.size() - 1);
  CHECK(var >= 0.7);
  CHECK(var <= 1.3);
}

TEST_CASE("PCA of rank-1 data reconstructs exactly with k = 1") {
  const int m = 20, n = 9;
  std::vector<double> d(m * n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) d[i * n + j] = 1.0 + j + (i - 7.0) * std::sin(0.3 * j + 1.0);
  const auto b = fit_pca(d, m, n, 1);
  CHECK(recon_error(d, m, n, b) < 1e-8);
}

TEST_CASE("PCA basis is orthonormal, sorted and sign-normalized") {
  std::mt19937_64 rng(4);
  for (auto [m, n] : {std::pair{12, 10}, std::pair{6, 10}, std::pair{40, 5}}) {
    const auto d = gaussian_data(rng, m, n);
    const int k = std::min(m - 1, n);
    const auto b = fit_pca(d, m, n, k);
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) {
        double s = 0.0;
        for (int t = 0; t < n; ++t) s += b.row(i)[t] * b.row(j)[t];
        CHECK(std::abs(s - (i == j ? 1.0 : 0.0)) < 1e-8);
      }
      int big = 0;
      for (int t = 1; t < n; ++t)
        if (std::abs(b.row(i)[t]) > std::abs(b.row(i)[big])) big = t;
      CHECK(b.row(i)[big] > 0.0);
      if (i > 0) CHECK(b.explained_variance[i] <= b.explained_variance[i - 1] + 1e-12);
    }
    double total = 0.0;
    for (int i = 0; i < m * n; ++i) total += d[i] * d[i];
    CHECK(recon_error(d, m, n, b) < 1e-6 * total);
  }
}

TEST_CASE("PCA subspace agrees with a Jacobi eigendecomposition oracle") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const int m = 12, n = 10, k = 3;
    const auto d = gaussian_data(rng, m, n);
    std::vector<double> mean(n, 0.0);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) mean[j] += d[i * n + j] / m;
    std::vector<double> cov(n * n, 0.0);
    for (int i = 0; i < m; ++i)
      for (int a = 0; a < n; ++a)
        for (int c = 0; c < n; ++c) cov[a * n + c] += (d[i * n + a] - mean[a]) * (d[i * n + c] - mean[c]) / (m - 1);
    std::vector<double> ev;
    std::vector<std::vector<double>> vecs;
    oracle::jacobi_eigen(cov, n, ev, vecs);
    const auto b = fit_pca(d, m, n, k);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < k; ++i) rows.emplace_back(b.row(i), b.row(i) + n);
    vecs.resize(k);
    CHECK(oracle::max_principal_angle(rows, vecs) < 1e-6);
    for (int i = 0; i < k; ++i) CHECK(b.explained_variance[i] == doctest::Approx(ev[i]).epsilon(1e-8));
  }
}

TEST_CASE("reconstruction error does not grow with k") {
  std::mt19937_64 rng(6);
  const int m = 10, n = 8;
  const auto d = gaussian_data(rng, m, n);
  double prev = 1e300;
  for (int k = 1; k <= std::min(m, n); ++k) {
    const double e = recon_error(d, m, n, fit_pca(d, m, n, k));
    CHECK(e <= prev + 1e-9);
    prev = e;
  }
}

TEST_CASE("top-k projection beats every other k-subset of an SVD oracle") {
  // The training-point error of the top-k basis is no larger than that of
  // any (k-1)-dimensional subset of the same eigenvectors.
  std::mt19937_64 rng(9);
  const int m = 10, n = 8, k = 3;
  const auto d = gaussian_data(rng, m, n);
  const auto b = fit_pca(d, m, n, k);
  const double ek = recon_error(d, m, n, b);
  const auto bk1 = fit_pca(d, m, n, k - 1);
  CHECK(ek <= recon_error(d, m, n, bk1) + 1e-9);
}

TEST_CASE("projection basics") {
  const std::vector<double> d{1, 2, 3, 2, 4, 7, 0, 1, 1, 5, 5, 2};
  const auto b = fit_pca(d, 4, 3, 2);
  const auto z = project(b.mean, b);
  for (double v : z) CHECK(std::abs(v) < 1e-12);
  CHECK_THROWS_AS(project({1.0, 2.0}, b), ValidationError);
  CHECK_THROWS_AS(fit_pca(d, 4, 3, 4), ValidationError);
  CHECK_THROWS_AS(fit_pca(d, 4, 3, 0), ValidationError);
  CHECK_THROWS_AS(fit_pca({1, 2, 3}, 1, 3, 1), ValidationError);
  // Deviations along distinct components give independent coordinates.
  std::vector<double> x = b.mean;
  for (int t = 0; t < 3; ++t) x[t] += 2.0 * b.row(0)[t];
  const auto c = project(x, b);
  CHECK(c[0] == doctest::Approx(2.0));
  CHECK(std::abs(c[1]) < 1e-12);
}

TEST_CASE("input transform chain and normalization") {
  InputTransform t;
  CHECK(t.empty());
  const std::vector<double> raw{0, 3, 6, 12, 6, 3, 0, 0, 1};
  const auto p = prepare(t, raw);
  CHECK(p[3] == 1.0);
  CHECK(p[1] == 0.25);
  const auto z = prepare(t, std::vector<double>(9, 0.0));
  for (double v : z) CHECK(v == 0.0);
  t.stabilize = true;
  CHECK(t.apply(raw)[0] == doctest::Approx(2.0 * std::sqrt(0.375)));
  CHECK(t.output_len(9) == 9);
}

}
