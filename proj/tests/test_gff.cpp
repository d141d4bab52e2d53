#include <cmath>

#include "doctest.h"
#include "lft/gff.hpp"
#include "lft/green.hpp"

using namespace lft;

namespace {
constexpr double kJ01sq = 5.783185962946785;  // first Bessel J0 zero, squared

struct CovAccum {
  double sxy = 0, sx = 0, sy = 0;
  int n = 0;
  void add(double x, double y) {
    sxy += x * y;
    sx += x;
    sy += y;
    ++n;
  }
  double cov() const { return sxy / n - (sx / n) * (sy / n); }
};
}  // namespace

TEST_SUITE_BEGIN("gff");

TEST_CASE("disk spectrum matches the Bessel ground state and Weyl law") {
  const auto lat = build_lattice(1.0 / 64);
  const int k = 40;
  const SpectralBasis basis = disk_spectrum(lat, k);
  CHECK(basis.lambdas[0] == doctest::Approx(kJ01sq).epsilon(0.02));
  for (int j = 1; j < k; ++j) CHECK(basis.lambdas[j] >= basis.lambdas[j - 1]);
  CHECK(basis.lambdas[0] > 0.0);
  Eigen::MatrixXd gram =
      lat->cell_area() * (basis.modes.transpose() * basis.modes);
  CHECK((gram - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff() < 1e-8);
  // Weyl counting N(lambda) ~ lambda/4 at moderate lambda
  const double lam = basis.lambdas[k - 1];
  CHECK(std::abs(k - lam / 4.0) / (lam / 4.0) < 0.15);
}

TEST_CASE("lanczos path agrees with Bessel multiplicities") {
  const auto lat = build_lattice(1.0 / 64);  // n ~ 12.6k: lanczos for small k
  const SpectralBasis lan = disk_spectrum(lat, 12);
  // j_{0,1}^2, j_{1,1}^2 (x2), j_{2,1}^2 (x2), j_{0,2}^2
  const double bessel[6] = {5.7832, 14.6820, 14.6820, 26.3746, 26.3746, 30.4713};
  for (int j = 0; j < 6; ++j)
    CHECK(lan.lambdas[j] == doctest::Approx(bessel[j]).epsilon(0.02));
  const Eigen::SparseMatrix<double> A = neg_laplacian_matrix(*lat);
  for (int j = 0; j < 12; ++j) {
    const Eigen::VectorXd v = lan.modes.col(j);
    const double res = (A * v - lan.lambdas[j] * v).norm() / v.norm();
    CHECK(res < 1e-6 * lan.lambdas[j]);
  }
}

TEST_CASE("exact sampler: spectral and cholesky routes share the Green covariance") {
  const auto lat = build_lattice(1.0 / 8);
  const int n = static_cast<int>(lat->size());
  const GreenOperator green(lat);
  const SpectralBasis basis = disk_spectrum(lat, n);

  const GffSample s0 = sample_exact(basis, {42, 0});
  const Eigen::VectorXd gd = green.green_diag();
  CHECK((s0.variance.values - gd).cwiseAbs().maxCoeff() < 1e-8 * gd.maxCoeff());

  const int N = 6000;
  int center = -1, other = -1;
  for (int i = 0; i < n; ++i) {
    if (lat->nodes[static_cast<std::size_t>(i)].norm() < 1e-12) center = i;
    if ((lat->nodes[static_cast<std::size_t>(i)] - Eigen::Vector2d(0.5, 0)).norm() < 1e-12)
      other = i;
  }
  REQUIRE(center >= 0);
  REQUIRE(other >= 0);
  const double gref = green.green_column(center)[other];
  CovAccum spec_cov, chol_cov;
  for (int r = 0; r < N; ++r) {
    const GffSample a = sample_exact(basis, {42, static_cast<std::uint64_t>(r)});
    const GffSample b = sample_exact(green, {43, static_cast<std::uint64_t>(r)});
    spec_cov.add(a.field.values[center], a.field.values[other]);
    chol_cov.add(b.field.values[center], b.field.values[other]);
  }
  const double se = std::sqrt((gd[center] * gd[other] + gref * gref) / N);
  CHECK(std::abs(spec_cov.cov() - gref) < 3 * se);
  CHECK(std::abs(chol_cov.cov() - gref) < 3 * se);
  CHECK(std::abs(spec_cov.sx / N) < 3 * std::sqrt(gd[center] / N));

  SUBCASE("incomplete basis is rejected") {
    const SpectralBasis part = disk_spectrum(lat, 5);
    CHECK_THROWS_AS(sample_exact(part, {1, 1}), UsageError);
  }
}

TEST_CASE("obe truncations are bitwise prefixes") {
  const auto lat = build_lattice(1.0 / 8);
  const int n = static_cast<int>(lat->size());
  const SpectralBasis basis = disk_spectrum(lat, n);
  const SampleKey key{7, 3};

  const GffSample zero = sample_obe(basis, 0, key);
  CHECK(zero.field.values.norm() == 0.0);

  const GffSample full = sample_obe(basis, n, key);
  const GffSample exact = sample_exact(basis, key);
  CHECK(full.field.values == exact.field.values);

  int center = 0;
  for (int i = 0; i < n; ++i)
    if (lat->nodes[static_cast<std::size_t>(i)].norm() < 1e-12) center = i;
  double prev = -1.0;
  for (int m : {4, 16, 64, n}) {
    const GffSample s = sample_obe(basis, m, key);
    CHECK(s.variance.values[center] > prev);
    prev = s.variance.values[center];
  }
  CHECK_THROWS_AS(sample_obe(basis, n + 1, key), UsageError);
}

TEST_CASE("white-noise cutoff: marginals, coupling, and the exact limit") {
  const auto lat = build_lattice(1.0 / 8);
  const int n = static_cast<int>(lat->size());
  const SpectralBasis basis = disk_spectrum(lat, n);

  SUBCASE("large eps kills the field") {
    const GffSample s = sample_wn_cutoff(basis, 50.0, {1, 1});
    CHECK(s.field.values.cwiseAbs().maxCoeff() < 1e-12);
    CHECK(s.variance.values.maxCoeff() < 1e-12);
  }
  SUBCASE("eps=0 rung is bitwise the exact sample") {
    const auto fam = sample_wn_family(basis, {0.3, 0.1, 0.0}, {5, 9});
    const GffSample exact = sample_exact(basis, {5, 9});
    CHECK(fam[2].field.values == exact.field.values);
    const double d0 = (fam[0].field.values - exact.field.values).norm();
    const double d1 = (fam[1].field.values - exact.field.values).norm();
    CHECK(d1 < d0);
  }
  SUBCASE("family covariance carries the eps-max structure") {
    const double e1 = 0.35, e2 = 0.15;
    int center = 0, other = 0;
    for (int i = 0; i < n; ++i) {
      if (lat->nodes[static_cast<std::size_t>(i)].norm() < 1e-12) center = i;
      if ((lat->nodes[static_cast<std::size_t>(i)] - Eigen::Vector2d(0.25, 0)).norm() < 1e-12)
        other = i;
    }
    double ref = 0.0;  // sum (2pi/lam) e^{-lam (e1 v e2)^2} e_j(x) e_j(y)
    for (int j = 0; j < n; ++j)
      ref += (2.0 * M_PI / basis.lambdas[j]) *
             std::exp(-basis.lambdas[j] * e1 * e1) * basis.modes(center, j) *
             basis.modes(other, j);
    const int N = 8000;
    CovAccum acc;
    double var_c = 0, var_o = 0;
    for (int r = 0; r < N; ++r) {
      const auto fam =
          sample_wn_family(basis, {e1, e2}, {11, static_cast<std::uint64_t>(r)});
      acc.add(fam[0].field.values[center], fam[1].field.values[other]);
      var_c = fam[0].variance.values[center];
      var_o = fam[1].variance.values[other];
    }
    const double se = std::sqrt((var_c * var_o + ref * ref) / N);
    CHECK(std::abs(acc.cov() - ref) < 3 * se);
  }
  SUBCASE("variance is monotone as the cutoff is removed") {
    const auto fam = sample_wn_family(basis, {0.5, 0.25, 0.1, 0.0}, {3, 3});
    for (std::size_t m = 1; m < fam.size(); ++m)
      for (int i = 0; i < n; ++i)
        CHECK(fam[m].variance.values[i] >= fam[m - 1].variance.values[i] - 1e-12);
  }
}

TEST_CASE("circle averages") {
  const auto lat = build_lattice(1.0 / 32);
  const GreenOperator green(lat);
  CHECK_THROWS_AS(CircleAverager(green, 1.0 / 32), ConfigError);

  const double eps = 0.125;
  const CircleAverager avg(green, eps);
  CHECK(avg.quadrature_points() >= 16);
  CHECK(avg.quadrature_points() >= static_cast<int>(2 * M_PI * eps * 32));

  int center = 0;
  for (std::size_t i = 0; i < lat->size(); ++i)
    if (lat->nodes[i].norm() < 1e-12) center = static_cast<int>(i);

  SUBCASE("center variance is about ln(1/eps)") {
    const GffSample base = sample_exact(green, {21, 0});
    const GffSample ca = avg.apply(base);
    CHECK(ca.variance.values[center] ==
          doctest::Approx(std::log(1.0 / eps)).epsilon(0.08));
  }
  SUBCASE("linearity under the shared stencil") {
    const GffSample a = sample_exact(green, {22, 0});
    const GffSample b = sample_exact(green, {22, 1});
    const ScalarField sum(lat, a.field.values + b.field.values);
    const ScalarField lhs = avg.apply(sum);
    const Eigen::VectorXd rhs =
        avg.apply(a.field).values + avg.apply(b.field).values;
    CHECK((lhs.values - rhs).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("small radius tracks the base field") {
    const GffSample base = sample_exact(green, {23, 0});
    const GffSample tight = CircleAverager(green, 2.0 / 32).apply(base);
    const GffSample wide = CircleAverager(green, 8.0 / 32).apply(base);
    CHECK((tight.field.values - base.field.values).norm() <
          (wide.field.values - base.field.values).norm());
  }
}

TEST_CASE("covariance fidelity panel at 3 SE") {
  const auto lat = build_lattice(1.0 / 8);
  const GreenOperator green(lat);
  const int n = static_cast<int>(lat->size());
  const int N = 5000;
  Eigen::MatrixXd samples(n, N);
  for (int r = 0; r < N; ++r)
    samples.col(r) =
        sample_exact(green, {77, static_cast<std::uint64_t>(r)}).field.values;
  const Eigen::VectorXd mean = samples.rowwise().mean();
  const Eigen::VectorXd gd = green.green_diag();

  // zero mean nodewise: nearly every node within 3 SE
  int mean_ok = 0;
  for (int i = 0; i < n; ++i)
    if (std::abs(mean[i]) < 3 * std::sqrt(gd[i] / N)) ++mean_ok;
  CHECK(mean_ok >= static_cast<int>(0.98 * n));

  int within = 0, total = 0;
  for (int t = 0; t < 60; ++t) {
    const int i = static_cast<int>(rng::hash4(3, 1, t, 0) % n);
    const int j = static_cast<int>(rng::hash4(3, 2, t, 0) % n);
    if (i == j) continue;
    const double gref = green.green_column(i)[j];
    double cov = 0;
    for (int r = 0; r < N; ++r)
      cov += (samples(i, r) - mean[i]) * (samples(j, r) - mean[j]);
    cov /= N;
    const double se = std::sqrt((gd[i] * gd[j] + gref * gref) / N);
    if (std::abs(cov - gref) < 3 * se) ++within;
    ++total;
  }
  CHECK(within >= static_cast<int>(0.95 * total));
}

TEST_CASE("conformal invariance of the sampled field in law") {
  const auto lat = build_lattice(1.0 / 16);
  const GreenOperator green(lat);
  const MobiusMap psi({0.3, 0.1});
  const Eigen::Vector2d a(0.2, 0.0), b(-0.1, 0.25);
  const double gref = green_kernel(a, b);
  const int N = 8000;
  CovAccum acc;
  for (int r = 0; r < N; ++r) {
    const GffSample s = sample_exact(green, {31, static_cast<std::uint64_t>(r)});
    acc.add(interpolate(s.field, psi(a)), interpolate(s.field, psi(b)));
  }
  const double va = std::log(1.0 / (1 - psi(a).squaredNorm())) + 2.0;
  const double vb = std::log(1.0 / (1 - psi(b).squaredNorm())) + 2.0;
  const double se = std::sqrt((va * vb + gref * gref) / N);
  // interpolation smoothing allowance on top of MC error
  CHECK(std::abs(acc.cov() - gref) < 3 * se + 0.08);
}

TEST_CASE("variance profile follows the conformal radius") {
  // Var X(x) = ln C(x) + lattice constant: differences of the Green diagonal
  // between interior nodes match differences of ln C
  const auto lat = build_lattice(1.0 / 32);
  const GreenOperator green(lat);
  const Eigen::VectorXd gd = green.green_diag();
  const int a = lat->node_at(0, 0);
  for (const Eigen::Vector2d probe :
       {Eigen::Vector2d(0.25, 0), Eigen::Vector2d(0.5, 0.25), Eigen::Vector2d(0, 0.625)}) {
    const int b = lat->node_at(static_cast<int>(std::lround(probe.x() * 32)),
                               static_cast<int>(std::lround(probe.y() * 32)));
    REQUIRE(b >= 0);
    const double dvar = gd[a] - gd[b];
    const double dlnc = std::log(conformal_radius(lat->nodes[static_cast<std::size_t>(a)])) -
                        std::log(conformal_radius(lat->nodes[static_cast<std::size_t>(b)]));
    CHECK(dvar == doctest::Approx(dlnc).epsilon(0.08));
  }
}

TEST_CASE("seed determinism is bitwise") {
  const auto lat = build_lattice(1.0 / 8);
  const GreenOperator green(lat);
  const GffSample a = sample_exact(green, {123, 45});
  const GffSample b = sample_exact(green, {123, 45});
  CHECK(a.field.values == b.field.values);
  const GffSample c = sample_exact(green, {123, 46});
  CHECK(a.field.values != c.field.values);
}

TEST_SUITE_END();
