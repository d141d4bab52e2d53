#include <cmath>

#include "doctest.h"
#include "lft/chaos.hpp"

using namespace lft;

namespace {
// 1d radial quadrature of f(r) * 2 pi r dr on [0,1] (composite Simpson)
double radial_integral(const std::function<double(double)>& f, int panels = 4000) {
  double acc = 0.0;
  const double dr = 1.0 / panels;
  for (int i = 0; i < panels; ++i) {
    const double a = i * dr, m = a + dr / 2, b = a + dr;
    auto g = [&](double r) { return f(r) * 2.0 * M_PI * r; };
    acc += dr / 6.0 * (g(a) + 4.0 * g(m) + g(b));
  }
  return acc;
}
}  // namespace

TEST_SUITE_BEGIN("chaos");

TEST_CASE("hermite recurrence") {
  CHECK(hermite(0, 1.7) == 1.0);
  CHECK(hermite(1, 1.7) == 1.7);
  CHECK(hermite(2, 2.0) == doctest::Approx(3.0));        // t^2 - 1
  CHECK(hermite(3, 2.0) == doctest::Approx(2.0));        // t^3 - 3t
  CHECK(hermite(4, 2.0) == doctest::Approx(16 - 24 + 3));  // t^4 - 6t^2 + 3
}

TEST_CASE("wick powers") {
  const auto lat = build_lattice(1.0 / 8);
  GffSample X;
  X.field = ScalarField(lat);
  X.variance = ScalarField(lat);
  X.field.values.setConstant(2.0);
  X.variance.values.setConstant(1.0);

  CHECK(wick_power(X, 0).values.maxCoeff() == 1.0);
  CHECK(wick_power(X, 2).values[0] == doctest::Approx(3.0));  // H2(2) = 3

  SUBCASE("zero variance convention") {
    X.variance.values.setZero();
    int zeros = 0;
    const ScalarField w = wick_power(X, 2, &zeros);
    CHECK(w.values.cwiseAbs().maxCoeff() == 0.0);
    CHECK(zeros == static_cast<int>(lat->size()));
  }
}

TEST_CASE("wick orthogonality against Green powers") {
  const auto lat = build_lattice(1.0 / 8);
  const GreenOperator green(lat);
  const int n = static_cast<int>(lat->size());
  int center = 0, other = 0;
  for (int i = 0; i < n; ++i) {
    if (lat->nodes[static_cast<std::size_t>(i)].norm() < 1e-12) center = i;
    if ((lat->nodes[static_cast<std::size_t>(i)] - Eigen::Vector2d(0.375, 0)).norm() < 1e-12)
      other = i;
  }
  const double g = green.green_column(center)[other];
  const int N = 20000;
  double s11 = 0, s22 = 0, s12 = 0, s33 = 0;
  for (int r = 0; r < N; ++r) {
    const GffSample X = sample_exact(green, {55, static_cast<std::uint64_t>(r)});
    const double p1c = wick_power(X, 1).values[center];
    const double p1o = wick_power(X, 1).values[other];
    const double p2c = wick_power(X, 2).values[center];
    const double p2o = wick_power(X, 2).values[other];
    const double p3c = wick_power(X, 3).values[center];
    const double p3o = wick_power(X, 3).values[other];
    s11 += p1c * p1o;
    s22 += p2c * p2o;
    s12 += p1c * p2o;
    s33 += p3c * p3o;
  }
  s11 /= N;
  s22 /= N;
  s12 /= N;
  s33 /= N;
  // E[:X^n(x)::X^m(y):] = n! 1_{n=m} G(x,y)^n
  CHECK(s11 == doctest::Approx(g).epsilon(0.15));
  CHECK(s22 == doctest::Approx(2 * g * g).epsilon(0.30));
  CHECK(s33 == doctest::Approx(6 * g * g * g).epsilon(0.75));
  CHECK(std::abs(s12) < 0.1);
}

TEST_CASE("wick exponential") {
  const auto lat = build_lattice(1.0 / 8);
  const GreenOperator green(lat);

  SUBCASE("gamma = 0 gives the unit field") {
    const GffSample X = sample_exact(green, {66, 0});
    CHECK((wick_exponential(X, 0.0).values.array() - 1.0).abs().maxCoeff() == 0.0);
  }
  SUBCASE("unit mean per node") {
    const int N = 20000;
    int probe = static_cast<int>(lat->size() / 3);
    double acc = 0, acc2 = 0;
    for (int r = 0; r < N; ++r) {
      const GffSample X = sample_exact(green, {67, static_cast<std::uint64_t>(r)});
      const double v = wick_exponential(X, 0.8).values[probe];
      acc += v;
      acc2 += v * v;
    }
    const double mean = acc / N;
    const double se = std::sqrt((acc2 / N - mean * mean) / N);
    CHECK(std::abs(mean - 1.0) < 3 * se);
  }
  SUBCASE("truncated wick series matches nodewise") {
    const auto coarse = build_lattice(1.0 / 4);
    const GreenOperator g4(coarse);
    const GffSample X = sample_exact(g4, {68, 0});
    const double gamma = 0.5;
    Eigen::VectorXd series = Eigen::VectorXd::Zero(X.field.values.size());
    double fact = 1.0;
    for (int n = 0; n <= 12; ++n) {
      if (n > 0) fact *= n;
      series += std::pow(gamma, n) / fact * wick_power(X, n).values;
    }
    const Eigen::VectorXd ref = wick_exponential(X, gamma).values;
    CHECK((series - ref).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("gmc measure expected masses") {
  const auto lat = build_lattice(1.0 / 32);
  const GreenOperator green(lat);
  const auto flat = MetricTensor::flat(lat);

  SUBCASE("gamma = 0 reduces to cell areas") {
    const GffSample X = sample_exact(green, {70, 0});
    const ChaosMeasure m = gmc_measure(X, 0.0, flat);
    CHECK(m.total_mass() ==
          doctest::Approx(static_cast<double>(lat->size()) * lat->cell_area())
              .epsilon(1e-12));
    // clipped area sits within ~h of pi
    CHECK(m.total_mass() == doctest::Approx(M_PI).epsilon(0.05));
  }
  SUBCASE("gamma >= 2 unsupported") {
    const GffSample X = sample_exact(green, {70, 1});
    CHECK_THROWS_AS(gmc_measure(X, 2.0, flat), DomainError);
  }
  SUBCASE("flat mean mass matches the radial oracle 2 pi/(2+gamma^2)") {
    const double gamma = 1.0;
    const double oracle =
        radial_integral([&](double r) { return std::pow(1 - r * r, gamma * gamma / 2); });
    CHECK(oracle == doctest::Approx(2 * M_PI / (2 + gamma * gamma)).epsilon(1e-6));
    const int N = 4000;
    double acc = 0, acc2 = 0;
    for (int r = 0; r < N; ++r) {
      const GffSample X = sample_exact(green, {71, static_cast<std::uint64_t>(r)});
      const double v = gmc_measure(X, gamma, flat).total_mass();
      acc += v;
      acc2 += v * v;
    }
    const double mean = acc / N;
    const double se = std::sqrt((acc2 / N - mean * mean) / N);
    // lattice bias: deterministic expected mass vs the continuum integral
    const GffSample X0 = sample_exact(green, {71, 0});
    ChaosMeasure det = gmc_measure(X0, gamma, flat);
    double lattice_expected = 0.0;
    for (std::size_t i = 0; i < lat->size(); ++i)
      lattice_expected +=
          std::pow(conformal_radius(lat->nodes[i]), gamma * gamma / 2) * lat->cell_area();
    CHECK(std::abs(mean - oracle) <
          3 * se + std::abs(lattice_expected - oracle) + 1e-12);
  }
  SUBCASE("hyperbolic mean mass matches its radial oracle") {
    const double gamma = 1.0;
    const auto hyp = MetricTensor::hyperbolic(lat);
    // ghat^{-1/4} C^{1/2} = (1-r^2)/sqrt(2)
    const double oracle =
        radial_integral([&](double r) { return (1 - r * r) / std::sqrt(2.0); });
    const int N = 3000;
    double acc = 0, acc2 = 0;
    for (int r = 0; r < N; ++r) {
      const GffSample X = sample_exact(green, {72, static_cast<std::uint64_t>(r)});
      const double v = gmc_measure(X, gamma, hyp).total_mass();
      acc += v;
      acc2 += v * v;
    }
    const double mean = acc / N;
    const double se = std::sqrt((acc2 / N - mean * mean) / N);
    CHECK(std::abs(mean - oracle) < 3 * se + 0.03 * oracle);
  }
}

TEST_CASE("insertion weights") {
  const auto lat = build_lattice(1.0 / 16);

  SUBCASE("empty set is the unit weight") {
    const InsertionWeight w = insertion_weight(lat, {});
    CHECK(w.log_weight.values.cwiseAbs().maxCoeff() == 0.0);
    CHECK((w.weight.values.array() - 1.0).abs().maxCoeff() == 0.0);
  }
  SUBCASE("single insertion at the origin gives the 1/|x| profile") {
    InsertionSet ins{{{Eigen::Vector2d(0, 0), 1.0}}};
    const InsertionWeight w = insertion_weight(lat, ins);
    for (std::size_t i = 0; i < lat->size(); ++i) {
      const double r = lat->nodes[i].norm();
      if (r > 0.1 && r < 0.9)
        CHECK(w.weight.values[static_cast<Eigen::Index>(i)] ==
              doctest::Approx(1.0 / r).epsilon(1e-9));
    }
    CHECK(w.capped_nodes == 1);  // the origin node itself
  }
  SUBCASE("lattice sum of e^H stays stable under refinement for chi=1.5") {
    InsertionSet ins{{{Eigen::Vector2d(0, 0), 1.5}}};
    double prev = 0.0;
    for (double h : {1.0 / 16, 1.0 / 32, 1.0 / 64}) {
      const auto l = build_lattice(h);
      const InsertionWeight w = insertion_weight(l, ins);
      const double mass = w.weight.values.sum() * l->cell_area();
      if (prev > 0.0) CHECK(std::abs(mass - prev) / prev < 0.08);
      prev = mass;
    }
  }
  SUBCASE("multiplicative over disjoint subsets") {
    InsertionSet a{{{Eigen::Vector2d(0.2, 0.1), 0.7}}};
    InsertionSet b{{{Eigen::Vector2d(-0.4, 0.3), 1.2}}};
    InsertionSet both{{a.items[0], b.items[0]}};
    const auto wa = insertion_weight(lat, a);
    const auto wb = insertion_weight(lat, b);
    const auto wab = insertion_weight(lat, both);
    const Eigen::VectorXd prod =
        (wa.weight.values.array() * wb.weight.values.array()).matrix();
    CHECK(((wab.weight.values - prod).array().abs() /
           wab.weight.values.array().abs())
              .maxCoeff() < 1e-12);
  }
  SUBCASE("validation errors") {
    CHECK_THROWS_AS(InsertionSet({{Eigen::Vector2d(1.1, 0), 0.5}}), ConfigError);
    CHECK_THROWS_AS(InsertionSet({{Eigen::Vector2d(0.2, 0), 2.0}}), ConfigError);
    CHECK_THROWS_AS(InsertionSet({{Eigen::Vector2d(0.2, 0), 0.5},
                                  {Eigen::Vector2d(0.2, 0), 0.7}}),
                    ConfigError);
  }
}

TEST_CASE("cutoff stability of the chaos mass") {
  // coupled circle-average cutoffs of one exact sample: per-node variance
  // grows and the measure total mass tightens toward the exact mass as the
  // radius shrinks
  const auto lat = build_lattice(1.0 / 32);
  const GreenOperator green(lat);
  const auto flat = MetricTensor::flat(lat);
  const std::vector<double> radii{8.0 / 32, 4.0 / 32, 2.0 / 32};
  std::vector<CircleAverager> avgs;
  for (double e : radii) avgs.emplace_back(green, e);

  const int N = 60;
  for (double gamma : {1.0, 1.4}) {
    std::vector<double> med_gap(radii.size(), 0.0);
    std::vector<std::vector<double>> gaps(radii.size());
    for (int r = 0; r < N; ++r) {
      const GffSample X = sample_exact(green, {85, static_cast<std::uint64_t>(r)});
      const double exact_mass = gmc_measure(X, gamma, flat).total_mass();
      for (std::size_t e = 0; e < radii.size(); ++e) {
        const GffSample Xe = avgs[e].apply(X);
        gaps[e].push_back(
            std::abs(gmc_measure(Xe, gamma, flat).total_mass() - exact_mass));
      }
    }
    for (std::size_t e = 0; e < radii.size(); ++e) {
      std::sort(gaps[e].begin(), gaps[e].end());
      med_gap[e] = gaps[e][static_cast<std::size_t>(N / 2)];
    }
    CHECK(med_gap[1] < med_gap[0]);
    CHECK(med_gap[2] < med_gap[1]);
  }

  // variance of the cutoff field increases as the cutoff is removed; the
  // guarantee is for interior circles, so skip boundary-clipped arcs
  const GffSample X = sample_exact(green, {85, 0});
  for (std::size_t e = 1; e < radii.size(); ++e) {
    const Eigen::VectorXd va = avgs[e - 1].apply(X).variance.values;
    const Eigen::VectorXd vb = avgs[e].apply(X).variance.values;
    for (std::size_t i = 0; i < lat->size(); ++i) {
      if (lat->nodes[i].norm() + radii[e - 1] >= 1.0) continue;
      CHECK(vb[static_cast<Eigen::Index>(i)] >=
            va[static_cast<Eigen::Index>(i)] - 1e-10);
    }
  }
}

TEST_CASE("pushforward and the pathwise conformal check") {
  const auto lat = build_lattice(1.0 / 32);
  const GreenOperator green(lat);
  const GffSample X = sample_exact(green, {80, 4});
  const auto flat = MetricTensor::flat(lat);
  const ChaosMeasure m = gmc_measure(X, 0.5, flat);

  SUBCASE("identity map leaves the measure untouched") {
    const ChaosMeasure pf = pushforward_measure(m, MobiusMap({0, 0}));
    CHECK((pf.weights - m.weights).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("pushforward conserves total mass") {
    const ChaosMeasure pf = pushforward_measure(m, MobiusMap({0.3, 0.0}));
    CHECK(pf.total_mass() == doctest::Approx(m.total_mass()).epsilon(1e-12));
  }
  SUBCASE("region masses agree with the pulled-back construction") {
    const ConformalCheckReport rep = conformal_check(X, 0.5, {0.3, 0.0}, green);
    for (const auto& r : rep.regions) CHECK(r.rel_diff < 0.06);
  }
}

TEST_SUITE_END();
