#include <cmath>

#include "doctest.h"
#include "lft/gff.hpp"
#include "lft/solver.hpp"

using namespace lft;

namespace {
constexpr double kLambdaHalf = 2.0 / (M_PI * M_PI);  // alpha = 1/2 profile

double radial_exact(double r2) {
  return 2.0 * std::log(0.5 / (1.0 - 0.5 * r2));
}

// 1d quadrature oracle for F(Lambda) of the alpha=1/2 profile:
// -(1/4pi) int (U'(r)^2 + 16 pi^2 Lambda e^U) 2 pi r dr
double free_energy_radial_oracle() {
  const double alpha = 0.5;
  auto du = [&](double r) { return 4.0 * alpha * r / (1.0 - alpha * r * r); };
  auto eu = [&](double r) {
    const double v = (1.0 - alpha) / (1.0 - alpha * r * r);
    return v * v;
  };
  const int panels = 20000;
  double acc = 0.0;
  for (int i = 0; i < panels; ++i) {
    const double a = static_cast<double>(i) / panels, b = a + 1.0 / panels,
                 m = (a + b) / 2;
    auto g = [&](double r) {
      return (du(r) * du(r) + 16.0 * M_PI * M_PI * kLambdaHalf * eu(r)) * 2.0 *
             M_PI * r;
    };
    acc += (b - a) / 6.0 * (g(a) + 4.0 * g(m) + g(b));
  }
  return -acc / (4.0 * M_PI);
}
}  // namespace

TEST_SUITE_BEGIN("solver");

TEST_CASE("Lambda = 0 with no sources gives the zero solution") {
  const auto lat = build_lattice(1.0 / 16);
  const auto flat = MetricTensor::flat(lat);
  const auto sol = solve_liouville(0.0, flat, nullptr, {}, {});
  CHECK(sol.U.values.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(sol.energy == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS_AS(solve_liouville(-0.1, flat, nullptr, {}, {}), DomainError);
}

TEST_CASE("radial profile values from the explicit solution") {
  const auto lat = build_lattice(1.0 / 64);
  const auto flat = MetricTensor::flat(lat);
  const auto sol = solve_liouville(kLambdaHalf, flat, nullptr, {}, {});
  int center = -1, half = -1;
  for (std::size_t i = 0; i < lat->size(); ++i) {
    if (lat->nodes[i].norm() < 1e-12) center = static_cast<int>(i);
    if ((lat->nodes[i] - Eigen::Vector2d(0.5, 0)).norm() < 1e-12)
      half = static_cast<int>(i);
  }
  CHECK(sol.U.values[center] == doctest::Approx(-1.386294).epsilon(2e-3));
  CHECK(sol.U.values[half] == doctest::Approx(-1.119232).epsilon(2e-3));
  CHECK(sol.U.values[center] == doctest::Approx(radial_exact(0.0)).epsilon(2e-3));

  SUBCASE("maximum principle: U <= 0") { CHECK(sol.U.values.maxCoeff() <= 1e-12); }
  SUBCASE("fixed-point identity through the Green operator") {
    const GreenOperator green(lat);
    const ScalarField eu(lat, sol.U.values.array().exp().matrix());
    const ScalarField gu = green.apply(eu);
    const Eigen::VectorXd rhs = -4.0 * M_PI * kLambdaHalf * gu.values;
    CHECK((rhs - sol.U.values).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("grid convergence toward the radial solution") {
  double prev_linf = 0.0;
  for (double h : {1.0 / 16, 1.0 / 32}) {
    const auto lat = build_lattice(h);
    const auto sol = solve_liouville(kLambdaHalf, MetricTensor::flat(lat), nullptr, {}, {});
    double linf = 0.0;
    for (std::size_t i = 0; i < lat->size(); ++i)
      linf = std::max(linf, std::abs(sol.U.values[static_cast<Eigen::Index>(i)] -
                                     radial_exact(lat->nodes[i].squaredNorm())));
    if (prev_linf > 0.0) CHECK(linf < 0.45 * prev_linf);
    prev_linf = linf;
  }
}

TEST_CASE("uniqueness from distinct initial guesses") {
  const auto lat = build_lattice(1.0 / 16);
  const auto flat = MetricTensor::flat(lat);
  SolverConfig a, b;
  b.initial_guess = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(lat->size()), -2.0);
  const auto ua = solve_liouville(0.3, flat, nullptr, {}, a);
  const auto ub = solve_liouville(0.3, flat, nullptr, {}, b);
  CHECK((ua.U.values - ub.U.values).cwiseAbs().maxCoeff() < 10 * a.tolerance);
}

TEST_CASE("newton iterates descend the energy objective") {
  const auto lat = build_lattice(1.0 / 32);
  std::vector<double> trace;
  SolverConfig cfg;
  cfg.objective_trace = &trace;
  solve_liouville(0.5, MetricTensor::flat(lat), nullptr, {}, cfg);
  REQUIRE(trace.size() >= 2);
  for (std::size_t i = 1; i < trace.size(); ++i)
    CHECK(trace[i] <= trace[i - 1] + 1e-10 * std::abs(trace[i - 1]));
}

TEST_CASE("hyperbolic background anchor: Lambda = 1/(4 pi^2) gives U = 0") {
  const auto lat = build_lattice(1.0 / 32);
  const auto hyp = MetricTensor::hyperbolic(lat);
  const auto sol = solve_liouville(1.0 / (4.0 * M_PI * M_PI), hyp, nullptr, {}, {});
  CHECK(sol.U.values.cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("insertion splitting keeps the regular part continuous") {
  InsertionSet ins{{{Eigen::Vector2d(0, 0), 1.0}}};
  const double Lambda = 0.1;
  // U + ln|x| near the origin stabilizes under refinement
  std::vector<double> at_probe;
  for (double h : {1.0 / 16, 1.0 / 32, 1.0 / 64}) {
    const auto lat = build_lattice(h);
    const auto sol = solve_liouville(Lambda, MetricTensor::flat(lat), nullptr, ins, {});
    // regular part at the node nearest (h, 0) steps toward a finite limit
    const int id = lat->node_at(1, 0);
    REQUIRE(id >= 0);
    at_probe.push_back(sol.regular_part.values[id]);
    CHECK(sol.regular_part.values.allFinite());
  }
  CHECK(std::abs(at_probe[2] - at_probe[1]) < std::abs(at_probe[1] - at_probe[0]) + 5e-3);
}

TEST_CASE("energy functional") {
  const auto lat = build_lattice(1.0 / 16);
  SUBCASE("zero field, Lambda = 0") {
    CHECK(energy(ScalarField(lat), 0.0) == doctest::Approx(0.0));
  }
  SUBCASE("zero field with interaction: 4 pi Lambda * lattice area") {
    const double Lambda = 0.3;
    const double area = static_cast<double>(lat->size()) * lat->cell_area();
    CHECK(energy(ScalarField(lat), Lambda) ==
          doctest::Approx(4.0 * M_PI * Lambda * area).epsilon(1e-12));
    // continuum value 4 pi^2 Lambda up to the clipped ring
    CHECK(energy(ScalarField(lat), Lambda) ==
          doctest::Approx(4.0 * M_PI * M_PI * Lambda).epsilon(0.08));
  }
  SUBCASE("solved U minimizes E") {
    const double Lambda = 0.4;
    const auto sol = solve_liouville(Lambda, MetricTensor::flat(lat), nullptr, {}, {});
    for (int t = 0; t < 5; ++t) {
      auto bump = make_field(lat, [&](const Eigen::Vector2d& x) {
        return 0.1 * std::sin((t + 1) * x.x() * 3.0) * (1 - x.squaredNorm());
      });
      const ScalarField cand(lat, sol.U.values + bump.values);
      CHECK(energy(cand, Lambda) >= sol.energy - 1e-12);
    }
  }
}

TEST_CASE("free energy values and monotonicity") {
  const auto lat = build_lattice(1.0 / 64);
  const auto flat = MetricTensor::flat(lat);
  CHECK(free_energy(0.0, flat) == doctest::Approx(0.0).epsilon(1e-12));

  const double oracle = free_energy_radial_oracle();
  CHECK(oracle == doctest::Approx(4.0 * std::log(2.0) - 8.0).epsilon(1e-6));
  // the clipped ring costs O(h) against the continuum value; the gap shrinks
  // under refinement
  const double gap32 =
      std::abs(free_energy(kLambdaHalf, MetricTensor::flat(build_lattice(1.0 / 32))) -
               oracle);
  const double gap64 = std::abs(free_energy(kLambdaHalf, flat) - oracle);
  CHECK(gap64 < gap32);
  CHECK(gap64 / std::abs(oracle) < 0.03);

  double prev = 1.0;
  for (double L : {0.05, 0.1, 0.2, 0.4}) {
    const double f = free_energy(L, MetricTensor::flat(build_lattice(1.0 / 16)));
    CHECK(f < prev);
    prev = f;
  }
}

TEST_CASE("perturbed free energy") {
  const auto lat = build_lattice(1.0 / 16);
  const double Lambda = 0.2;
  const SpectralBasis basis = disk_spectrum(lat, 3);
  const ScalarField f0(lat, basis.modes.col(0));
  const ScalarField f1(lat, 0.8 * basis.modes.col(1) + 0.4 * basis.modes.col(0));

  SUBCASE("f = 0 reduces to F(Lambda)") {
    const ScalarField zero(lat);
    CHECK(perturbed_free_energy(Lambda, zero) ==
          doctest::Approx(free_energy(Lambda, MetricTensor::flat(lat))).epsilon(1e-10));
  }
  SUBCASE("midpoint convexity of f -> F(Lambda,f) - F(Lambda)") {
    auto fe = [&](double t) {
      const ScalarField ft(lat, (1 - t) * f0.values + t * f1.values);
      return perturbed_free_energy(Lambda, ft);
    };
    const double mid = fe(0.5);
    CHECK(mid <= 0.5 * (fe(0.0) + fe(1.0)) + 1e-9);
  }
  SUBCASE("small-f expansion is second order") {
    const double base = free_energy(Lambda, MetricTensor::flat(lat));
    const ScalarField f2(lat, 1e-2 * f0.values);
    const ScalarField f3(lat, 1e-3 * f0.values);
    const double d2 = std::abs(perturbed_free_energy(Lambda, f2) - base);
    const double d3 = std::abs(perturbed_free_energy(Lambda, f3) - base);
    const double slope = std::log10(d2 / d3);
    CHECK(slope > 1.8);
    CHECK(slope < 2.2);
  }
}

TEST_CASE("gateaux derivative") {
  const auto lat = build_lattice(1.0 / 16);
  const double Lambda = 0.2;
  const auto flat = MetricTensor::flat(lat);
  const auto base = solve_liouville(Lambda, flat, nullptr, {}, {});
  const SpectralBasis basis = disk_spectrum(lat, 2);
  const ScalarField hdir(lat, basis.modes.col(1));

  SUBCASE("zero direction") {
    const ScalarField z(lat);
    CHECK(gateaux_derivative(base, z).values.norm() == 0.0);
  }
  SUBCASE("finite differences converge at slope one") {
    const ScalarField V = gateaux_derivative(base, hdir);
    std::vector<double> err;
    for (double t : {1e-1, 1e-2, 1e-3}) {
      const ScalarField ft(lat, t * hdir.values);
      const auto ut = solve_liouville(Lambda, flat, &ft, {}, {});
      const Eigen::VectorXd fd = (ut.U.values - base.U.values) / t;
      err.push_back(std::sqrt(lat->cell_area()) * (fd - V.values).norm());
    }
    const double slope = std::log10(err[0] / err[2]) / 2.0;
    CHECK(slope == doctest::Approx(1.0).epsilon(0.25));
  }
  SUBCASE("Lambda = 0 reduces to the Green operator") {
    const auto zero_sol = solve_liouville(0.0, flat, nullptr, {}, {});
    const ScalarField V = gateaux_derivative(zero_sol, hdir);
    const GreenOperator green(lat);
    const ScalarField W = green.apply(hdir);
    CHECK((V.values - W.values).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("rate function and fenchel duality") {
  const auto lat = build_lattice(1.0 / 16);
  const double Lambda = 0.2;
  const auto flat = MetricTensor::flat(lat);

  SUBCASE("I*(0) = 0 and I*(h) > 0 for nonzero h") {
    const ScalarField zero(lat);
    CHECK(rate_function(zero, Lambda) == doctest::Approx(0.0).epsilon(1e-12));
    for (int t = 0; t < 5; ++t) {
      auto h = make_field(lat, [&](const Eigen::Vector2d& x) {
        return 0.3 * std::sin((t + 1) * 2.0 * x.x()) * (1 - x.squaredNorm());
      });
      CHECK(rate_function(h, Lambda) > 0.0);
    }
  }
  SUBCASE("legendre gap closes on h = V - U instances") {
    const SpectralBasis basis = disk_spectrum(lat, 4);
    const ScalarField f(lat, 1.5 * basis.modes.col(0) - 0.7 * basis.modes.col(2));
    const auto base = solve_liouville(Lambda, flat, nullptr, {}, {});
    const auto vsol = solve_liouville(Lambda, flat, &f, {}, {});
    const ScalarField h(lat, vsol.U.values - base.U.values);
    const LegendreReport rep = legendre_check(h, Lambda, 16, {});
    CHECK(rep.gap_rel < 0.01);
    CHECK(rep.rate_value > 0.0);
  }
}

TEST_CASE("solution continuity in the source") {
  const auto lat = build_lattice(1.0 / 16);
  const double Lambda = 0.2;
  const SpectralBasis basis = disk_spectrum(lat, 2);
  const ScalarField f0(lat, basis.modes.col(0));
  std::vector<ScalarField> seq;
  std::vector<double> ts = {0.2, 0.05, 0.01};
  for (double t : ts) seq.emplace_back(lat, f0.values + t * basis.modes.col(1));
  const auto rows = solution_continuity_check(Lambda, f0, seq, ts, {});
  REQUIRE(rows.size() == 3);
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].gap_h1 < rows[i - 1].gap_h1);
  // gap = O(t): ratio tracks t within a factor
  CHECK(rows[2].gap_h1 / rows[0].gap_h1 < 0.1);
  // stability estimate |U_t - U_0|_{H1} <= C |f_t - f_0|_{L2}; the disk
  // Poincare constant keeps C of order 2 pi / sqrt(lambda_1)
  for (const auto& row : rows) CHECK(row.gap_h1 <= 3.0 * row.df_l2);
  // f_t = f_0 gives zero gap
  const auto zero_rows = solution_continuity_check(Lambda, f0, {f0}, {0.0}, {});
  CHECK(zero_rows[0].gap_h1 < 1e-9);
}

TEST_SUITE_END();
