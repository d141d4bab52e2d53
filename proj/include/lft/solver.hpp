#pragma once

#include <optional>
#include <vector>

#include "lft/green.hpp"
#include "lft/insertion.hpp"
#include "lft/metric.hpp"
#include "lft/norms.hpp"

namespace lft {

struct SolverConfig {
  double tolerance = 1e-10;  // residual in lattice L2
  int max_iterations = 50;
  double armijo_c1 = 1e-4;
  double min_step = 1e-12;
  std::optional<Eigen::VectorXd> initial_guess;     // for the regular part
  std::vector<double>* objective_trace = nullptr;  // per accepted iterate
};

struct LiouvilleSolution {
  ScalarField U;             // full solution, singular part included
  ScalarField regular_part;  // U - H (== U without insertions)
  double residual_norm = 0.0;
  double energy = 0.0;       // E(U) of the variational functional
  int iterations = 0;
  double Lambda = 0.0;
  MetricTensor::Kind metric_kind = MetricTensor::Kind::flat;
  InsertionSet insertions;
  double h = 0.0;
};

// Solve Delta U = ghat (8 pi^2 Lambda e^U + R_ghat) - 2 pi f - 2 pi sum chi_i
// delta_{z_i} with zero boundary, by the splitting U = W + H and damped
// Newton on the regular part W (gradient-descent fallback on the energy).
LiouvilleSolution solve_liouville(double Lambda, const MetricTensor& metric,
                                  const ScalarField* f, const InsertionSet& ins,
                                  const SolverConfig& cfg = {});

// E(u) = (1/4pi) int(|grad(u-H)|^2 + 2 ghat R u + 16 pi^2 Lambda ghat e^u);
// flat background reduces to the rate-function energy.
double energy(const ScalarField& u, double Lambda, const InsertionSet& ins,
              const MetricTensor& metric);
double energy(const ScalarField& u, double Lambda, const InsertionSet& ins = {});

// F(Lambda) = -E(U) at the solved U
double free_energy(double Lambda, const MetricTensor& metric,
                   const InsertionSet& ins = {}, const SolverConfig& cfg = {});

// F(Lambda, f) = -(1/4pi) int(|grad(V-H)|^2 + 16 pi^2 Lambda e^V)
//                + int f (V - U - H); requires the flat background
double perturbed_free_energy(double Lambda, const ScalarField& f,
                             const InsertionSet& ins = {},
                             const SolverConfig& cfg = {});
double perturbed_free_energy(const LiouvilleSolution& base, const ScalarField& f,
                             const SolverConfig& cfg = {});

// linearization: (Delta - 8 pi^2 Lambda ghat e^{U0}) V = -2 pi h
ScalarField gateaux_derivative(const LiouvilleSolution& U0, const ScalarField& hdir,
                               const MetricTensor& metric);
ScalarField gateaux_derivative(const LiouvilleSolution& U0, const ScalarField& hdir);

// I*(h) = E(U+h) - E(U) >= 0
double rate_function(const ScalarField& hfield, double Lambda,
                     const InsertionSet& ins = {}, const SolverConfig& cfg = {});

struct LegendreReport {
  double supremum = 0.0;      // sup over the eigenmode family (lower bound)
  double rate_value = 0.0;    // I*(h)
  double gap = 0.0;           // rate_value - supremum
  double gap_rel = 0.0;
  int iterations = 0;
  bool converged = false;
};

// maximize f -> <h,f> - (F(Lambda,f) - F(Lambda)) over the span of the first
// m Laplacian eigenmodes (Newton ascent with backtracking)
LegendreReport legendre_check(const ScalarField& hfield, double Lambda,
                              int m_modes = 16, const SolverConfig& cfg = {});

struct ContinuityRow {
  double t = 0.0;
  double gap_h1 = 0.0;      // |U_t - U_0|_{H1}
  double df_l2 = 0.0;       // |f_t - f_0|_{L2}
  double df_hminus1 = 0.0;  // sine-basis H^{-1} proxy
};

std::vector<ContinuityRow> solution_continuity_check(
    double Lambda, const ScalarField& f0, const std::vector<ScalarField>& f_seq,
    const std::vector<double>& t_labels, const SolverConfig& cfg = {});

}  // namespace lft
