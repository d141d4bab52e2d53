#pragma once

#include <functional>
#include <vector>

#include "lft/chaos.hpp"
#include "lft/gff.hpp"
#include "lft/params.hpp"
#include "lft/solver.hpp"
#include "lft/spectra.hpp"

namespace lft {

struct McConfig {
  int samples = 10000;
  std::uint64_t seed = 1;
  int threads = 1;
  int eigen_count = 0;  // 0 -> default_eigen_count
  int sine_jmax = 64;
};

struct McEstimate {
  double value = 0.0;
  double se = 0.0;
  double ess = 0.0;
  int n = 0;
  bool reliable = true;  // ess >= 50
};

// deterministic node-pair panel for covariance checks
std::vector<std::pair<int, int>> make_pair_panel(const DiskLattice& lat, int count,
                                                 double min_sep, double max_sep,
                                                 std::uint64_t seed);

// E_{mu,gamma,(z_i,chi_i)}[F(X)] by (a) direct self-normalized importance
// sampling and (b) the Girsanov-shifted estimator; both target the same law.
struct TiltedEstimate {
  McEstimate direct;
  McEstimate shifted;
};
TiltedEstimate tilted_expectation(const std::function<double(const ScalarField&)>& F,
                                  const LftParams& p, const InsertionSet& ins,
                                  const LatticePtr& lat, const McConfig& mc);

struct PartitionRow {
  double gamma = 0.0;
  double gamma2_lnZ = 0.0;
  double se = 0.0;
  double rel_gap = 0.0;  // |gamma2_lnZ - F| / |F|
  double ess = 0.0;
  double const_mc = 0.0;     // mean of the O(1) shifted weight
  double const_mc_se = 0.0;
};
struct PartitionReport {
  std::vector<PartitionRow> rows;  // gamma descending
  double f_lambda = 0.0;
  bool monotone_gap = false;
  // spectral prediction exp(-2 pi Lambda int e^U ln C) * Z_{2 pi Lambda}
  bool with_constant = false;
  double const_spectral = 0.0;
  double const_ratio = 0.0;  // const_mc(smallest gamma) / const_spectral
};
PartitionReport partition_asymptotics(double Lambda, const std::vector<double>& gammas,
                                      const InsertionSet& ins, const LatticePtr& lat,
                                      const McConfig& mc, bool with_o1_constant = false);

struct ConvergenceRow {
  double gamma = 0.0;
  double median_hm1 = 0.0;      // weighted median of |gamma X - U|_{H^-1} proxy
  double median_mass_gap = 0.0;  // weighted median of |chaos mass - int e^U|
  double ess = 0.0;
};
struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  bool hm1_monotone = false;
  bool mass_monotone = false;
  double target_mass = 0.0;  // int e^U dx
};
ConvergenceReport convergence_in_probability(double Lambda,
                                             const std::vector<double>& gammas,
                                             const InsertionSet& ins,
                                             const LatticePtr& lat, const McConfig& mc);

struct PairStat {
  int i = 0, j = 0;
  double empirical = 0.0;
  double reference = 0.0;
  double rel_dev = 0.0;
};
struct FluctuationReport {
  std::vector<PairStat> pairs;
  double mean_rel_dev = 0.0;
  double max_rel_dev = 0.0;
  double ess = 0.0;
  double center_var_tilted = 0.0;
  double center_var_free = 0.0;  // massless variance at the same node
};
FluctuationReport fluctuation_covariance_test(double Lambda, double gamma,
                                              const InsertionSet& ins,
                                              const LatticePtr& lat,
                                              const McConfig& mc,
                                              int panel_size = 20);

struct LdpRow {
  double gamma = 0.0;
  double estimate = 0.0;  // gamma^2 ln E_{mu,gamma}[exp(Y(f)/gamma^2)]
  double se = 0.0;
  double ess = 0.0;
};
struct LdpReport {
  std::vector<LdpRow> rows;
  double solver_prediction = 0.0;  // F(Lambda,f) - F(Lambda)
  double duality_value = 0.0;      // <h,f> - I*(h) at h = V - U
  double rel_gap_smallest = 0.0;
};
LdpReport laplace_ldp_check(double Lambda, const ScalarField& f,
                            const std::vector<double>& gammas, const LatticePtr& lat,
                            const McConfig& mc);

struct KpzReport {
  double gamma = 0.0, L = 0.0;
  std::vector<double> alphas;
  std::vector<double> lhs, rhs, rel_dev;  // one entry per set
  double max_rel_dev = 0.0;
  double exponent_gap = 0.0;     // (4/gamma^2)(1 - Q gamma/2) + 1
  double mu_roundtrip_rel = 0.0;  // |L - mu^{-4/gamma^2}|/L, mu = L^{1-gamma Q/2}
};
// pathwise change-of-variables identity on a single shared sample
KpzReport kpz_rescaling_identity(double gamma, const std::vector<double>& alphas,
                                 const std::vector<std::vector<int>>& sets, double L,
                                 const LatticePtr& lat, SampleKey key);

// Delta_alpha = alpha Q / 2 - alpha^2 / 4, Q = 2/gamma + gamma/2
double conformal_weight(double alpha, double gamma);
// gamma = (sqrt(25 - c) - sqrt(1 - c)) / sqrt(6), c <= 1
double central_charge_to_gamma(double c);

struct InsertionProfile {
  Eigen::Vector2d z{0, 0};
  double chi = 0.0;
  double slope = 0.0;  // log-slope of the mean tilted field along a ray into z
  double rel_err = 0.0;  // vs -chi
};

struct InsertionSuiteReport {
  PartitionReport partition;
  ConvergenceReport convergence;
  FluctuationReport fluctuations;
  std::vector<InsertionProfile> profiles;  // one per insertion
  double profile_slope = 0.0;              // worst-offender slope
  double profile_slope_target = 0.0;
  double profile_rel_err = 0.0;            // max over insertions
  double f_lambda = 0.0;
};
InsertionSuiteReport heavy_insertion_suite(double Lambda, const InsertionSet& ins,
                                           const std::vector<double>& gammas,
                                           const LatticePtr& lat, const McConfig& mc);

}  // namespace lft
