#pragma once

#include <string>
#include <vector>

#include "lft/gff.hpp"
#include "lft/green.hpp"
#include "lft/insertion.hpp"
#include "lft/metric.hpp"

namespace lft {

// Nodewise nonnegative weights approximating a renormalized exponential
// measure; weights carry the cell area h^2.
struct ChaosMeasure {
  LatticePtr lat;
  Eigen::VectorXd weights;
  double gamma = 0.0;
  std::string background;

  double total_mass() const { return weights.sum(); }
};

// :X^n:(x) = sigma(x)^n He_n(X(x)/sigma(x)) with exact cutoff variance;
// zero-variance nodes yield 0 for n >= 1 (limit convention), counted in
// *zero_variance_nodes when given.
ScalarField wick_power(const GffSample& X, int n, int* zero_variance_nodes = nullptr);

// :e^{gamma X}:(x) = exp(gamma X(x) - gamma^2 sigma(x)^2 / 2)
ScalarField wick_exponential(const GffSample& X, double gamma);

// probabilists' Hermite polynomial He_n
double hermite(int n, double t);

// Renormalized measure e^{gamma X} dλ_ghat on the lattice:
//   weights = ghat^{-gamma^2/4} C^{gamma^2/2} :e^{gamma X}: h^2
// (flat: ghat = 1). The exact-variance Wick form stands in for the
// eps^{gamma^2/2} renormalization.
ChaosMeasure gmc_measure(const GffSample& X, double gamma, const MetricTensor& metric);

// vertex measure e^{alpha phi} dλ_ghat for general alpha with background
// charge Q: weights = C^{alpha^2/2} ghat^{1 - alpha Q/2} :e^{alpha X}: h^2
ChaosMeasure vertex_measure(const GffSample& X, double alpha, double Q,
                            const MetricTensor& metric);

// deposit weights at psi(x), nearest interior node
ChaosMeasure pushforward_measure(const ChaosMeasure& m, const MobiusMap& psi);

struct RegionMass {
  std::string name;
  double pushforward = 0.0;
  double pullback_construction = 0.0;
  double rel_diff = 0.0;
};

struct ConformalCheckReport {
  std::vector<RegionMass> regions;  // quadrants plus total
  double max_rel_diff = 0.0;
};

// Pathwise conformal-invariance check: pushforward of gmc(X) along
// psi_a^{-1} against the measure built from the pulled-back field
// X(psi_a(w)) with the |psi'|^{2+gamma^2/2}-corrected density.
ConformalCheckReport conformal_check(const GffSample& X, double gamma,
                                     const Eigen::Vector2d& a,
                                     const GreenOperator& green);

}  // namespace lft
