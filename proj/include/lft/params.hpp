#pragma once

#include <cmath>

#include "lft/errors.hpp"

namespace lft {

// Coupling constants: gamma in (0,2), mu >= 0, Lambda = mu*gamma^2,
// Q = 2/gamma + gamma/2. Lambda is what the semiclassical limit holds fixed.
struct LftParams {
  double gamma = 0.0;
  double mu = 0.0;
  double Lambda = 0.0;
  double Q = 0.0;

  static LftParams from_gamma_lambda(double gamma, double lambda) {
    validate_gamma(gamma);
    if (lambda < 0.0) throw ConfigError("Lambda must be >= 0");
    LftParams p;
    p.gamma = gamma;
    p.Lambda = lambda;
    p.mu = lambda / (gamma * gamma);
    p.Q = 2.0 / gamma + gamma / 2.0;
    return p;
  }

  static LftParams from_gamma_mu(double gamma, double mu) {
    validate_gamma(gamma);
    if (mu < 0.0) throw ConfigError("mu must be >= 0");
    return from_gamma_lambda(gamma, mu * gamma * gamma);
  }

  static void validate_gamma(double gamma) {
    if (!(gamma > 0.0) || gamma >= 2.0)
      throw ConfigError("gamma must lie in (0,2); the critical case gamma=2 is unsupported");
  }
};

}  // namespace lft
