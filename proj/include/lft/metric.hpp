#pragma once

#include "lft/lattice.hpp"

namespace lft {

// Conformal background metric ghat(x) dx^2 on the lattice.
struct MetricTensor {
  enum class Kind { flat, hyperbolic, conformal };
  Kind kind = Kind::flat;
  ScalarField factor;     // ghat(x) > 0
  ScalarField curvature;  // R_ghat

  static MetricTensor flat(const LatticePtr& lat);
  // ghat(x) = 4/(1-|x|^2)^2, R = -2
  static MetricTensor hyperbolic(const LatticePtr& lat);
  // ghat = exp(u), R = -Delta_ghat ln ghat evaluated on the lattice
  static MetricTensor conformal(const ScalarField& u);
};

}  // namespace lft
