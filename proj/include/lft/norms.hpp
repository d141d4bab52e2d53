#pragma once

#include <Eigen/Core>

#include "lft/lattice.hpp"

namespace lft {

// discrete Dirichlet energy: sum of forward-difference squares over edges
// (zero extension outside), approximates the integral of |grad u|^2 dx
double h1_energy(const LatticePtr& lat, const ScalarField& u);

// H^{-1} proxy through the sine basis of the bounding square: extend u by
// zero, map [-1,1]^2 -> [0,1]^2, expand in sin(pi j x) sin(pi k y) and
// return sum a_{j,k}^2 / (j^2 + k^2), truncated at j,k <= jmax.
class SineBasis {
 public:
  SineBasis(LatticePtr lat, int jmax = 64);
  double hminus1_norm(const ScalarField& u) const;
  Eigen::MatrixXd coefficients(const ScalarField& u) const;  // (jmax x jmax)
  int jmax() const { return jmax_; }

 private:
  LatticePtr lat_;
  int jmax_;
  Eigen::MatrixXd sx_;  // jmax x span, sin(pi j xt(i)) per grid column
  Eigen::MatrixXd sy_;
};

double hminus1_norm(const LatticePtr& lat, const ScalarField& u, int jmax = 64);

}  // namespace lft
