#pragma once

#include <Eigen/SparseCore>

#include "lft/eigs.hpp"
#include "lft/gff.hpp"
#include "lft/insertion.hpp"
#include "lft/lattice.hpp"

namespace lft {

// Eigenpairs of -Delta e = 2 pi lambda e^U e with Dirichlet boundary,
// normalized in L2(e^U dx); lambda ascending.
struct SpectralData {
  LatticePtr lat;
  ScalarField U;
  Eigen::VectorXd lambdas;
  Eigen::MatrixXd modes;     // h^2 * e_j^T diag(e^U) e_j = 1
  Eigen::VectorXd weight;    // e^U per node
  double weyl_slope = 0.0;   // least-squares d lambda / dj over the upper half
  int count() const { return static_cast<int>(lambdas.size()); }
};

SpectralData weighted_eigs(const ScalarField& U, const InsertionSet& ins, int k);

// default truncation
int default_eigen_count(const DiskLattice& lat);

// Massive Green kernel sum_j e_j(x) e_j(y) / (lambda_j + 2 alpha), truncated
// at the available modes; remainder_scale reports the first omitted term's
// 1/(lambda_k + 2 alpha) together with the Weyl slope.
class MassiveGreen {
 public:
  MassiveGreen(const SpectralData& spec, double alpha);
  double operator()(int i, int j) const;
  double alpha() const { return alpha_; }
  double remainder_scale() const { return remainder_scale_; }

 private:
  const SpectralData* spec_;
  double alpha_;
  double remainder_scale_;
};

// independent route for tests: K = (2 pi / h^2) (A + 4 pi alpha E)^{-1}
Eigen::VectorXd massive_green_exact_column(const SpectralData& spec, double alpha,
                                           int j);

struct FluctuationConstant {
  double log_value = 0.0;   // log Z_alpha over the truncated spectrum
  double value = 1.0;
  double tail_bound_log = 0.0;  // Weyl-tail bound on the omitted |terms|
};

// Z_alpha = prod_j sqrt(lambda_j/(lambda_j + 2 alpha)) e^{alpha/lambda_j}
FluctuationConstant fluctuation_constant(const SpectralData& spec, double alpha);

// one sample of sum_j (xi_j^2 - 1)/lambda_j
double wick_square_functional(const SpectralData& spec, SampleKey key);

}  // namespace lft
