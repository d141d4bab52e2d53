#pragma once

#include <Eigen/SparseCore>
#include <vector>

#include "lft/eigs.hpp"
#include "lft/green.hpp"
#include "lft/lattice.hpp"
#include "lft/rng.hpp"

namespace lft {

struct SampleKey {
  std::uint64_t seed = 0;
  std::uint64_t replica = 0;
};

// Eigenpairs of the discrete Dirichlet -Delta, orthonormal in lattice L2
// (h^2 * modes^T modes = I), eigenvalues ascending.
struct SpectralBasis {
  LatticePtr lat;
  Eigen::VectorXd lambdas;
  Eigen::MatrixXd modes;
  bool complete() const {
    return lambdas.size() == static_cast<Eigen::Index>(lat->size());
  }
};

SpectralBasis disk_spectrum(const LatticePtr& lat, int n);

enum class CutoffKind { exact, obe, circle_avg, white_noise };

struct GffSample {
  ScalarField field;
  ScalarField variance;  // exact per-node variance of this cutoff field
  CutoffKind kind = CutoffKind::exact;
  double eps = 0.0;
  int n_modes = -1;
  SampleKey key{};
  bool boundary_clipped = false;
};

// X = sum_j xi_j sqrt(2*pi/lambda_j) e_j over the full basis; covariance is
// exactly the discrete Green matrix. Mode-indexed normals make OBE
// truncations prefixes of this sample.
GffSample sample_exact(const SpectralBasis& basis, SampleKey key);

// same law through the sparse Cholesky factor, no eigenbasis needed
GffSample sample_exact(const GreenOperator& green, SampleKey key);

// prefix of sample_exact over the first n modes
GffSample sample_obe(const SpectralBasis& basis, int n, SampleKey key);

// white-noise cutoff: marginal X_eps = sum_j xi_j sqrt(2*pi e^{-lambda_j eps^2}
// / lambda_j) e_j; members of a family share the underlying stream so that
// Cov(X_eps(x), X_eps'(y)) = sum_j (2*pi/lambda_j) e^{-lambda_j (eps v eps')^2}
// e_j(x) e_j(y), and eps = 0 reproduces sample_exact bitwise.
GffSample sample_wn_cutoff(const SpectralBasis& basis, double eps, SampleKey key);
std::vector<GffSample> sample_wn_family(const SpectralBasis& basis,
                                        const std::vector<double>& eps_descending,
                                        SampleKey key);

// Circle average of radius eps via K = max(16, ceil(2*pi*eps/h)) quadrature
// points bilinearly interpolated; arcs leaving the disk are renormalized to
// the retained points and flagged. Exact variance from the Green matrix
// through the same stencil.
class CircleAverager {
 public:
  CircleAverager(const GreenOperator& green, double eps);
  GffSample apply(const GffSample& base) const;
  ScalarField apply(const ScalarField& u) const;
  double eps() const { return eps_; }
  int quadrature_points() const { return K_; }
  bool any_clipped() const { return clipped_; }

 private:
  LatticePtr lat_;
  double eps_;
  int K_;
  Eigen::SparseMatrix<double> S_;
  Eigen::VectorXd var_;
  bool clipped_ = false;
};

GffSample circle_average(const GffSample& X, double eps, const GreenOperator& green);

}  // namespace lft
