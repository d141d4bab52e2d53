#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <complex>
#include <memory>
#include <optional>

#include "lft/lattice.hpp"

namespace lft {

// analytic disk Green function, convention Delta_y G = -2*pi*delta_x:
// G(x,y) = ln|1 - x*conj(y)| - ln|x - y|
double green_kernel(const Eigen::Vector2d& x, const Eigen::Vector2d& y);

// conformal radius of the unit disk, C(x) = 1 - |x|^2
double conformal_radius(const Eigen::Vector2d& x);

// disk automorphism psi_a(z) = (z - a)/(1 - conj(a) z), psi_a(a) = 0
struct MobiusMap {
  std::complex<double> a;

  explicit MobiusMap(const Eigen::Vector2d& pt) : a(pt.x(), pt.y()) {
    if (std::abs(a) >= 1.0) throw DomainError("mobius: |a| must be < 1");
  }
  Eigen::Vector2d operator()(const Eigen::Vector2d& z) const {
    const std::complex<double> w(z.x(), z.y());
    const std::complex<double> im = (w - a) / (1.0 - std::conj(a) * w);
    return {im.real(), im.imag()};
  }
  double deriv_abs(const Eigen::Vector2d& z) const {
    const std::complex<double> w(z.x(), z.y());
    const std::complex<double> d = 1.0 - std::conj(a) * w;
    return (1.0 - std::norm(a)) / std::norm(d);
  }
  MobiusMap inverse() const {
    MobiusMap inv(Eigen::Vector2d(0, 0));
    inv.a = -a;
    return inv;
  }
};

// Discrete Dirichlet Green operator on a lattice. Holds A = -Delta_h (SPD)
// and a cached sparse Cholesky factorization; immutable after construction.
class GreenOperator {
 public:
  explicit GreenOperator(LatticePtr lat);

  const LatticePtr& lattice() const { return lat_; }
  const Eigen::SparseMatrix<double>& matrix() const { return A_; }

  // u solving -Delta u = 2*pi*f, zero boundary
  ScalarField apply(const ScalarField& f) const;

  // raw solve A x = b
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;

  // one GFF sample with covariance (2*pi/h^2) A^{-1}: x = sqrt(2*pi)/h P L^{-T} z
  Eigen::VectorXd colored(const Eigen::VectorXd& iid_normals) const;

  // diagonal of the Green matrix G = (2*pi/h^2) A^{-1} (per-node GFF variance)
  const Eigen::VectorXd& green_diag() const;

  // G entries between node i and every node within graph radius `reach` cells
  // of i (includes the diagonal); row-compressed per node. Built on demand.
  double green_entry_near(int i, int j) const;  // valid when |xi-xj| <= reach*h
  void build_near_table(int reach) const;
  int near_reach() const { return near_reach_; }

  // full Green column G(:, j) (one linear solve)
  Eigen::VectorXd green_column(int j) const;

 private:
  LatticePtr lat_;
  Eigen::SparseMatrix<double> A_;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt_;
  bool use_cg_ = false;  // iterative fallback when the factorization fails
  mutable Eigen::VectorXd diag_;   // lazy
  mutable std::vector<std::vector<std::pair<int, double>>> near_;  // lazy
  mutable int near_reach_ = 0;
};

// assemble A = -Delta_h as a sparse SPD matrix (shared by solver and spectra)
Eigen::SparseMatrix<double> neg_laplacian_matrix(const DiskLattice& lat);

}  // namespace lft
