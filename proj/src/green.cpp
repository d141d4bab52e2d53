#include "lft/green.hpp"

#include <Eigen/IterativeLinearSolvers>

#include <cmath>
#include <vector>

namespace lft {

double green_kernel(const Eigen::Vector2d& x, const Eigen::Vector2d& y) {
  if (x.squaredNorm() >= 1.0 || y.squaredNorm() >= 1.0)
    throw DomainError("green_kernel: points must lie in the open disk");
  const std::complex<double> zx(x.x(), x.y()), zy(y.x(), y.y());
  const double d = std::abs(zx - zy);
  if (d == 0.0) throw DomainError("green_kernel: x == y (logarithmic singularity)");
  return std::log(std::abs(1.0 - zx * std::conj(zy))) - std::log(d);
}

double conformal_radius(const Eigen::Vector2d& x) {
  const double r2 = x.squaredNorm();
  if (r2 >= 1.0) throw DomainError("conformal_radius: |x| must be < 1");
  return 1.0 - r2;
}

Eigen::SparseMatrix<double> neg_laplacian_matrix(const DiskLattice& lat) {
  const int n = static_cast<int>(lat.size());
  const double inv_h2 = 1.0 / (lat.h * lat.h);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(5) * n);
  for (int i = 0; i < n; ++i) {
    double diag = 0.0;
    for (int d = 0; d < 4; ++d) {
      const int nb = lat.neighbors[static_cast<std::size_t>(i)][d];
      if (nb >= 0) {
        diag += 1.0;
        trip.emplace_back(i, nb, -inv_h2);
      } else {
        diag += 1.0 / lat.cut_theta[static_cast<std::size_t>(i)][d];
      }
    }
    trip.emplace_back(i, i, diag * inv_h2);
  }
  Eigen::SparseMatrix<double> A(n, n);
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  return A;
}

GreenOperator::GreenOperator(LatticePtr lat) : lat_(std::move(lat)) {
  A_ = neg_laplacian_matrix(*lat_);
  llt_.compute(A_);
  use_cg_ = (llt_.info() != Eigen::Success);
}

ScalarField GreenOperator::apply(const ScalarField& f) const {
  require_lattice(lat_, f);
  return {lat_, solve(2.0 * M_PI * f.values)};
}

Eigen::VectorXd GreenOperator::solve(const Eigen::VectorXd& b) const {
  if (!use_cg_) return llt_.solve(b);
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(1e-10);
  cg.compute(A_);
  const Eigen::VectorXd x = cg.solve(b);
  if (cg.info() != Eigen::Success)
    throw NumericalError("GreenOperator: iterative solve failed", cg.error(),
                         static_cast<int>(cg.iterations()));
  return x;
}

Eigen::VectorXd GreenOperator::colored(const Eigen::VectorXd& z) const {
  if (use_cg_)
    throw NumericalError("GreenOperator: sampling needs the Cholesky factor");
  // A = P^T L L^T P in Eigen's convention: x = P^{-1} L^{-T} z has
  // covariance A^{-1}; scale by sqrt(2*pi)/h for the Green covariance
  Eigen::VectorXd y = llt_.matrixU().solve(z);
  Eigen::VectorXd x = llt_.permutationPinv() * y;
  return (std::sqrt(2.0 * M_PI) / lat_->h) * x;
}

const Eigen::VectorXd& GreenOperator::green_diag() const {
  if (diag_.size() == 0) {
    const int n = static_cast<int>(lat_->size());
    diag_.resize(n);
    const double scale = 2.0 * M_PI / (lat_->h * lat_->h);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
      e.setZero();
      e[i] = 1.0;
      if (use_cg_) {
        diag_[i] = scale * solve(e)[i];
      } else {
        // (A^{-1})_ii = ||L^{-1} P e_i||^2
        Eigen::VectorXd pe = llt_.permutationP() * e;
        Eigen::VectorXd y = llt_.matrixL().solve(pe);
        diag_[i] = scale * y.squaredNorm();
      }
    }
  }
  return diag_;
}

void GreenOperator::build_near_table(int reach) const {
  if (!near_.empty() && reach <= near_reach_) return;
  const int n = static_cast<int>(lat_->size());
  near_.assign(n, {});
  near_reach_ = reach;
  const double rad = reach * lat_->h * 1.0000001;
  const double scale = 2.0 * M_PI / (lat_->h * lat_->h);
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e[j] = 1.0;
    const Eigen::VectorXd col = solve(e);
    // collect entries for nodes within the reach window of j
    const auto& pj = lat_->nodes[j];
    const int gi = static_cast<int>(std::lround(pj.x() / lat_->h));
    const int gj = static_cast<int>(std::lround(pj.y() / lat_->h));
    for (int dj = -reach; dj <= reach; ++dj) {
      for (int di = -reach; di <= reach; ++di) {
        const int id = lat_->node_at(gi + di, gj + dj);
        if (id < 0) continue;
        if ((lat_->nodes[id] - pj).norm() <= rad)
          near_[j].emplace_back(id, scale * col[id]);
      }
    }
  }
}

double GreenOperator::green_entry_near(int i, int j) const {
  if (near_.empty()) throw UsageError("near table not built");
  for (const auto& [id, g] : near_[j])
    if (id == i) return g;
  throw UsageError("green_entry_near: nodes outside table reach");
}

Eigen::VectorXd GreenOperator::green_column(int j) const {
  const int n = static_cast<int>(lat_->size());
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  e[j] = 1.0;
  return (2.0 * M_PI / (lat_->h * lat_->h)) * solve(e);
}

}  // namespace lft
