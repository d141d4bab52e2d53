#include "lft/spectra.hpp"

#include <Eigen/SparseCholesky>
#include <cmath>

#include "lft/green.hpp"

namespace lft {

namespace {
constexpr double kTwoPi = 6.283185307179586476925287;
}

int default_eigen_count(const DiskLattice& lat) {
  return std::min(800, static_cast<int>(lat.size()) / 4);
}

SpectralData weighted_eigs(const ScalarField& U, const InsertionSet& ins, int k) {
  const LatticePtr lat = U.lat;
  if (k <= 0 || k > static_cast<int>(lat->size()))
    throw UsageError("weighted_eigs: k out of range");
  ins.validate();
  SpectralData out;
  out.lat = lat;
  out.U = U;
  out.weight = U.values.array().exp().matrix();
  const Eigen::SparseMatrix<double> A = neg_laplacian_matrix(*lat);
  EigPairs p = generalized_lowest(A, out.weight, k, lat->cell_area());
  out.lambdas = p.theta / kTwoPi;  // -Delta e = 2 pi lambda e^U e
  out.modes = std::move(p.vectors);
  // renormalize for the 2 pi convention: h^2 v^T E v = 1 already holds
  const int k2 = k / 2;
  if (k - k2 >= 2) {
    // least-squares slope of lambda_j vs j over the upper half
    double sj = 0, sl = 0, sjj = 0, sjl = 0;
    int cnt = 0;
    for (int j = k2; j < k; ++j) {
      const double x = j + 1.0;
      sj += x;
      sl += out.lambdas[j];
      sjj += x * x;
      sjl += x * out.lambdas[j];
      ++cnt;
    }
    out.weyl_slope = (cnt * sjl - sj * sl) / (cnt * sjj - sj * sj);
  }
  return out;
}

MassiveGreen::MassiveGreen(const SpectralData& spec, double alpha)
    : spec_(&spec), alpha_(alpha) {
  if (spec.count() == 0) throw UsageError("massive_green: empty spectrum");
  if (!(alpha > -spec.lambdas[0] / 2.0))
    throw DomainError("massive_green: alpha must exceed -lambda_1/2");
  remainder_scale_ = 1.0 / (spec.lambdas[spec.count() - 1] + 2.0 * alpha);
}

double MassiveGreen::operator()(int i, int j) const {
  double acc = 0.0;
  for (int m = 0; m < spec_->count(); ++m)
    acc += spec_->modes(i, m) * spec_->modes(j, m) /
           (spec_->lambdas[m] + 2.0 * alpha_);
  return acc;
}

Eigen::VectorXd massive_green_exact_column(const SpectralData& spec, double alpha,
                                           int j) {
  const auto& lat = *spec.lat;
  Eigen::SparseMatrix<double> M = neg_laplacian_matrix(lat);
  const int n = static_cast<int>(lat.size());
  for (int i = 0; i < n; ++i)
    M.coeffRef(i, i) += 2.0 * kTwoPi * alpha * spec.weight[i];
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> fact(M);
  if (fact.info() != Eigen::Success)
    throw NumericalError("massive_green_exact_column: factorization failed");
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  e[j] = 1.0;
  return (kTwoPi / lat.cell_area()) * fact.solve(e);
}

FluctuationConstant fluctuation_constant(const SpectralData& spec, double alpha) {
  if (!(alpha > -spec.lambdas[0] / 2.0))
    throw DomainError("fluctuation_constant: alpha must exceed -lambda_1/2");
  FluctuationConstant out;
  for (int j = 0; j < spec.count(); ++j) {
    const double lam = spec.lambdas[j];
    out.log_value += 0.5 * std::log(lam / (lam + 2.0 * alpha)) + alpha / lam;
  }
  out.value = std::exp(out.log_value);
  // |term_j| <= alpha^2 / lambda_j^2 for lambda_j > 2|alpha|; Weyl tail
  if (spec.weyl_slope > 0.0) {
    const double s = spec.weyl_slope;
    out.tail_bound_log = alpha * alpha / (s * s * spec.count());
  }
  return out;
}

double wick_square_functional(const SpectralData& spec, SampleKey key) {
  double acc = 0.0;
  for (int j = 0; j < spec.count(); ++j) {
    const double xi = rng::normal(key.seed, key.replica, static_cast<std::uint64_t>(j), 3);
    acc += (xi * xi - 1.0) / spec.lambdas[j];
  }
  return acc;
}

}  // namespace lft
