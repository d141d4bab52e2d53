#include "lft/gff.hpp"

#include <cmath>

namespace lft {

namespace {
constexpr double kTwoPi = 6.283185307179586476925287;

ScalarField mode_variance(const SpectralBasis& basis, const Eigen::VectorXd& coef_var) {
  // Var(x) = sum_j coef_var_j e_j(x)^2
  Eigen::VectorXd v = basis.modes.array().square().matrix() * coef_var;
  return {basis.lat, std::move(v)};
}
}  // namespace

SpectralBasis disk_spectrum(const LatticePtr& lat, int n) {
  if (n <= 0 || n > static_cast<int>(lat->size()))
    throw UsageError("disk_spectrum: mode count out of range");
  const Eigen::SparseMatrix<double> A = neg_laplacian_matrix(*lat);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(A.rows());
  EigPairs p = generalized_lowest(A, ones, n, lat->cell_area());
  SpectralBasis b;
  b.lat = lat;
  b.lambdas = std::move(p.theta);
  b.modes = std::move(p.vectors);
  return b;
}

GffSample sample_obe(const SpectralBasis& basis, int n, SampleKey key) {
  if (n < 0 || n > basis.lambdas.size())
    throw UsageError("sample_obe: truncation out of range");
  GffSample s;
  s.kind = CutoffKind::obe;
  s.n_modes = n;
  s.key = key;
  Eigen::VectorXd coef(n), cvar(n);
  for (int j = 0; j < n; ++j) {
    const double amp = std::sqrt(kTwoPi / basis.lambdas[j]);
    coef[j] = amp * rng::normal(key.seed, key.replica, static_cast<std::uint64_t>(j));
    cvar[j] = amp * amp;
  }
  s.field = ScalarField(basis.lat, basis.modes.leftCols(n) * coef);
  SpectralBasis head{basis.lat, basis.lambdas.head(n), basis.modes.leftCols(n)};
  s.variance = mode_variance(head, cvar);
  return s;
}

GffSample sample_exact(const SpectralBasis& basis, SampleKey key) {
  if (!basis.complete())
    throw UsageError("sample_exact: basis must be complete on the lattice");
  GffSample s = sample_obe(basis, static_cast<int>(basis.lambdas.size()), key);
  s.kind = CutoffKind::exact;
  s.n_modes = -1;
  return s;
}

GffSample sample_exact(const GreenOperator& green, SampleKey key) {
  const auto& lat = green.lattice();
  const int n = static_cast<int>(lat->size());
  Eigen::VectorXd z(n);
  for (int i = 0; i < n; ++i)
    z[i] = rng::normal(key.seed, key.replica, static_cast<std::uint64_t>(i), 1);
  GffSample s;
  s.kind = CutoffKind::exact;
  s.key = key;
  s.field = ScalarField(lat, green.colored(z));
  s.variance = ScalarField(lat, green.green_diag());
  return s;
}

std::vector<GffSample> sample_wn_family(const SpectralBasis& basis,
                                        const std::vector<double>& eps_desc,
                                        SampleKey key) {
  if (!basis.complete())
    throw UsageError("white-noise cutoff needs the complete basis");
  for (std::size_t i = 0; i + 1 < eps_desc.size(); ++i)
    if (!(eps_desc[i] > eps_desc[i + 1]))
      throw UsageError("eps ladder must be strictly descending");
  for (double e : eps_desc)
    if (e < 0.0) throw UsageError("eps must be >= 0");

  const int k = static_cast<int>(basis.lambdas.size());
  const int M = static_cast<int>(eps_desc.size());
  // Brownian coupling in s = exp(-lambda eps^2): eps descending means s
  // ascending, so walk members from smallest eps (largest s) backward from
  // the exact-field normal B(1) = xi_j by conditional bridge sampling.
  Eigen::MatrixXd coef(k, M);
  for (int j = 0; j < k; ++j) {
    const double lam = basis.lambdas[j];
    const double amp = std::sqrt(kTwoPi / lam);
    double b_next = rng::normal(key.seed, key.replica, static_cast<std::uint64_t>(j));
    double s_next = 1.0;
    for (int m = M - 1; m >= 0; --m) {
      const double e = eps_desc[static_cast<std::size_t>(m)];
      const double s = std::exp(-lam * e * e);
      double b;
      if (s_next <= 0.0 || s <= 0.0) {
        b = 0.0;
      } else if (s >= s_next) {
        b = b_next;  // eps = 0 rung: the exact field itself
      } else {
        const double mean = (s / s_next) * b_next;
        const double sd = std::sqrt(s * (s_next - s) / s_next);
        b = mean + sd * rng::normal(key.seed, key.replica,
                                    static_cast<std::uint64_t>(j),
                                    static_cast<std::uint64_t>(1 + m));
      }
      coef(j, m) = amp * b;
      b_next = b;
      s_next = s;
    }
  }

  std::vector<GffSample> out;
  out.reserve(static_cast<std::size_t>(M));
  for (int m = 0; m < M; ++m) {
    GffSample s;
    s.kind = CutoffKind::white_noise;
    s.eps = eps_desc[static_cast<std::size_t>(m)];
    s.key = key;
    s.field = ScalarField(basis.lat, basis.modes * coef.col(m));
    Eigen::VectorXd cvar(k);
    for (int j = 0; j < k; ++j)
      cvar[j] = (kTwoPi / basis.lambdas[j]) *
                std::exp(-basis.lambdas[j] * s.eps * s.eps);
    s.variance = mode_variance(basis, cvar);
    out.push_back(std::move(s));
  }
  return out;
}

GffSample sample_wn_cutoff(const SpectralBasis& basis, double eps, SampleKey key) {
  return sample_wn_family(basis, {eps}, key)[0];
}

CircleAverager::CircleAverager(const GreenOperator& green, double eps)
    : lat_(green.lattice()), eps_(eps) {
  if (eps < 2.0 * lat_->h)
    throw ConfigError("circle average radius must be at least 2h");
  const int n = static_cast<int>(lat_->size());
  K_ = std::max(16, static_cast<int>(std::ceil(kTwoPi * eps / lat_->h)));
  std::vector<Eigen::Triplet<double>> trip;
  for (int i = 0; i < n; ++i) {
    const auto& x = lat_->nodes[static_cast<std::size_t>(i)];
    std::vector<std::pair<int, double>> row;
    int kept = 0;
    for (int m = 0; m < K_; ++m) {
      const double th = kTwoPi * m / K_;
      const Eigen::Vector2d q = x + eps * Eigen::Vector2d(std::cos(th), std::sin(th));
      if (q.squaredNorm() >= 1.0) {
        clipped_ = true;
        continue;
      }
      ++kept;
      for (const auto& [id, wgt] : bilinear_stencil(*lat_, q))
        if (id >= 0) row.emplace_back(id, wgt);
    }
    if (kept == 0) continue;  // field value 0 there (fully exterior circle)
    for (const auto& [id, wgt] : row)
      trip.emplace_back(i, id, wgt / kept);
  }
  S_.resize(n, n);
  S_.setFromTriplets(trip.begin(), trip.end());
  S_.makeCompressed();

  // exact variance: diag(S G S^T) with G = (2*pi/h^2) A^{-1}
  var_.resize(n);
  const double scale = kTwoPi / (lat_->h * lat_->h);
  Eigen::VectorXd row = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    row = S_.row(i).transpose();
    if (row.isZero(0.0)) {
      var_[i] = 0.0;
      continue;
    }
    var_[i] = scale * row.dot(green.solve(row));
  }
}

ScalarField CircleAverager::apply(const ScalarField& u) const {
  require_lattice(lat_, u);
  return {lat_, S_ * u.values};
}

GffSample CircleAverager::apply(const GffSample& base) const {
  if (base.kind != CutoffKind::exact)
    throw UsageError("circle_average expects an exact sample");
  GffSample s;
  s.kind = CutoffKind::circle_avg;
  s.eps = eps_;
  s.key = base.key;
  s.boundary_clipped = clipped_;
  s.field = apply(base.field);
  s.variance = ScalarField(lat_, var_);
  return s;
}

GffSample circle_average(const GffSample& X, double eps, const GreenOperator& green) {
  return CircleAverager(green, eps).apply(X);
}

}  // namespace lft
