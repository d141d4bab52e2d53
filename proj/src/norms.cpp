#include "lft/norms.hpp"

#include <cmath>

namespace lft {

double h1_energy(const LatticePtr& lat, const ScalarField& u) {
  require_lattice(lat, u);
  // interior forward-difference edges plus cut edges to the circle; a cut
  // edge of length theta*h from value u to 0 contributes u^2/theta, which
  // keeps h1_energy(u) == h^2 u^T A u exactly
  double acc = 0.0;
  for (std::size_t n = 0; n < lat->size(); ++n) {
    const double un = u.values[static_cast<Eigen::Index>(n)];
    for (int dir : {0, 2}) {  // +x, +y interior edges counted once
      const int nb = lat->neighbors[n][dir];
      if (nb >= 0) {
        const double d = u.values[nb] - un;
        acc += d * d;
      }
    }
    for (int dir = 0; dir < 4; ++dir)
      if (lat->neighbors[n][dir] < 0) acc += un * un / lat->cut_theta[n][dir];
  }
  return acc;
}

SineBasis::SineBasis(LatticePtr lat, int jmax) : lat_(std::move(lat)), jmax_(jmax) {
  const int span = lat_->span;
  sx_.resize(jmax_, span);
  sy_.resize(jmax_, span);
  for (int g = 0; g < span; ++g) {
    const double coord = (lat_->imin + g) * lat_->h;   // in (-1, 1)
    const double t = (coord + 1.0) / 2.0;              // in (0, 1)
    for (int j = 1; j <= jmax_; ++j) {
      sx_(j - 1, g) = std::sin(M_PI * j * t);
      sy_(j - 1, g) = std::sin(M_PI * j * t);
    }
  }
}

Eigen::MatrixXd SineBasis::coefficients(const ScalarField& u) const {
  require_lattice(lat_, u);
  const int span = lat_->span;
  Eigen::MatrixXd grid = Eigen::MatrixXd::Zero(span, span);  // (gy, gx)
  for (std::size_t n = 0; n < lat_->size(); ++n) {
    const auto& p = lat_->nodes[n];
    const int gi = static_cast<int>(std::lround(p.x() / lat_->h)) - lat_->imin;
    const int gj = static_cast<int>(std::lround(p.y() / lat_->h)) - lat_->imin;
    grid(gj, gi) = u.values[static_cast<Eigen::Index>(n)];
  }
  // a_{j,k} = 4 * (h/2)^2 * sum_n u_n sin(pi j xt) sin(pi k yt)
  const double cell = lat_->h * lat_->h / 4.0;
  return 4.0 * cell * (sy_ * grid * sx_.transpose());  // (k, j) indexed
}

double SineBasis::hminus1_norm(const ScalarField& u) const {
  const Eigen::MatrixXd a = coefficients(u);
  double acc = 0.0;
  for (int k = 1; k <= jmax_; ++k)
    for (int j = 1; j <= jmax_; ++j)
      acc += a(k - 1, j - 1) * a(k - 1, j - 1) / static_cast<double>(j * j + k * k);
  return acc;
}

double hminus1_norm(const LatticePtr& lat, const ScalarField& u, int jmax) {
  return SineBasis(lat, jmax).hminus1_norm(u);
}

}  // namespace lft
