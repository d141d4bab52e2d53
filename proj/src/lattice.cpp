#include "lft/lattice.hpp"

#include <cmath>

namespace lft {

LatticePtr build_lattice(double h) {
  if (!(h > 0.0)) throw ConfigError("lattice spacing must be positive");
  auto lat = std::make_shared<DiskLattice>();
  lat->h = h;
  const double rmax = 1.0 - h / 2.0;
  const int imax = static_cast<int>(std::floor(rmax / h));
  lat->imin = -imax;
  lat->imax = imax;
  lat->span = 2 * imax + 1;
  lat->grid_to_node.assign(static_cast<std::size_t>(lat->span) * lat->span, -1);

  for (int j = -imax; j <= imax; ++j) {
    for (int i = -imax; i <= imax; ++i) {
      const double x = i * h, y = j * h;
      if (x * x + y * y < rmax * rmax) {
        const int id = static_cast<int>(lat->nodes.size());
        lat->nodes.emplace_back(x, y);
        lat->grid_to_node[static_cast<std::size_t>(j - lat->imin) * lat->span +
                          (i - lat->imin)] = id;
      }
    }
  }
  // node-count floor; h=1/2 (9 nodes) is the coarsest usable toy lattice
  if (lat->nodes.size() < 9)
    throw ConfigError("lattice spacing too coarse: " + std::to_string(lat->nodes.size()) +
                      " interior nodes");

  lat->neighbors.resize(lat->nodes.size());
  lat->cut_theta.assign(lat->nodes.size(), {0.0, 0.0, 0.0, 0.0});
  const Eigen::Vector2d dirs[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  for (std::size_t n = 0; n < lat->nodes.size(); ++n) {
    const int i = static_cast<int>(std::lround(lat->nodes[n].x() / h));
    const int j = static_cast<int>(std::lround(lat->nodes[n].y() / h));
    lat->neighbors[n] = {lat->node_at(i + 1, j), lat->node_at(i - 1, j),
                         lat->node_at(i, j + 1), lat->node_at(i, j - 1)};
    for (int d = 0; d < 4; ++d) {
      if (lat->neighbors[n][d] >= 0) continue;
      // fraction t of the edge where |p + t h e| = 1
      const Eigen::Vector2d& p = lat->nodes[n];
      const double b = p.dot(dirs[d]) / h;  // in units of h
      const double c = (p.squaredNorm() - 1.0) / (h * h);
      lat->cut_theta[n][d] = -b + std::sqrt(b * b - c);
    }
  }
  return lat;
}

ScalarField laplacian_apply(const LatticePtr& lat, const ScalarField& u) {
  require_lattice(lat, u);
  ScalarField out(lat);
  const double inv_h2 = 1.0 / (lat->h * lat->h);
  for (std::size_t n = 0; n < lat->size(); ++n) {
    const double un = u.values[static_cast<Eigen::Index>(n)];
    double s = 0.0;
    for (int d = 0; d < 4; ++d) {
      const int nb = lat->neighbors[n][d];
      if (nb >= 0)
        s += u.values[nb] - un;
      else
        s -= un / lat->cut_theta[n][d];  // ghost value -((1-t)/t) u_n
    }
    out.values[static_cast<Eigen::Index>(n)] = s * inv_h2;
  }
  return out;
}

std::array<std::pair<int, double>, 4> bilinear_stencil(const DiskLattice& lat,
                                                       const Eigen::Vector2d& p) {
  const double gx = p.x() / lat.h, gy = p.y() / lat.h;
  const int i0 = static_cast<int>(std::floor(gx)), j0 = static_cast<int>(std::floor(gy));
  const double fx = gx - i0, fy = gy - j0;
  std::array<std::pair<int, double>, 4> out{{{-1, 0}, {-1, 0}, {-1, 0}, {-1, 0}}};
  const double w[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
  const int gi[4] = {i0, i0 + 1, i0, i0 + 1};
  const int gj[4] = {j0, j0, j0 + 1, j0 + 1};
  for (int c = 0; c < 4; ++c) {
    const int id = lat.node_at(gi[c], gj[c]);
    if (id >= 0) out[c] = {id, w[c]};
  }
  return out;
}

double interpolate(const ScalarField& u, const Eigen::Vector2d& p) {
  const auto st = bilinear_stencil(*u.lat, p);
  double s = 0.0;
  for (const auto& [id, w] : st)
    if (id >= 0) s += w * u.values[id];
  return s;
}

}  // namespace lft
