#pragma once

#include <Eigen/Core>
#include <array>
#include <memory>
#include <vector>

#include "lft/errors.hpp"

namespace lft {

// Regular square grid of spacing h clipped to |x| < 1 - h/2, zero Dirichlet
// condition on the unit circle. Node order is row-major (y ascending, then
// x), which fixes the node<->index bijection deterministically.
//
// Edges cut by the circle carry the crossing fraction theta (boundary at
// distance theta*h along the edge); the ghost value under linear
// extrapolation folds into the diagonal, so the operator stays symmetric.
struct DiskLattice {
  double h = 0.0;
  std::vector<Eigen::Vector2d> nodes;
  std::vector<std::array<int, 4>> neighbors;  // +x, -x, +y, -y; -1 = boundary zero
  std::vector<std::array<double, 4>> cut_theta;  // valid where neighbor < 0

  // grid bookkeeping: node (i,j) sits at (i*h, j*h), i in [imin, imax]
  int imin = 0, imax = 0;
  int span = 0;                  // imax - imin + 1, per axis
  std::vector<int> grid_to_node;  // span*span entries, -1 where not interior

  std::size_t size() const { return nodes.size(); }
  double cell_area() const { return h * h; }

  int node_at(int gi, int gj) const {
    if (gi < imin || gi > imax || gj < imin || gj > imax) return -1;
    return grid_to_node[static_cast<std::size_t>(gj - imin) * span + (gi - imin)];
  }
};

using LatticePtr = std::shared_ptr<const DiskLattice>;

struct ScalarField {
  LatticePtr lat;
  Eigen::VectorXd values;

  ScalarField() = default;
  explicit ScalarField(LatticePtr l) : lat(std::move(l)) {
    values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(lat->size()));
  }
  ScalarField(LatticePtr l, Eigen::VectorXd v) : lat(std::move(l)), values(std::move(v)) {
    if (values.size() != static_cast<Eigen::Index>(lat->size()))
      throw UsageError("ScalarField: value count does not match lattice");
  }

  double& operator[](Eigen::Index i) { return values[i]; }
  double operator[](Eigen::Index i) const { return values[i]; }
};

inline void require_same_lattice(const ScalarField& a, const ScalarField& b) {
  if (a.lat.get() != b.lat.get())
    throw UsageError("fields live on different lattices");
}
inline void require_lattice(const LatticePtr& lat, const ScalarField& u) {
  if (lat.get() != u.lat.get())
    throw UsageError("field does not live on the given lattice");
}

LatticePtr build_lattice(double h);

// five-point Laplacian with zero Dirichlet extension
ScalarField laplacian_apply(const LatticePtr& lat, const ScalarField& u);

// evaluate a function of position on every node
template <typename F>
ScalarField make_field(const LatticePtr& lat, F&& f) {
  ScalarField out(lat);
  for (std::size_t i = 0; i < lat->size(); ++i)
    out.values[static_cast<Eigen::Index>(i)] = f(lat->nodes[i]);
  return out;
}

// bilinear interpolation of a node field at an arbitrary point (zero outside)
double interpolate(const ScalarField& u, const Eigen::Vector2d& p);

// bilinear stencil at p: up to 4 (node index, weight) pairs; weights of
// off-lattice corners are dropped (zero extension)
std::array<std::pair<int, double>, 4> bilinear_stencil(const DiskLattice& lat,
                                                       const Eigen::Vector2d& p);

}  // namespace lft
