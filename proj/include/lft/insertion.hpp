#pragma once

#include <Eigen/Core>
#include <vector>

#include "lft/lattice.hpp"

namespace lft {

// Heavy insertions (z_i, chi_i): points in the open disk with chi_i in [0,2).
struct Insertion {
  Eigen::Vector2d z;
  double chi = 0.0;
};

struct InsertionSet {
  std::vector<Insertion> items;

  InsertionSet() = default;
  explicit InsertionSet(std::vector<Insertion> v) : items(std::move(v)) { validate(); }

  bool empty() const { return items.empty(); }
  void validate() const;
};

struct InsertionWeight {
  ScalarField log_weight;  // H(x) = sum_i chi_i G(x, z_i), distance capped at h/2
  ScalarField weight;      // e^H
  int capped_nodes = 0;    // nodes evaluated at the h/2 offset
};

// H and e^H on the lattice using the analytic kernel; a node coinciding with
// (or closer than h/2 to) some z_i is evaluated at distance h/2, which keeps
// the weight finite and multiplicative over disjoint insertion subsets.
InsertionWeight insertion_weight(const LatticePtr& lat, const InsertionSet& ins);

}  // namespace lft
