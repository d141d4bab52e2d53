#include "lft/insertion.hpp"

#include <cmath>
#include <complex>

namespace lft {

void InsertionSet::validate() const {
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& it = items[i];
    if (it.z.squaredNorm() >= 1.0)
      throw ConfigError("insertion point must lie in the open disk");
    if (it.chi < 0.0 || it.chi >= 2.0)
      throw ConfigError("insertion strength chi must lie in [0,2)");
    for (std::size_t j = i + 1; j < items.size(); ++j)
      if ((items[j].z - it.z).norm() == 0.0)
        throw ConfigError("insertion points must be pairwise distinct");
  }
}

InsertionWeight insertion_weight(const LatticePtr& lat, const InsertionSet& ins) {
  ins.validate();
  InsertionWeight out;
  out.log_weight = ScalarField(lat);
  const double dmin = lat->h / 2.0;
  for (std::size_t n = 0; n < lat->size(); ++n) {
    const auto& x = lat->nodes[n];
    double acc = 0.0;
    for (const auto& it : ins.items) {
      const std::complex<double> zx(x.x(), x.y()), zz(it.z.x(), it.z.y());
      double d = std::abs(zx - zz);
      if (d < dmin) {
        d = dmin;
        ++out.capped_nodes;
      }
      acc += it.chi * (std::log(std::abs(1.0 - zx * std::conj(zz))) - std::log(d));
    }
    out.log_weight.values[static_cast<Eigen::Index>(n)] = acc;
  }
  out.weight = ScalarField(lat, out.log_weight.values.array().exp().matrix());
  return out;
}

}  // namespace lft
