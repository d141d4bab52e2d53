#include "lft/metric.hpp"

#include <cmath>

namespace lft {

MetricTensor MetricTensor::flat(const LatticePtr& lat) {
  MetricTensor m;
  m.kind = Kind::flat;
  m.factor = ScalarField(lat);
  m.factor.values.setOnes();
  m.curvature = ScalarField(lat);
  return m;
}

MetricTensor MetricTensor::hyperbolic(const LatticePtr& lat) {
  MetricTensor m;
  m.kind = Kind::hyperbolic;
  m.factor = make_field(lat, [](const Eigen::Vector2d& x) {
    const double c = 1.0 - x.squaredNorm();
    return 4.0 / (c * c);
  });
  m.curvature = ScalarField(lat);
  m.curvature.values.setConstant(-2.0);
  return m;
}

MetricTensor MetricTensor::conformal(const ScalarField& u) {
  MetricTensor m;
  m.kind = Kind::conformal;
  m.factor = ScalarField(u.lat, u.values.array().exp().matrix());
  // R = -Delta_g ln g = -(1/g) Delta (ln g), ln g = u
  const ScalarField lap = laplacian_apply(u.lat, u);
  m.curvature = ScalarField(
      u.lat, (-lap.values.array() / m.factor.values.array()).matrix());
  return m;
}

}  // namespace lft
