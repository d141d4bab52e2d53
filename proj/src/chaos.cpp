#include "lft/chaos.hpp"

#include <cmath>

namespace lft {

double hermite(int n, double t) {
  if (n == 0) return 1.0;
  if (n == 1) return t;
  double hm = 1.0, h = t;
  for (int m = 1; m < n; ++m) {
    const double hn = t * h - m * hm;
    hm = h;
    h = hn;
  }
  return h;
}

ScalarField wick_power(const GffSample& X, int n, int* zero_variance_nodes) {
  if (n < 0) throw UsageError("wick_power: order must be >= 0");
  ScalarField out(X.field.lat);
  int zeros = 0;
  for (Eigen::Index i = 0; i < out.values.size(); ++i) {
    const double var = X.variance.values[i];
    if (n == 0) {
      out.values[i] = 1.0;
    } else if (var <= 0.0) {
      out.values[i] = 0.0;
      ++zeros;
    } else {
      const double sigma = std::sqrt(var);
      out.values[i] = std::pow(sigma, n) * hermite(n, X.field.values[i] / sigma);
    }
  }
  if (zero_variance_nodes) *zero_variance_nodes = zeros;
  return out;
}

ScalarField wick_exponential(const GffSample& X, double gamma) {
  ScalarField out(X.field.lat);
  out.values = (gamma * X.field.values.array() -
                0.5 * gamma * gamma * X.variance.values.array())
                   .exp()
                   .matrix();
  return out;
}

namespace {
ChaosMeasure measure_with_exponent(const GffSample& X, double alpha,
                                   double metric_exponent,
                                   const MetricTensor& metric,
                                   std::string background) {
  const auto& lat = X.field.lat;
  require_lattice(lat, metric.factor);
  const ScalarField wexp = wick_exponential(X, alpha);
  ChaosMeasure m;
  m.lat = lat;
  m.gamma = alpha;
  m.background = std::move(background);
  m.weights.resize(wexp.values.size());
  const double cell = lat->cell_area();
  for (std::size_t i = 0; i < lat->size(); ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    const double c = conformal_radius(lat->nodes[i]);
    const double g = metric.factor.values[idx];
    m.weights[idx] = std::pow(c, alpha * alpha / 2.0) *
                     std::pow(g, metric_exponent) * wexp.values[idx] * cell;
  }
  return m;
}

std::string kind_name(const MetricTensor& m) {
  switch (m.kind) {
    case MetricTensor::Kind::flat: return "flat";
    case MetricTensor::Kind::hyperbolic: return "hyperbolic";
    default: return "conformal";
  }
}
}  // namespace

ChaosMeasure gmc_measure(const GffSample& X, double gamma, const MetricTensor& metric) {
  if (gamma >= 2.0)
    throw DomainError("gmc_measure: gamma >= 2 is unsupported (critical chaos)");
  if (gamma < 0.0) throw DomainError("gmc_measure: gamma must be >= 0");
  return measure_with_exponent(X, gamma, -gamma * gamma / 4.0, metric, kind_name(metric));
}

ChaosMeasure vertex_measure(const GffSample& X, double alpha, double Q,
                            const MetricTensor& metric) {
  if (alpha < 0.0 || alpha > 2.0)
    throw DomainError("vertex_measure: alpha must lie in [0,2]");
  return measure_with_exponent(X, alpha, 1.0 - alpha * Q / 2.0, metric,
                               kind_name(metric) + " vertex");
}

namespace {
int nearest_node(const DiskLattice& lat, const Eigen::Vector2d& p) {
  const int gi = static_cast<int>(std::lround(p.x() / lat.h));
  const int gj = static_cast<int>(std::lround(p.y() / lat.h));
  int best = lat.node_at(gi, gj);
  if (best >= 0) return best;
  double bestd = 1e300;
  for (int ring = 1; ring <= 4 && best < 0; ++ring) {
    for (int dj = -ring; dj <= ring; ++dj) {
      for (int di = -ring; di <= ring; ++di) {
        if (std::max(std::abs(di), std::abs(dj)) != ring) continue;
        const int id = lat.node_at(gi + di, gj + dj);
        if (id < 0) continue;
        const double d = (lat.nodes[static_cast<std::size_t>(id)] - p).squaredNorm();
        if (d < bestd) {
          bestd = d;
          best = id;
        }
      }
    }
  }
  return best;
}
}  // namespace

ChaosMeasure pushforward_measure(const ChaosMeasure& m, const MobiusMap& psi) {
  ChaosMeasure out;
  out.lat = m.lat;
  out.gamma = m.gamma;
  out.background = m.background + " pushforward";
  out.weights = Eigen::VectorXd::Zero(m.weights.size());
  for (std::size_t i = 0; i < m.lat->size(); ++i) {
    const Eigen::Vector2d img = psi(m.lat->nodes[i]);
    const int id = nearest_node(*m.lat, img);
    if (id >= 0) out.weights[id] += m.weights[static_cast<Eigen::Index>(i)];
  }
  return out;
}

ConformalCheckReport conformal_check(const GffSample& X, double gamma,
                                     const Eigen::Vector2d& a,
                                     const GreenOperator& green) {
  const auto& lat = X.field.lat;
  const MobiusMap psi(a);
  const MetricTensor flat = MetricTensor::flat(lat);
  const ChaosMeasure m = gmc_measure(X, gamma, flat);
  const ChaosMeasure pf = pushforward_measure(m, psi.inverse());

  // pulled-back construction: field X(psi(w)), Wick variance of the
  // interpolated combination from near-diagonal Green entries
  green.build_near_table(2);
  ChaosMeasure m2;
  m2.lat = lat;
  m2.gamma = gamma;
  m2.background = "flat pullback";
  m2.weights.resize(static_cast<Eigen::Index>(lat->size()));
  const double cell = lat->cell_area();
  for (std::size_t w = 0; w < lat->size(); ++w) {
    const Eigen::Vector2d img = psi(lat->nodes[w]);
    const auto st = bilinear_stencil(*lat, img);
    double val = 0.0, var = 0.0;
    for (const auto& [i, wi] : st) {
      if (i < 0) continue;
      val += wi * X.field.values[i];
      for (const auto& [j, wj] : st)
        if (j >= 0) var += wi * wj * green.green_entry_near(i, j);
    }
    const double c = conformal_radius(lat->nodes[w]);
    const double dpsi = psi.deriv_abs(lat->nodes[w]);
    m2.weights[static_cast<Eigen::Index>(w)] =
        std::pow(c, gamma * gamma / 2.0) * std::pow(dpsi, 2.0 + gamma * gamma / 2.0) *
        std::exp(gamma * val - 0.5 * gamma * gamma * var) * cell;
  }

  ConformalCheckReport rep;
  auto region_of = [](const Eigen::Vector2d& p) {
    return (p.x() >= 0 ? (p.y() >= 0 ? 0 : 3) : (p.y() >= 0 ? 1 : 2));
  };
  double mass_pf[5] = {0, 0, 0, 0, 0}, mass_m2[5] = {0, 0, 0, 0, 0};
  for (std::size_t i = 0; i < lat->size(); ++i) {
    const int r = region_of(lat->nodes[i]);
    mass_pf[r] += pf.weights[static_cast<Eigen::Index>(i)];
    mass_m2[r] += m2.weights[static_cast<Eigen::Index>(i)];
    mass_pf[4] += pf.weights[static_cast<Eigen::Index>(i)];
    mass_m2[4] += m2.weights[static_cast<Eigen::Index>(i)];
  }
  const char* names[5] = {"quadrant++", "quadrant-+", "quadrant--", "quadrant+-", "total"};
  for (int r = 0; r < 5; ++r) {
    RegionMass rm;
    rm.name = names[r];
    rm.pushforward = mass_pf[r];
    rm.pullback_construction = mass_m2[r];
    rm.rel_diff = std::abs(mass_pf[r] - mass_m2[r]) /
                  std::max(1e-300, std::abs(mass_m2[r]));
    rep.max_rel_diff = std::max(rep.max_rel_diff, rm.rel_diff);
    rep.regions.push_back(std::move(rm));
  }
  return rep;
}

}  // namespace lft
