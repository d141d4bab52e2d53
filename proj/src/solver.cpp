#include "lft/solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <limits>

#include "lft/gff.hpp"

namespace lft {

namespace {
constexpr double kPi = 3.14159265358979323846;

struct Assembled {
  LatticePtr lat;
  Eigen::SparseMatrix<double> A;   // -Delta_h
  Eigen::VectorXd gain;            // 8 pi^2 Lambda * ghat * e^H
  Eigen::VectorXd source;          // ghat*R - 2 pi f  (constant part of residual)
};

// residual of the regular part: r(W) = A W + gain .* e^W + source
Eigen::VectorXd residual(const Assembled& as, const Eigen::VectorXd& w) {
  return as.A * w + (as.gain.array() * w.array().exp()).matrix() + as.source;
}

// convex objective with gradient h^2 * r(W)
double objective(const Assembled& as, const Eigen::VectorXd& w) {
  const double h2 = as.lat->cell_area();
  const double quad = 0.5 * w.dot(as.A * w);
  const double expo = (as.gain.array() * w.array().exp()).sum();
  const double lin = as.source.dot(w);
  return h2 * (quad + expo + lin);
}
}  // namespace

LiouvilleSolution solve_liouville(double Lambda, const MetricTensor& metric,
                                  const ScalarField* f, const InsertionSet& ins,
                                  const SolverConfig& cfg) {
  if (Lambda < 0.0) throw DomainError("solve_liouville: Lambda must be >= 0");
  const LatticePtr lat = metric.factor.lat;
  const int n = static_cast<int>(lat->size());
  if (f) require_lattice(lat, *f);

  Assembled as;
  as.lat = lat;
  as.A = neg_laplacian_matrix(*lat);
  const InsertionWeight iw = insertion_weight(lat, ins);
  as.gain = 8.0 * kPi * kPi * Lambda *
            (metric.factor.values.array() * iw.weight.values.array()).matrix();
  as.source = (metric.factor.values.array() * metric.curvature.values.array()).matrix();
  if (f) as.source -= 2.0 * kPi * f->values;

  Eigen::VectorXd w = cfg.initial_guess.value_or(Eigen::VectorXd::Zero(n));
  if (w.size() != n) throw UsageError("initial guess has wrong size");

  const double h2 = lat->cell_area();
  auto l2norm = [&](const Eigen::VectorXd& v) { return std::sqrt(h2 * v.squaredNorm()); };

  Eigen::VectorXd r = residual(as, w);
  double rnorm = l2norm(r);
  int it = 0;
  if (cfg.objective_trace) cfg.objective_trace->push_back(objective(as, w));
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> fact;
  for (; it < cfg.max_iterations && rnorm > cfg.tolerance; ++it) {
    // J = A + diag(gain .* e^W), SPD
    Eigen::SparseMatrix<double> J = as.A;
    Eigen::VectorXd dg = (as.gain.array() * w.array().exp()).matrix();
    for (int i = 0; i < n; ++i) J.coeffRef(i, i) += dg[i];
    fact.compute(J);
    Eigen::VectorXd step;
    bool have_newton = (fact.info() == Eigen::Success);
    if (have_newton) step = fact.solve(-r);
    if (!have_newton || !step.allFinite()) step = -r;  // gradient fallback

    // full Newton step when it contracts the residual (quadratic phase);
    // Armijo on the convex objective otherwise
    {
      const Eigen::VectorXd cand = w + step;
      const Eigen::VectorXd rc = residual(as, cand);
      if (rc.allFinite() && l2norm(rc) <= 0.9 * rnorm) {
        w = cand;
        r = rc;
        rnorm = l2norm(rc);
        if (cfg.objective_trace) cfg.objective_trace->push_back(objective(as, w));
        continue;
      }
    }
    const double base = objective(as, w);
    const double slope = h2 * r.dot(step);  // grad = h^2 r
    double t = 1.0;
    bool accepted = false;
    while (t >= cfg.min_step) {
      const Eigen::VectorXd cand = w + t * step;
      const double val = objective(as, cand);
      if (std::isfinite(val) && val <= base + cfg.armijo_c1 * t * slope) {
        w = cand;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted)
      throw NumericalError("solve_liouville: line search stalled", rnorm, it);
    if (cfg.objective_trace) cfg.objective_trace->push_back(objective(as, w));
    r = residual(as, w);
    rnorm = l2norm(r);
  }
  if (rnorm > cfg.tolerance)
    throw NumericalError("solve_liouville: no convergence within max iterations",
                         rnorm, it);

  LiouvilleSolution sol;
  sol.regular_part = ScalarField(lat, w);
  sol.U = ScalarField(lat, w + iw.log_weight.values);
  sol.residual_norm = rnorm;
  sol.iterations = it;
  sol.Lambda = Lambda;
  sol.metric_kind = metric.kind;
  sol.insertions = ins;
  sol.h = lat->h;
  sol.energy = energy(sol.U, Lambda, ins, metric);
  return sol;
}

double energy(const ScalarField& u, double Lambda, const InsertionSet& ins,
              const MetricTensor& metric) {
  const LatticePtr lat = u.lat;
  const InsertionWeight iw = insertion_weight(lat, ins);
  const ScalarField reg(lat, u.values - iw.log_weight.values);
  const double grad = h1_energy(lat, reg);
  const double h2 = lat->cell_area();
  const Eigen::ArrayXd g = metric.factor.values.array();
  const double inter = 16.0 * kPi * kPi * Lambda * (g * u.values.array().exp()).sum() * h2;
  const double curv = 2.0 * (g * metric.curvature.values.array() * u.values.array()).sum() * h2;
  const double total = (grad + inter + curv) / (4.0 * kPi);
  if (!std::isfinite(total)) throw NumericalError("energy: overflow in e^u");
  return total;
}

double energy(const ScalarField& u, double Lambda, const InsertionSet& ins) {
  return energy(u, Lambda, ins, MetricTensor::flat(u.lat));
}

double free_energy(double Lambda, const MetricTensor& metric,
                   const InsertionSet& ins, const SolverConfig& cfg) {
  const LiouvilleSolution sol = solve_liouville(Lambda, metric, nullptr, ins, cfg);
  return -sol.energy;
}

double perturbed_free_energy(const LiouvilleSolution& base, const ScalarField& f,
                             const SolverConfig& cfg) {
  const LatticePtr lat = base.U.lat;
  require_lattice(lat, f);
  const MetricTensor flat = MetricTensor::flat(lat);
  const LiouvilleSolution pert =
      solve_liouville(base.Lambda, flat, &f, base.insertions, cfg);
  const double grad = h1_energy(lat, pert.regular_part);
  const double h2 = lat->cell_area();
  const double inter =
      16.0 * kPi * kPi * base.Lambda * pert.U.values.array().exp().sum() * h2;
  // pairing with V - U - H = W_f - U (full unperturbed solution)
  const double pair = h2 * f.values.dot(pert.regular_part.values - base.U.values);
  return -(grad + inter) / (4.0 * kPi) + pair;
}

double perturbed_free_energy(double Lambda, const ScalarField& f,
                             const InsertionSet& ins, const SolverConfig& cfg) {
  const MetricTensor flat = MetricTensor::flat(f.lat);
  const LiouvilleSolution base = solve_liouville(Lambda, flat, nullptr, ins, cfg);
  return perturbed_free_energy(base, f, cfg);
}

ScalarField gateaux_derivative(const LiouvilleSolution& U0, const ScalarField& hdir,
                               const MetricTensor& metric) {
  const LatticePtr lat = U0.U.lat;
  require_lattice(lat, hdir);
  Eigen::SparseMatrix<double> J = neg_laplacian_matrix(*lat);
  const Eigen::VectorXd dg = (8.0 * kPi * kPi * U0.Lambda) *
                             (metric.factor.values.array() *
                              U0.U.values.array().exp())
                                 .matrix();
  for (int i = 0; i < static_cast<int>(lat->size()); ++i) J.coeffRef(i, i) += dg[i];
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> fact(J);
  if (fact.info() != Eigen::Success)
    throw NumericalError("gateaux_derivative: factorization failed");
  return {lat, fact.solve(2.0 * kPi * hdir.values)};
}

ScalarField gateaux_derivative(const LiouvilleSolution& U0, const ScalarField& hdir) {
  return gateaux_derivative(U0, hdir, MetricTensor::flat(U0.U.lat));
}

double rate_function(const ScalarField& hfield, double Lambda,
                     const InsertionSet& ins, const SolverConfig& cfg) {
  const MetricTensor flat = MetricTensor::flat(hfield.lat);
  const LiouvilleSolution base = solve_liouville(Lambda, flat, nullptr, ins, cfg);
  const ScalarField shifted(hfield.lat, base.U.values + hfield.values);
  return energy(shifted, Lambda, ins) - energy(base.U, Lambda, ins);
}

LegendreReport legendre_check(const ScalarField& hfield, double Lambda,
                              int m_modes, const SolverConfig& cfg) {
  const LatticePtr lat = hfield.lat;
  const MetricTensor flat = MetricTensor::flat(lat);
  const LiouvilleSolution base = solve_liouville(Lambda, flat, nullptr, {}, cfg);
  const double h2 = lat->cell_area();
  const SpectralBasis basis = disk_spectrum(lat, m_modes);
  const Eigen::MatrixXd& phi = basis.modes;
  const int n = static_cast<int>(lat->size());

  SolverConfig warm = cfg;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(m_modes);

  struct Eval {
    double obj;
    LiouvilleSolution V;
  };
  auto evaluate = [&](const Eigen::VectorXd& coef) -> Eval {
    const ScalarField f(lat, phi * coef);
    const LiouvilleSolution V = solve_liouville(Lambda, flat, &f, {}, warm);
    const double grad = h1_energy(lat, V.regular_part);
    const double inter =
        16.0 * kPi * kPi * Lambda * V.U.values.array().exp().sum() * h2;
    const double f_lf = -(grad + inter) / (4.0 * kPi) +
                        h2 * f.values.dot(V.U.values - base.U.values);
    const double pair_h = h2 * hfield.values.dot(f.values);
    return {pair_h - (f_lf - (-base.energy)), V};
  };

  Eval cur = evaluate(c);
  LegendreReport rep;
  const double gtol = 1e-9 * std::max(1.0, std::sqrt(h2 * hfield.values.squaredNorm()));
  for (int it = 0; it < 40; ++it) {
    rep.iterations = it;
    // gradient: g_i = h^2 <h - (V - U), phi_i>
    const Eigen::VectorXd diff = hfield.values - (cur.V.U.values - base.U.values);
    const Eigen::VectorXd g = h2 * (phi.transpose() * diff);
    if (g.norm() <= gtol) {
      rep.converged = true;
      break;
    }
    // Hessian of the objective: H = -2 pi h^2 Phi^T J_V^{-1} Phi (negative definite)
    Eigen::SparseMatrix<double> J = neg_laplacian_matrix(*lat);
    const Eigen::VectorXd dg =
        (8.0 * kPi * kPi * Lambda) * cur.V.U.values.array().exp().matrix();
    for (int i = 0; i < n; ++i) J.coeffRef(i, i) += dg[i];
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> fact(J);
    Eigen::MatrixXd Z(n, m_modes);
    for (int j = 0; j < m_modes; ++j)
      Z.col(j) = fact.solve(2.0 * kPi * phi.col(j));
    Eigen::MatrixXd negH = h2 * (phi.transpose() * Z);
    negH = 0.5 * (negH + negH.transpose());
    const Eigen::VectorXd step = negH.ldlt().solve(g);

    double t = 1.0;
    bool accepted = false;
    const double slope = g.dot(step);
    while (t >= 1e-8) {
      Eval trial = evaluate(c + t * step);
      if (std::isfinite(trial.obj) && trial.obj >= cur.obj + 1e-4 * t * slope) {
        c += t * step;
        warm.initial_guess = trial.V.regular_part.values;
        cur = std::move(trial);
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
  }

  rep.supremum = cur.obj;
  const ScalarField shifted(lat, base.U.values + hfield.values);
  rep.rate_value = energy(shifted, Lambda, {}) - energy(base.U, Lambda, {});
  rep.gap = rep.rate_value - rep.supremum;
  rep.gap_rel = std::abs(rep.gap) / std::max(1e-300, std::abs(rep.rate_value));
  return rep;
}

std::vector<ContinuityRow> solution_continuity_check(
    double Lambda, const ScalarField& f0, const std::vector<ScalarField>& f_seq,
    const std::vector<double>& t_labels, const SolverConfig& cfg) {
  if (f_seq.size() != t_labels.size())
    throw UsageError("continuity check: labels and fields mismatch");
  const LatticePtr lat = f0.lat;
  const MetricTensor flat = MetricTensor::flat(lat);
  const LiouvilleSolution base = solve_liouville(Lambda, flat, &f0, {}, cfg);
  const SineBasis sine(lat, 64);
  std::vector<ContinuityRow> rows;
  for (std::size_t i = 0; i < f_seq.size(); ++i) {
    require_lattice(lat, f_seq[i]);
    const LiouvilleSolution st = solve_liouville(Lambda, flat, &f_seq[i], {}, cfg);
    ContinuityRow row;
    row.t = t_labels[i];
    const ScalarField gap(lat, st.U.values - base.U.values);
    row.gap_h1 = std::sqrt(h1_energy(lat, gap));
    const ScalarField df(lat, f_seq[i].values - f0.values);
    row.df_l2 = std::sqrt(lat->cell_area() * df.values.squaredNorm());
    row.df_hminus1 = std::sqrt(sine.hminus1_norm(df));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace lft
