// lft: configuration-driven experiments for the semiclassical Liouville
// laboratory on the unit disk. JSON config in, JSON report + CSV traces out.
//
// exit codes: 0 all tolerance gates pass; 1 a gate failed; 2 bad config or
// usage; 3 numerical failure.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "lft/io.hpp"
#include "lft/semiclassics.hpp"

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;
using namespace lft;

namespace {

constexpr int kSchemaVersion = 1;
constexpr double kPi = 3.14159265358979323846;

struct RunConfig {
  std::string experiment;
  double h = 1.0 / 64;
  double gamma = 0.2;
  std::vector<double> gamma_list;
  double Lambda = 0.0;
  std::string metric = "flat";
  InsertionSet insertions;
  int samples = 10000;
  std::uint64_t seed = 1;
  int threads = 1;
  int eigen_count = 0;
  int sine_jmax = 64;
  bool with_o1_constant = false;
  double L = 2.7;           // kpz scale factor
  std::vector<double> alpha_list{0.5, 1.0};
  int f_mode = 0;           // ldp source mode index
  double f_amplitude = 2.0;
  double mobius_a = 0.3;    // conformal-check parameter
  bool save_eigenvectors = false;
  std::string out = "lft_out";
};

[[noreturn]] void config_fail(const std::string& field, const std::string& why) {
  throw ConfigError("config field '" + field + "': " + why);
}

RunConfig parse_config(const json& j) {
  RunConfig c;
  if (!j.contains("experiment") || !j["experiment"].is_string())
    config_fail("experiment", "required string");
  c.experiment = j["experiment"].get<std::string>();
  const std::vector<std::string> known = {
      "solve",      "gff-cov",     "chaos-mass",   "spectrum",
      "partition",  "convergence", "fluctuations", "ldp",
      "insertions", "kpz",         "conformal-check"};
  if (std::find(known.begin(), known.end(), c.experiment) == known.end())
    config_fail("experiment", "unknown experiment '" + c.experiment + "'");

  if (j.contains("h")) c.h = j["h"].get<double>();
  if (!(c.h > 0.0) || c.h > 0.25) config_fail("h", "spacing must lie in (0, 1/4]");

  if (j.contains("gamma")) {
    c.gamma = j["gamma"].get<double>();
    if (!(c.gamma > 0.0) || c.gamma >= 2.0)
      config_fail("gamma", "must satisfy 0 < gamma < 2 (critical case unsupported)");
  }
  if (j.contains("gamma_list")) {
    c.gamma_list = j["gamma_list"].get<std::vector<double>>();
    for (double g : c.gamma_list)
      if (!(g > 0.0) || g >= 2.0)
        config_fail("gamma_list", "every gamma must satisfy 0 < gamma < 2");
  }
  if (j.contains("Lambda")) {
    c.Lambda = j["Lambda"].get<double>();
  } else if (j.contains("mu")) {
    const double mu = j["mu"].get<double>();
    if (mu < 0) config_fail("mu", "must be >= 0");
    c.Lambda = mu * c.gamma * c.gamma;
  }
  if (c.Lambda < 0) config_fail("Lambda", "must be >= 0");

  if (j.contains("metric")) c.metric = j["metric"].get<std::string>();
  if (c.metric != "flat" && c.metric != "hyperbolic")
    config_fail("metric", "must be 'flat' or 'hyperbolic'");

  if (j.contains("insertions")) {
    std::vector<Insertion> items;
    for (const auto& e : j["insertions"]) {
      Insertion ins;
      ins.z = Eigen::Vector2d(e.at("x").get<double>(), e.at("y").get<double>());
      ins.chi = e.at("chi").get<double>();
      items.push_back(ins);
    }
    try {
      c.insertions = InsertionSet(std::move(items));
    } catch (const ConfigError& e) {
      config_fail("insertions", e.what());
    }
  }

  if (j.contains("samples")) c.samples = j["samples"].get<int>();
  if (c.samples < 1) config_fail("samples", "must be >= 1");
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("threads")) c.threads = j["threads"].get<int>();
  if (c.threads < 1) config_fail("threads", "must be >= 1");
  if (j.contains("eigen_count")) c.eigen_count = j["eigen_count"].get<int>();
  if (c.eigen_count < 0) config_fail("eigen_count", "must be >= 0");
  if (j.contains("sine_jmax")) c.sine_jmax = j["sine_jmax"].get<int>();
  if (c.sine_jmax < 1) config_fail("sine_jmax", "must be >= 1");
  if (j.contains("with_o1_constant")) c.with_o1_constant = j["with_o1_constant"].get<bool>();
  if (j.contains("L")) c.L = j["L"].get<double>();
  if (c.L <= 0) config_fail("L", "must be > 0");
  if (j.contains("alpha_list")) c.alpha_list = j["alpha_list"].get<std::vector<double>>();
  if (j.contains("f_mode")) c.f_mode = j["f_mode"].get<int>();
  if (c.f_mode < 0) config_fail("f_mode", "must be >= 0");
  if (j.contains("f_amplitude")) c.f_amplitude = j["f_amplitude"].get<double>();
  if (j.contains("mobius_a")) c.mobius_a = j["mobius_a"].get<double>();
  if (j.contains("save_eigenvectors"))
    c.save_eigenvectors = j["save_eigenvectors"].get<bool>();
  if (std::abs(c.mobius_a) >= 1.0) config_fail("mobius_a", "must satisfy |a| < 1");
  if (j.contains("out")) c.out = j["out"].get<std::string>();
  return c;
}

std::string git_revision() {
  fs::path dir = fs::current_path();
  for (int up = 0; up < 6; ++up) {
    const fs::path head = dir / ".git" / "HEAD";
    if (fs::exists(head)) {
      std::ifstream in(head);
      std::string line;
      std::getline(in, line);
      if (line.rfind("ref: ", 0) == 0) {
        std::ifstream ref(dir / ".git" / line.substr(5));
        std::string rev;
        if (ref && std::getline(ref, rev)) return rev;
        return "unknown";
      }
      return line;
    }
    if (!dir.has_parent_path() || dir.parent_path() == dir) break;
    dir = dir.parent_path();
  }
  return "unknown";
}

struct Gate {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

json gates_to_json(const std::vector<Gate>& gates) {
  json arr = json::array();
  for (const auto& g : gates)
    arr.push_back({{"name", g.name},
                   {"value", g.value},
                   {"tolerance", g.tolerance},
                   {"pass", g.pass}});
  return arr;
}

Gate make_gate(const std::string& name, double value, double tol, bool smaller_ok = true) {
  Gate g;
  g.name = name;
  g.value = value;
  g.tolerance = tol;
  g.pass = smaller_ok ? (value <= tol) : (value >= tol);
  return g;
}

MetricTensor metric_for(const RunConfig& c, const LatticePtr& lat) {
  return c.metric == "flat" ? MetricTensor::flat(lat) : MetricTensor::hyperbolic(lat);
}

McConfig mc_for(const RunConfig& c) {
  McConfig mc;
  mc.samples = c.samples;
  mc.seed = c.seed;
  mc.threads = c.threads;
  mc.eigen_count = c.eigen_count;
  mc.sine_jmax = c.sine_jmax;
  return mc;
}

std::vector<double> gammas_or(const RunConfig& c, std::vector<double> dflt) {
  return c.gamma_list.empty() ? dflt : c.gamma_list;
}

void write_csv(const fs::path& p, const std::string& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(p);
  out << header << "\n" << std::setprecision(17);
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i)
      out << (i ? "," : "") << r[i];
    out << "\n";
  }
}

struct Outcome {
  json results;
  std::vector<Gate> gates;
};

Outcome run_solve(const RunConfig& c, const LatticePtr& lat, const fs::path& dir) {
  Outcome o;
  const auto metric = metric_for(c, lat);
  const auto sol = solve_liouville(c.Lambda, metric, nullptr, c.insertions, {});
  write_field_csv((dir / "solution.csv").string(), sol.U);
  write_field_blob((dir / "solution.lftf").string(), sol.U);
  o.results["residual"] = sol.residual_norm;
  o.results["iterations"] = sol.iterations;
  o.results["energy"] = sol.energy;
  o.results["free_energy"] = -sol.energy;

  const bool radial_case = c.metric == "flat" && c.insertions.empty() &&
                           std::abs(c.Lambda - 2.0 / (kPi * kPi)) < 1e-12;
  if (radial_case) {
    double linf = 0.0;
    for (std::size_t i = 0; i < lat->size(); ++i) {
      const double r2 = lat->nodes[i].squaredNorm();
      const double exact = 2.0 * std::log(0.5 / (1.0 - 0.5 * r2));
      linf = std::max(linf, std::abs(sol.U.values[static_cast<Eigen::Index>(i)] - exact));
    }
    o.results["linf_vs_radial"] = linf;
    o.gates.push_back(make_gate("linf_vs_radial", linf, 5e-3));
  }
  o.gates.push_back(make_gate("residual", sol.residual_norm, 1e-9));
  return o;
}

Outcome run_gff_cov(const RunConfig& c, const LatticePtr& lat, const fs::path& dir) {
  Outcome o;
  const GreenOperator green(lat);
  const int n = static_cast<int>(lat->size());
  int center = -1, half = -1;
  for (int i = 0; i < n; ++i) {
    if (lat->nodes[static_cast<std::size_t>(i)].norm() < 1e-12) center = i;
    if ((lat->nodes[static_cast<std::size_t>(i)] - Eigen::Vector2d(0.5, 0)).norm() < 1e-12)
      half = i;
  }
  if (center < 0 || half < 0)
    throw ConfigError("lattice misses the probe nodes (0,0)/(0.5,0)");

  const auto panel = make_pair_panel(*lat, 50, 0.1, 0.8, c.seed + 1);
  std::vector<int> nodes{center, half};
  for (const auto& [i, j] : panel) {
    nodes.push_back(i);
    nodes.push_back(j);
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  std::vector<int> slot(static_cast<std::size_t>(n), -1);
  for (std::size_t s = 0; s < nodes.size(); ++s)
    slot[static_cast<std::size_t>(nodes[s])] = static_cast<int>(s);

  const int m = static_cast<int>(nodes.size());
  Eigen::VectorXd s1 = Eigen::VectorXd::Zero(m);
  Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(m, m);
  for (int r = 0; r < c.samples; ++r) {
    const GffSample X = sample_exact(green, {c.seed, static_cast<std::uint64_t>(r)});
    Eigen::VectorXd v(m);
    for (int s = 0; s < m; ++s) v[s] = X.field.values[nodes[static_cast<std::size_t>(s)]];
    s1 += v;
    s2 += v * v.transpose();
  }
  s1 /= c.samples;
  s2 /= c.samples;
  const Eigen::VectorXd gd = green.green_diag();

  auto cov_of = [&](int i, int j) {
    const int si = slot[static_cast<std::size_t>(i)], sj = slot[static_cast<std::size_t>(j)];
    return s2(si, sj) - s1[si] * s1[sj];
  };
  auto se_of = [&](int i, int j, double ref) {
    return std::sqrt((gd[i] * gd[j] + ref * ref) / c.samples);
  };

  const double c_ref = std::log(2.0);
  const double c_emp = cov_of(center, half);
  const double c_se = se_of(center, half, c_ref);
  o.results["cov_center_half"] = c_emp;
  o.results["cov_center_half_se"] = c_se;
  o.results["cov_center_half_ref"] = c_ref;
  o.gates.push_back(make_gate("cov(0,0.5) deviation over 3 SE",
                              std::abs(c_emp - c_ref) / (3 * c_se), 1.0));

  int within = 0;
  std::vector<std::vector<double>> rows;
  for (const auto& [i, j] : panel) {
    const double ref = green.green_column(i)[j];
    const double emp = cov_of(i, j);
    const double se = se_of(i, j, ref);
    if (std::abs(emp - ref) <= 3 * se) ++within;
    rows.push_back({lat->nodes[static_cast<std::size_t>(i)].x(),
                    lat->nodes[static_cast<std::size_t>(i)].y(),
                    lat->nodes[static_cast<std::size_t>(j)].x(),
                    lat->nodes[static_cast<std::size_t>(j)].y(), emp, ref, se});
  }
  write_csv(dir / "covariance_panel.csv", "xi,yi,xj,yj,empirical,reference,se", rows);
  write_sample((dir / "sample_0").string(), sample_exact(green, {c.seed, 0}));
  const double frac = static_cast<double>(within) / static_cast<double>(panel.size());
  o.results["panel_within_3se_fraction"] = frac;
  o.gates.push_back(make_gate("panel fraction within 3 SE", frac, 0.99, false));
  return o;
}

Outcome run_chaos_mass(const RunConfig& c, const LatticePtr& lat, const fs::path& dir) {
  Outcome o;
  const GreenOperator green(lat);
  const auto metric = metric_for(c, lat);
  const auto gammas = gammas_or(c, {0.5, 1.0, 1.4});
  std::vector<std::vector<double>> rows;
  for (double g : gammas) {
    double acc = 0, acc2 = 0;
    for (int r = 0; r < c.samples; ++r) {
      const GffSample X = sample_exact(green, {c.seed, static_cast<std::uint64_t>(r)});
      const double v = gmc_measure(X, g, metric).total_mass();
      acc += v;
      acc2 += v * v;
    }
    const double mean = acc / c.samples;
    const double se =
        std::sqrt(std::max(0.0, acc2 / c.samples - mean * mean) / c.samples);
    const double ref = 2.0 * kPi / (2.0 + g * g);
    double lattice_mean = 0.0;
    for (std::size_t i = 0; i < lat->size(); ++i)
      lattice_mean +=
          std::pow(conformal_radius(lat->nodes[i]), g * g / 2.0) * lat->cell_area();
    const double bias = std::abs(lattice_mean - ref);
    rows.push_back({g, mean, se, ref, bias});
    if (c.metric == "flat")
      o.gates.push_back(make_gate("mass gap within 3 SE + bias, gamma=" + std::to_string(g),
                                  std::abs(mean - ref), 3 * se + bias + 1e-12));
  }
  write_csv(dir / "chaos_mass.csv", "gamma,mean,se,reference,lattice_bias", rows);
  o.results["table"] = "chaos_mass.csv";
  {
    const GffSample X = sample_exact(green, {c.seed, 0});
    const ChaosMeasure m = gmc_measure(X, gammas.front(), metric);
    write_measure_csv((dir / "measure_sample.csv").string(), m);
    write_measure_summary((dir / "measure_sample.json").string(), m);
  }
  return o;
}

Outcome run_spectrum(const RunConfig& c, const LatticePtr& lat, const fs::path& dir) {
  Outcome o;
  const int k = c.eigen_count > 0 ? c.eigen_count : default_eigen_count(*lat);
  SpectralData spec;
  if (c.Lambda > 0.0) {
    const auto sol =
        solve_liouville(c.Lambda, metric_for(c, lat), nullptr, c.insertions, {});
    spec = weighted_eigs(sol.U, c.insertions, k);
  } else {
    spec = weighted_eigs(ScalarField(lat), c.insertions, k);
  }
  std::vector<std::vector<double>> rows;
  for (int j = 0; j < spec.count(); ++j)
    rows.push_back({static_cast<double>(j + 1), spec.lambdas[j]});
  write_csv(dir / "eigenvalues.csv", "j,lambda", rows);
  write_spectral_data(dir.string(), spec, c.save_eigenvectors);
  Eigen::MatrixXd gram = lat->cell_area() * (spec.modes.transpose() *
                                             spec.weight.asDiagonal() * spec.modes);
  const double gram_res =
      (gram - Eigen::MatrixXd::Identity(spec.count(), spec.count())).cwiseAbs().maxCoeff();
  o.results["lambda_1"] = spec.lambdas[0];
  o.results["weyl_slope"] = spec.weyl_slope;
  o.results["orthonormality_residual"] = gram_res;
  o.gates.push_back(make_gate("orthonormality residual", gram_res, 1e-8));
  if (c.Lambda == 0.0 && c.insertions.empty()) {
    const double ref = 5.783185962946785 / (2.0 * kPi);
    o.gates.push_back(
        make_gate("lambda_1 relative error", std::abs(spec.lambdas[0] - ref) / ref, 0.02));
  }
  return o;
}

Outcome run_partition(const RunConfig& c, const LatticePtr& lat, const fs::path& dir) {
  Outcome o;
  const auto gammas = gammas_or(c, {0.4, 0.3, 0.2});
  const auto rep = partition_asymptotics(c.Lambda, gammas, c.insertions, lat, mc_for(c),
                                         c.with_o1_constant);
  std::vector<std::vector<double>> rows;
  for (const auto& r : rep.rows)
    rows.push_back({r.gamma, r.gamma2_lnZ, r.se, rep.f_lambda, r.rel_gap, r.ess});
  write_csv(dir / "partition.csv", "gamma,gamma2_lnZ,se,f_lambda,rel_gap,ess", rows);
  o.results["f_lambda"] = rep.f_lambda;
  o.results["monotone_gap"] = rep.monotone_gap;
  {
    json jr = json::array();
    for (const auto& r : rep.rows)
      jr.push_back({{"gamma", r.gamma},
                    {"gamma2_lnZ", r.gamma2_lnZ},
                    {"se", r.se},
                    {"rel_gap", r.rel_gap},
                    {"ess", r.ess}});
    o.results["rows"] = jr;
  }
  o.gates.push_back(make_gate("rel gap at smallest gamma", rep.rows.back().rel_gap, 0.05));
  o.gates.push_back(make_gate("monotone gap trend", rep.monotone_gap ? 1.0 : 0.0, 1.0, false));
  o.gates.push_back(make_gate("ess at smallest gamma", rep.rows.back().ess, 50.0, false));
  if (rep.with_constant) {
    o.results["const_mc"] = rep.rows.back().const_mc;
    o.results["const_spectral"] = rep.const_spectral;
    o.results["const_ratio"] = rep.const_ratio;
    o.gates.push_back(
        make_gate("O(1) constant ratio deviation", std::abs(rep.const_ratio - 1.0), 0.10));
  }
  return o;
}

Outcome run_convergence(const RunConfig& c, const LatticePtr& lat, const fs::path& dir) {
  Outcome o;
  const auto gammas = gammas_or(c, {0.4, 0.2, 0.1});
  const auto rep =
      convergence_in_probability(c.Lambda, gammas, c.insertions, lat, mc_for(c));
  std::vector<std::vector<double>> rows;
  for (const auto& r : rep.rows)
    rows.push_back({r.gamma, r.median_hm1, r.median_mass_gap, r.ess});
  write_csv(dir / "convergence.csv", "gamma,median_hm1,median_mass_gap,ess", rows);
  o.results["target_mass"] = rep.target_mass;
  {
    json jr = json::array();
    for (const auto& r : rep.rows)
      jr.push_back({{"gamma", r.gamma},
                    {"median_hm1", r.median_hm1},
                    {"median_mass_gap", r.median_mass_gap},
                    {"ess", r.ess}});
    o.results["rows"] = jr;
  }
  o.gates.push_back(make_gate("hm1 medians monotone", rep.hm1_monotone ? 1.0 : 0.0, 1.0, false));
  o.gates.push_back(
      make_gate("mass medians monotone", rep.mass_monotone ? 1.0 : 0.0, 1.0, false));
  return o;
}

Outcome run_fluctuations(const RunConfig& c, const LatticePtr& lat, const fs::path& dir) {
  Outcome o;
  const auto rep =
      fluctuation_covariance_test(c.Lambda, c.gamma, c.insertions, lat, mc_for(c));
  std::vector<std::vector<double>> rows;
  for (const auto& p : rep.pairs)
    rows.push_back({static_cast<double>(p.i), static_cast<double>(p.j), p.empirical,
                    p.reference, p.rel_dev});
  write_csv(dir / "fluctuation_panel.csv", "i,j,empirical,reference,rel_dev", rows);
  o.results["mean_rel_dev"] = rep.mean_rel_dev;
  o.results["max_rel_dev"] = rep.max_rel_dev;
  o.results["ess"] = rep.ess;
  o.results["center_var_tilted"] = rep.center_var_tilted;
  o.results["center_var_free"] = rep.center_var_free;
  o.gates.push_back(make_gate("mean relative deviation", rep.mean_rel_dev, 0.10));
  if (c.Lambda > 0)
    o.gates.push_back(make_gate("massive variance below massless",
                                rep.center_var_tilted < rep.center_var_free ? 1.0 : 0.0,
                                1.0, false));
  return o;
}

Outcome run_ldp(const RunConfig& c, const LatticePtr& lat, const fs::path& dir) {
  Outcome o;
  const SpectralBasis basis = disk_spectrum(lat, c.f_mode + 1);
  const ScalarField f(lat, c.f_amplitude * basis.modes.col(c.f_mode));
  const auto gammas = gammas_or(c, {0.4, 0.3, 0.2});
  const auto rep = laplace_ldp_check(c.Lambda, f, gammas, lat, mc_for(c));
  std::vector<std::vector<double>> rows;
  for (const auto& r : rep.rows)
    rows.push_back({r.gamma, r.estimate, r.se, rep.solver_prediction, r.ess});
  write_csv(dir / "ldp.csv", "gamma,estimate,se,solver_prediction,ess", rows);
  o.results["solver_prediction"] = rep.solver_prediction;
  {
    json jr = json::array();
    for (const auto& r : rep.rows)
      jr.push_back({{"gamma", r.gamma},
                    {"estimate", r.estimate},
                    {"se", r.se},
                    {"ess", r.ess}});
    o.results["rows"] = jr;
  }
  o.results["duality_value"] = rep.duality_value;
  o.gates.push_back(make_gate("rel gap at smallest gamma", rep.rel_gap_smallest, 0.05));

  const MetricTensor flat = MetricTensor::flat(lat);
  const auto base = solve_liouville(c.Lambda, flat, nullptr, {}, {});
  const auto vsol = solve_liouville(c.Lambda, flat, &f, {}, {});
  const ScalarField hfield(lat, vsol.U.values - base.U.values);
  const LegendreReport leg = legendre_check(hfield, c.Lambda, 16, {});
  o.results["legendre_supremum"] = leg.supremum;
  o.results["legendre_rate_value"] = leg.rate_value;
  o.results["legendre_gap_rel"] = leg.gap_rel;
  o.gates.push_back(make_gate("legendre gap (relative)", leg.gap_rel, 0.01));
  return o;
}

Outcome run_insertions(const RunConfig& c, const LatticePtr& lat, const fs::path& dir) {
  Outcome o;
  if (c.insertions.empty())
    throw ConfigError("insertions experiment requires a nonempty insertion list");
  const auto gammas = gammas_or(c, {0.4, 0.3, 0.2});
  const auto rep = heavy_insertion_suite(c.Lambda, c.insertions, gammas, lat, mc_for(c));
  std::vector<std::vector<double>> rows;
  for (const auto& r : rep.partition.rows)
    rows.push_back({r.gamma, r.gamma2_lnZ, r.se, rep.f_lambda, r.rel_gap, r.ess});
  write_csv(dir / "insertion_partition.csv", "gamma,gamma2_lnZ,se,f_lambda,rel_gap,ess",
            rows);
  o.results["f_lambda"] = rep.f_lambda;
  {
    json jr = json::array();
    for (const auto& r : rep.partition.rows)
      jr.push_back({{"gamma", r.gamma},
                    {"gamma2_lnZ", r.gamma2_lnZ},
                    {"se", r.se},
                    {"rel_gap", r.rel_gap},
                    {"ess", r.ess}});
    o.results["rows"] = jr;
  }
  {
    json jp = json::array();
    for (const auto& prof : rep.profiles)
      jp.push_back({{"x", prof.z.x()},
                    {"y", prof.z.y()},
                    {"chi", prof.chi},
                    {"slope", prof.slope},
                    {"rel_err", prof.rel_err}});
    o.results["profiles"] = jp;
  }
  o.results["fluctuation_mean_rel_dev"] = rep.fluctuations.mean_rel_dev;
  o.results["profile_slope"] = rep.profile_slope;
  o.results["profile_slope_target"] = rep.profile_slope_target;
  o.gates.push_back(make_gate("profile slope relative error", rep.profile_rel_err, 0.15));
  o.gates.push_back(
      make_gate("rel gap at smallest gamma", rep.partition.rows.back().rel_gap, 0.05));
  return o;
}

Outcome run_kpz(const RunConfig& c, const LatticePtr& lat, const fs::path& dir) {
  Outcome o;
  std::vector<std::vector<int>> sets(c.alpha_list.size());
  for (std::size_t i = 0; i < lat->size(); ++i) {
    const auto& p = lat->nodes[i];
    const double ang = std::atan2(p.y(), p.x()) + kPi;  // [0, 2pi]
    const std::size_t s =
        std::min(c.alpha_list.size() - 1,
                 static_cast<std::size_t>(ang / (2 * kPi) * c.alpha_list.size()));
    sets[s].push_back(static_cast<int>(i));
  }
  const auto rep =
      kpz_rescaling_identity(c.gamma, c.alpha_list, sets, c.L, lat, {c.seed, 0});
  std::vector<std::vector<double>> rows;
  for (std::size_t s = 0; s < rep.alphas.size(); ++s)
    rows.push_back({rep.alphas[s], rep.lhs[s], rep.rhs[s], rep.rel_dev[s]});
  write_csv(dir / "kpz.csv", "alpha,lhs,rhs,rel_dev", rows);
  o.results["max_rel_dev"] = rep.max_rel_dev;
  o.results["exponent_gap"] = rep.exponent_gap;
  o.results["mu_roundtrip_rel"] = rep.mu_roundtrip_rel;
  o.gates.push_back(make_gate("pathwise identity", rep.max_rel_dev, 1e-12));
  o.gates.push_back(make_gate("mu exponent algebra", rep.exponent_gap, 1e-12));
  o.gates.push_back(make_gate("mu-L roundtrip", rep.mu_roundtrip_rel, 1e-12));
  return o;
}

Outcome run_conformal_check(const RunConfig& c, const LatticePtr& lat,
                            const fs::path& dir) {
  Outcome o;
  const GreenOperator green(lat);
  const GffSample X = sample_exact(green, {c.seed, 0});
  const auto rep = conformal_check(X, c.gamma, Eigen::Vector2d(c.mobius_a, 0.0), green);
  std::vector<std::vector<double>> rows;
  for (std::size_t r = 0; r < rep.regions.size(); ++r)
    rows.push_back({static_cast<double>(r), rep.regions[r].pushforward,
                    rep.regions[r].pullback_construction, rep.regions[r].rel_diff});
  write_csv(dir / "conformal_check.csv", "region,pushforward,pullback,rel_diff", rows);
  o.results["max_rel_diff"] = rep.max_rel_diff;
  // O(h) gate: 3 percent at h = 1/64, scaled proportionally for coarser grids
  const double tol = 0.03 * std::max(1.0, lat->h * 64.0);
  o.gates.push_back(make_gate("region mass max relative diff", rep.max_rel_diff, tol));
  return o;
}

int run_command(const std::string& config_path, std::optional<std::uint64_t> seed_flag,
                std::optional<int> threads_flag, std::optional<std::string> out_flag,
                bool dry_run) {
  json j;
  {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("cannot open config: " + config_path);
    try {
      j = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("config parse error: ") + e.what());
    }
  }
  RunConfig c = parse_config(j);
  if (seed_flag) c.seed = *seed_flag;
  if (threads_flag) c.threads = *threads_flag;
  if (out_flag) c.out = *out_flag;

  const double q = 2.0 / c.gamma + c.gamma / 2.0;
  const double mu = c.Lambda / (c.gamma * c.gamma);
  if (dry_run) {
    const auto lat = build_lattice(c.h);
    std::cout << "experiment:  " << c.experiment << "\n"
              << "h:           " << c.h << "  (" << lat->size() << " interior nodes)\n"
              << "gamma:       " << c.gamma << "\n"
              << "Lambda:      " << c.Lambda << "  (mu = " << mu << ")\n"
              << "Q:           " << q << "\n"
              << "eigen count: "
              << (c.eigen_count > 0 ? c.eigen_count : default_eigen_count(*lat)) << "\n"
              << "samples:     " << c.samples << "\n"
              << "seed:        " << c.seed << "\n";
    return 0;
  }

  const auto t0 = std::chrono::steady_clock::now();
  const auto lat = build_lattice(c.h);
  const fs::path dir = fs::path(c.out) / c.experiment;
  fs::create_directories(dir);

  Outcome o;
  if (c.experiment == "solve") o = run_solve(c, lat, dir);
  else if (c.experiment == "gff-cov") o = run_gff_cov(c, lat, dir);
  else if (c.experiment == "chaos-mass") o = run_chaos_mass(c, lat, dir);
  else if (c.experiment == "spectrum") o = run_spectrum(c, lat, dir);
  else if (c.experiment == "partition") o = run_partition(c, lat, dir);
  else if (c.experiment == "convergence") o = run_convergence(c, lat, dir);
  else if (c.experiment == "fluctuations") o = run_fluctuations(c, lat, dir);
  else if (c.experiment == "ldp") o = run_ldp(c, lat, dir);
  else if (c.experiment == "insertions") o = run_insertions(c, lat, dir);
  else if (c.experiment == "kpz") o = run_kpz(c, lat, dir);
  else if (c.experiment == "conformal-check") o = run_conformal_check(c, lat, dir);

  bool all_pass = true;
  for (const auto& g : o.gates) all_pass = all_pass && g.pass;

  json report;
  report["schema_version"] = kSchemaVersion;
  report["experiment"] = c.experiment;
  report["params"] = {{"h", c.h},
                      {"nodes", lat->size()},
                      {"gamma", c.gamma},
                      {"gamma_list", c.gamma_list},
                      {"Lambda", c.Lambda},
                      {"mu", mu},
                      {"Q", q},
                      {"metric", c.metric},
                      {"samples", c.samples},
                      {"seed", c.seed},
                      {"eigen_count", c.eigen_count},
                      {"sine_jmax", c.sine_jmax}};
  json ins_arr = json::array();
  for (const auto& it : c.insertions.items)
    ins_arr.push_back({{"x", it.z.x()}, {"y", it.z.y()}, {"chi", it.chi}});
  report["params"]["insertions"] = ins_arr;
  report["results"] = o.results;
  report["checks"] = gates_to_json(o.gates);
  report["pass"] = all_pass;
  {
    std::ofstream out(dir / "report.json");
    out << report.dump(2) << "\n";
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json manifest = {{"schema_version", kSchemaVersion},
                   {"git_revision", git_revision()},
                   {"seed", c.seed},
                   {"threads", c.threads},
                   {"wall_time_s", wall}};
  {
    std::ofstream out(dir / "manifest.json");
    out << manifest.dump(2) << "\n";
  }

  for (const auto& g : o.gates)
    std::cout << (g.pass ? "[PASS] " : "[FAIL] ") << g.name << "  value=" << g.value
              << "  tolerance=" << g.tolerance << "\n";
  std::cout << (all_pass ? "all gates passed" : "TOLERANCE FAILURE") << ": report at "
            << (dir / "report.json").string() << "\n";
  if (!all_pass) {
    for (const auto& g : o.gates)
      if (!g.pass) {
        std::cerr << "failing criterion: " << g.name << "\n";
        break;
      }
    return 1;
  }
  return 0;
}

int summarize_command(const std::vector<std::string>& paths, const std::string& out_csv) {
  if (paths.empty()) throw UsageError("summarize needs at least one report");
  std::string experiment;
  json merged_rows = json::array();
  json gamma_rows = json::array();
  bool all_pass = true;
  for (const auto& p : paths) {
    std::ifstream in(p);
    if (!in) throw UsageError("cannot open report: " + p);
    json rep;
    try {
      rep = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
      throw UsageError("unreadable report " + p + ": " + e.what());
    }
    if (!rep.contains("experiment"))
      throw UsageError("not an experiment report: " + p);
    const std::string exp = rep.at("experiment").get<std::string>();
    if (experiment.empty()) experiment = exp;
    else if (exp != experiment)
      throw UsageError("mixed experiments: " + experiment + " vs " + exp);
    all_pass = all_pass && rep.at("pass").get<bool>();
    json row;
    row["source"] = p;
    row["pass"] = rep.at("pass");
    for (const auto& chk : rep.at("checks"))
      row[chk.at("name").get<std::string>()] = chk.at("value");
    if (rep["results"].contains("f_lambda")) row["f_lambda"] = rep["results"]["f_lambda"];
    merged_rows.push_back(row);
    if (rep["results"].contains("rows"))
      for (const auto& gr : rep["results"]["rows"]) gamma_rows.push_back(gr);
  }

  // merged per-gamma table: sort descending in gamma, recompute the trend
  if (!gamma_rows.empty()) {
    std::sort(gamma_rows.begin(), gamma_rows.end(), [](const json& a, const json& b) {
      return a.at("gamma").get<double>() > b.at("gamma").get<double>();
    });
    const char* key = gamma_rows[0].contains("rel_gap")       ? "rel_gap"
                      : gamma_rows[0].contains("median_hm1")  ? "median_hm1"
                                                              : nullptr;
    if (key) {
      bool monotone = true;
      for (std::size_t i = 1; i < gamma_rows.size(); ++i)
        if (gamma_rows[i].at(key).get<double>() >
            gamma_rows[i - 1].at(key).get<double>())
          monotone = false;
      std::cout << "merged per-gamma trend (" << key << ", descending gamma): "
                << (monotone ? "monotone" : "NOT monotone") << "\n";
    }
    std::cout << "gamma";
    for (auto it = gamma_rows[0].begin(); it != gamma_rows[0].end(); ++it)
      if (it.key() != "gamma") std::cout << "," << it.key();
    std::cout << "\n" << std::setprecision(10);
    for (const auto& gr : gamma_rows) {
      std::cout << gr.at("gamma").get<double>();
      for (auto it = gr.begin(); it != gr.end(); ++it)
        if (it.key() != "gamma") std::cout << "," << it.value().get<double>();
      std::cout << "\n";
    }
  }

  std::vector<std::string> cols;
  for (const auto& row : merged_rows)
    for (auto it = row.begin(); it != row.end(); ++it)
      if (std::find(cols.begin(), cols.end(), it.key()) == cols.end())
        cols.push_back(it.key());
  std::sort(cols.begin(), cols.end());

  std::ostringstream csv;
  for (std::size_t i = 0; i < cols.size(); ++i) csv << (i ? "," : "") << cols[i];
  csv << "\n";
  for (const auto& row : merged_rows) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
      csv << (i ? "," : "");
      if (row.contains(cols[i])) csv << row[cols[i]].dump();
    }
    csv << "\n";
  }
  if (!out_csv.empty()) {
    std::ofstream out(out_csv);
    out << csv.str();
  }
  std::cout << "experiment: " << experiment << "  reports: " << paths.size()
            << "  verdict: " << (all_pass ? "pass" : "fail") << "\n";
  std::cout << csv.str();
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semiclassical Liouville experiments on the unit disk"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed_flag;
  std::optional<int> threads_flag;
  std::optional<std::string> out_flag;
  bool dry_run = false;
  auto* run = app.add_subcommand("run", "run one experiment from a JSON config");
  run->add_option("--config", config_path, "config file (JSON)")->required();
  run->add_option("--seed", seed_flag, "override the config seed");
  run->add_option("--threads", threads_flag, "worker threads for MC replicas");
  run->add_option("--out", out_flag, "output directory");
  run->add_flag("--dry-run", dry_run, "validate config and print derived quantities");

  std::vector<std::string> reports;
  std::string summary_csv;
  auto* sum = app.add_subcommand("summarize", "merge reports into one table");
  sum->add_option("reports", reports, "report.json files");
  sum->add_option("--out", summary_csv, "write the merged CSV here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return run_command(config_path, seed_flag, threads_flag, out_flag, dry_run);
    return summarize_command(reports, summary_csv);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << " (residual " << e.residual
              << ", iterations " << e.iterations << ")\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
