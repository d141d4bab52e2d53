// pybind11 bindings for the core operations: lattice and Green machinery,
// GFF samplers, chaos measures, the Liouville solver, spectra, and the
// semiclassical Monte Carlo experiments.

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lft/io.hpp"
#include "lft/semiclassics.hpp"

namespace py = pybind11;
using namespace lft;

// python side holds a mutable shared_ptr; the C++ API wants const
using PyLattice = std::shared_ptr<DiskLattice>;

namespace {

InsertionSet to_insertions(const std::vector<std::tuple<double, double, double>>& v) {
  std::vector<Insertion> items;
  for (const auto& [x, y, chi] : v)
    items.push_back({Eigen::Vector2d(x, y), chi});
  return InsertionSet(std::move(items));
}

MetricTensor metric_by_name(const std::string& name, const LatticePtr& lat) {
  if (name == "flat") return MetricTensor::flat(lat);
  if (name == "hyperbolic") return MetricTensor::hyperbolic(lat);
  throw ConfigError("metric must be 'flat' or 'hyperbolic'");
}

}  // namespace

PYBIND11_MODULE(_lft, m) {
  m.doc() = "semiclassical Liouville field theory laboratory on the unit disk";

  py::register_exception<ConfigError>(m, "LftConfigError", PyExc_ValueError);
  py::register_exception<UsageError>(m, "LftUsageError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "LftDomainError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "LftNumericalError", PyExc_RuntimeError);

  py::class_<DiskLattice, PyLattice>(m, "DiskLattice")
      .def_property_readonly("h", [](const DiskLattice& l) { return l.h; })
      .def("__len__", [](const DiskLattice& l) { return l.size(); })
      .def_property_readonly("nodes", [](const DiskLattice& l) {
        Eigen::MatrixXd out(l.size(), 2);
        for (std::size_t i = 0; i < l.size(); ++i) out.row(i) = l.nodes[i];
        return out;
      });
  m.def(
      "build_lattice",
      [](double h) { return std::const_pointer_cast<DiskLattice>(build_lattice(h)); },
      py::arg("h"));

  m.def("green_kernel", &green_kernel, py::arg("x"), py::arg("y"));
  m.def("conformal_radius", &conformal_radius, py::arg("x"));

  py::class_<GreenOperator>(m, "GreenOperator")
      .def(py::init([](const PyLattice& lat) {
        return std::make_unique<GreenOperator>(lat);
      }))
      .def("apply",
           [](const GreenOperator& g, const Eigen::VectorXd& f) {
             return g.apply(ScalarField(g.lattice(), f)).values;
           })
      .def("green_diag", &GreenOperator::green_diag)
      .def("green_column", &GreenOperator::green_column);

  py::class_<GffSample>(m, "GffSample")
      .def_property_readonly("field", [](const GffSample& s) { return s.field.values; })
      .def_property_readonly("variance",
                             [](const GffSample& s) { return s.variance.values; });
  m.def(
      "sample_exact",
      [](const GreenOperator& g, std::uint64_t seed, std::uint64_t replica) {
        return sample_exact(g, {seed, replica});
      },
      py::arg("green"), py::arg("seed"), py::arg("replica") = 0);

  m.def(
      "gmc_total_mass",
      [](const GreenOperator& g, double gamma, const std::string& metric,
         std::uint64_t seed, std::uint64_t replica) {
        const GffSample X = sample_exact(g, {seed, replica});
        return gmc_measure(X, gamma, metric_by_name(metric, g.lattice())).total_mass();
      },
      py::arg("green"), py::arg("gamma"), py::arg("metric") = "flat",
      py::arg("seed") = 1, py::arg("replica") = 0);

  py::class_<LiouvilleSolution>(m, "LiouvilleSolution")
      .def_property_readonly("U", [](const LiouvilleSolution& s) { return s.U.values; })
      .def_property_readonly("regular_part",
                             [](const LiouvilleSolution& s) { return s.regular_part.values; })
      .def_readonly("residual_norm", &LiouvilleSolution::residual_norm)
      .def_readonly("energy", &LiouvilleSolution::energy)
      .def_readonly("iterations", &LiouvilleSolution::iterations);
  m.def(
      "solve_liouville",
      [](double Lambda, const PyLattice& lat, const std::string& metric,
         const std::vector<std::tuple<double, double, double>>& insertions) {
        return solve_liouville(Lambda, metric_by_name(metric, lat), nullptr,
                               to_insertions(insertions), {});
      },
      py::arg("Lambda"), py::arg("lattice"), py::arg("metric") = "flat",
      py::arg("insertions") = std::vector<std::tuple<double, double, double>>{});
  m.def(
      "free_energy",
      [](double Lambda, const PyLattice& lat, const std::string& metric,
         const std::vector<std::tuple<double, double, double>>& insertions) {
        return free_energy(Lambda, metric_by_name(metric, lat), to_insertions(insertions));
      },
      py::arg("Lambda"), py::arg("lattice"), py::arg("metric") = "flat",
      py::arg("insertions") = std::vector<std::tuple<double, double, double>>{});

  py::class_<SpectralData>(m, "SpectralData")
      .def_readonly("lambdas", &SpectralData::lambdas)
      .def_readonly("weyl_slope", &SpectralData::weyl_slope)
      .def("count", &SpectralData::count);
  m.def(
      "weighted_eigs",
      [](const PyLattice& lat, const Eigen::VectorXd& U, int k) {
        return weighted_eigs(ScalarField(lat, U), {}, k);
      },
      py::arg("lattice"), py::arg("U"), py::arg("k"));
  m.def(
      "fluctuation_constant",
      [](const SpectralData& spec, double alpha) {
        const auto z = fluctuation_constant(spec, alpha);
        return py::make_tuple(z.value, z.log_value, z.tail_bound_log);
      },
      py::arg("spec"), py::arg("alpha"));

  m.def("conformal_weight", &conformal_weight, py::arg("alpha"), py::arg("gamma"));
  m.def("central_charge_to_gamma", &central_charge_to_gamma, py::arg("c"));

  py::class_<McConfig>(m, "McConfig")
      .def(py::init<>())
      .def_readwrite("samples", &McConfig::samples)
      .def_readwrite("seed", &McConfig::seed)
      .def_readwrite("threads", &McConfig::threads)
      .def_readwrite("eigen_count", &McConfig::eigen_count)
      .def_readwrite("sine_jmax", &McConfig::sine_jmax);

  py::class_<PartitionRow>(m, "PartitionRow")
      .def_readonly("gamma", &PartitionRow::gamma)
      .def_readonly("gamma2_lnZ", &PartitionRow::gamma2_lnZ)
      .def_readonly("se", &PartitionRow::se)
      .def_readonly("rel_gap", &PartitionRow::rel_gap)
      .def_readonly("ess", &PartitionRow::ess);
  py::class_<PartitionReport>(m, "PartitionReport")
      .def_readonly("rows", &PartitionReport::rows)
      .def_readonly("f_lambda", &PartitionReport::f_lambda)
      .def_readonly("monotone_gap", &PartitionReport::monotone_gap)
      .def_readonly("const_ratio", &PartitionReport::const_ratio)
      .def_readonly("with_constant", &PartitionReport::with_constant);
  m.def(
      "partition_asymptotics",
      [](double Lambda, const std::vector<double>& gammas, const PyLattice& lat,
         const McConfig& mc, bool with_o1,
         const std::vector<std::tuple<double, double, double>>& insertions) {
        return partition_asymptotics(Lambda, gammas, to_insertions(insertions), lat, mc,
                                     with_o1);
      },
      py::arg("Lambda"), py::arg("gammas"), py::arg("lattice"), py::arg("mc") = McConfig{},
      py::arg("with_o1_constant") = false,
      py::arg("insertions") = std::vector<std::tuple<double, double, double>>{});

  py::class_<KpzReport>(m, "KpzReport")
      .def_readonly("max_rel_dev", &KpzReport::max_rel_dev)
      .def_readonly("exponent_gap", &KpzReport::exponent_gap)
      .def_readonly("mu_roundtrip_rel", &KpzReport::mu_roundtrip_rel);
  m.def(
      "kpz_rescaling_identity",
      [](double gamma, const std::vector<double>& alphas,
         const std::vector<std::vector<int>>& sets, double L, const PyLattice& lat,
         std::uint64_t seed) {
        return kpz_rescaling_identity(gamma, alphas, sets, L, lat, {seed, 0});
      },
      py::arg("gamma"), py::arg("alphas"), py::arg("sets"), py::arg("L"),
      py::arg("lattice"), py::arg("seed") = 1);

  m.def("hminus1_norm",
        [](const PyLattice& lat, const Eigen::VectorXd& u, int jmax) {
          return hminus1_norm(lat, ScalarField(lat, u), jmax);
        },
        py::arg("lattice"), py::arg("u"), py::arg("jmax") = 64);
  m.def("h1_energy", [](const PyLattice& lat, const Eigen::VectorXd& u) {
    return h1_energy(lat, ScalarField(lat, u));
  });
}
