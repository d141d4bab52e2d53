#include "lft/io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>

#include "json.hpp"

namespace lft {

using json = nlohmann::ordered_json;

namespace {
constexpr char kMagic[4] = {'L', 'F', 'T', 'F'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

void write_field_csv(const std::string& path, const ScalarField& u) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  out << "node_index,x,y,value\n" << std::setprecision(17);
  for (std::size_t i = 0; i < u.lat->size(); ++i)
    out << i << ',' << u.lat->nodes[i].x() << ',' << u.lat->nodes[i].y() << ','
        << u.values[static_cast<Eigen::Index>(i)] << '\n';
}

void write_field_blob(const std::string& path, const ScalarField& u) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  out.write(kMagic, 4);
  const std::uint32_t ver = kVersion;
  out.write(reinterpret_cast<const char*>(&ver), sizeof ver);
  const double h = u.lat->h;
  out.write(reinterpret_cast<const char*>(&h), sizeof h);
  const std::uint64_t n = u.lat->size();
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  out.write(reinterpret_cast<const char*>(u.values.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
}

ScalarField read_field_blob(const std::string& path, const LatticePtr& lat) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw ConfigError("bad field blob magic in " + path);
  std::uint32_t ver = 0;
  in.read(reinterpret_cast<char*>(&ver), sizeof ver);
  if (ver != kVersion) throw ConfigError("unsupported field blob version");
  double h = 0.0;
  in.read(reinterpret_cast<char*>(&h), sizeof h);
  std::uint64_t n = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  if (std::abs(h - lat->h) > 1e-15 || n != lat->size())
    throw UsageError("field blob does not match the lattice");
  ScalarField u(lat);
  in.read(reinterpret_cast<char*>(u.values.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw ConfigError("truncated field blob: " + path);
  return u;
}

void write_measure_csv(const std::string& path, const ChaosMeasure& m) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  out << "x,y,weight\n" << std::setprecision(17);
  for (std::size_t i = 0; i < m.lat->size(); ++i)
    out << m.lat->nodes[i].x() << ',' << m.lat->nodes[i].y() << ','
        << m.weights[static_cast<Eigen::Index>(i)] << '\n';
}

void write_measure_summary(const std::string& path, const ChaosMeasure& m) {
  json j;
  j["total_mass"] = m.total_mass();
  j["gamma"] = m.gamma;
  j["background"] = m.background;
  j["h"] = m.lat->h;
  j["nodes"] = m.lat->size();
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
}

void write_sample(const std::string& base, const GffSample& s) {
  write_field_blob(base + ".lftf", s.field);
  json j;
  switch (s.kind) {
    case CutoffKind::exact: j["cutoff"] = "exact"; break;
    case CutoffKind::obe: j["cutoff"] = "obe"; break;
    case CutoffKind::circle_avg: j["cutoff"] = "circle_avg"; break;
    case CutoffKind::white_noise: j["cutoff"] = "white_noise"; break;
  }
  if (s.kind == CutoffKind::obe) j["n_modes"] = s.n_modes;
  if (s.kind == CutoffKind::circle_avg || s.kind == CutoffKind::white_noise)
    j["eps"] = s.eps;
  j["seed"] = s.key.seed;
  j["replica"] = s.key.replica;
  j["boundary_clipped"] = s.boundary_clipped;
  std::ofstream out(base + ".json");
  if (!out) throw ConfigError("cannot open for writing: " + base + ".json");
  out << j.dump(2) << "\n";
}

void write_spectral_data(const std::string& dir, const SpectralData& spec,
                         bool with_vectors) {
  json j;
  j["lambdas"] = std::vector<double>(spec.lambdas.data(),
                                     spec.lambdas.data() + spec.lambdas.size());
  j["weyl_slope"] = spec.weyl_slope;
  Eigen::MatrixXd gram = spec.lat->cell_area() * (spec.modes.transpose() *
                                                  spec.weight.asDiagonal() * spec.modes);
  j["orthonormality_residual"] =
      (gram - Eigen::MatrixXd::Identity(spec.count(), spec.count())).cwiseAbs().maxCoeff();
  j["count"] = spec.count();
  j["with_vectors"] = with_vectors;
  std::ofstream out(dir + "/spectral_index.json");
  if (!out) throw ConfigError("cannot open for writing: " + dir + "/spectral_index.json");
  out << j.dump(2) << "\n";
  if (with_vectors)
    for (int k = 0; k < spec.count(); ++k)
      write_field_blob(dir + "/eigvec_" + std::to_string(k) + ".lftf",
                       ScalarField(spec.lat, spec.modes.col(k)));
}

}  // namespace lft
