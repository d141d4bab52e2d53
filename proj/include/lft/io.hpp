#pragma once

#include <string>

#include "lft/chaos.hpp"
#include "lft/lattice.hpp"
#include "lft/spectra.hpp"

namespace lft {

// CSV: header "node_index,x,y,value", one row per interior node
void write_field_csv(const std::string& path, const ScalarField& u);

// binary blob: magic "LFTF", u32 version (1), f64 spacing h, u64 node count,
// then count little-endian f64 values in node-index order
void write_field_blob(const std::string& path, const ScalarField& u);
ScalarField read_field_blob(const std::string& path, const LatticePtr& lat);

// CSV: header "x,y,weight"
void write_measure_csv(const std::string& path, const ChaosMeasure& m);

// JSON summary: total mass, gamma, background
void write_measure_summary(const std::string& path, const ChaosMeasure& m);

// field blob at <base>.lftf plus a JSON sidecar <base>.json recording the
// cutoff kind, eps or mode count, and the seed metadata
void write_sample(const std::string& base, const GffSample& s);

// one field blob per eigenvector under <dir>/eigvec_<j>.lftf plus an index
// JSON with the eigenvalue list, orthonormality residual, and Weyl fit
void write_spectral_data(const std::string& dir, const SpectralData& spec,
                         bool with_vectors = true);

}  // namespace lft
