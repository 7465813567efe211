#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>

#include "mappfn/common.hpp"
#include "mappfn/data/dataset.hpp"

namespace mappfn::data {

/// Binary matrix file layout (all fields little-endian):
///
///   bytes 0..7   magic "MPFNMAT\x01"
///   uint32       d      (columns / genes)
///   uint32       n      (rows / cells)
///   uint32       kind   (0 observational, 1 interventional)
///   int32        target (hot index of the treatment, -1 if observational)
///   float32[d]   treatment code
///   float32[n*d] values, row-major
inline constexpr std::array<char, 8> kMatrixMagic{'M', 'P', 'F', 'N', 'M', 'A', 'T', '\x01'};

struct MatrixFile {
  std::uint32_t kind = 0;
  std::int32_t target = kObservationalTreatment;
  Vector treatment_code;
  Matrix values;
};

void write_matrix_file(const std::filesystem::path& path, const MatrixFile& file);
MatrixFile read_matrix_file(const std::filesystem::path& path);

/// Writes one binary file per batch plus `manifest.json` listing every
/// (context, treatment, file, seed) entry. Contexts are written in order, so the
/// output bytes depend only on the dataset contents.
void write_dataset(const std::filesystem::path& dir, const Dataset& dataset);
Dataset read_dataset(const std::filesystem::path& dir);

}  // namespace mappfn::data
