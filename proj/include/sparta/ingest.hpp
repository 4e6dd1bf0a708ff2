#pragma once

#include <filesystem>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "sparta/storage.hpp"

namespace sparta::ingest {

/// `%%MatrixMarket matrix coordinate {real|integer|pattern} {general|symmetric}`.
/// Indices are converted to 0-based, symmetric files are mirrored, pattern
/// entries get value 1.0, and duplicates are summed.
CooTensor read_matrix_market(const std::filesystem::path& path);
CooTensor parse_matrix_market(std::istream& in, const std::string& source = "<stream>");

/// FROSTT text: `#` comments, lines of 1-based indices followed by a value.
/// An initial comment holding only integers declares the extents; otherwise
/// each extent is the largest index seen in that mode.
CooTensor read_frostt(const std::filesystem::path& path);
CooTensor parse_frostt(std::istream& in, const std::string& source = "<stream>");

/// FROSTT text with a leading `# e1 e2 ...` extents line, so that
/// read_frostt(write_coo(t)) == t even when trailing slices are empty.
void write_coo(const CooTensor& t, const std::filesystem::path& path);
void write_coo(const CooTensor& t, std::ostream& out);

/// Row-major dense text: a `# shape e1 e2 ...` line, then one line per
/// innermost fiber.
void write_dense(std::span<const double> values, std::span<const index_t> shape,
                 const std::filesystem::path& path);
void write_dense(std::span<const double> values, std::span<const index_t> shape,
                 std::ostream& out);

struct DenseText {
  std::vector<index_t> shape;
  std::vector<double> values;
};
DenseText read_dense(const std::filesystem::path& path);

/// Level-format dump of an SpTensor (attrs, pos/crd per level, vals).
void write_sptensor(const SpTensor& t, const std::filesystem::path& path);
void write_sptensor(const SpTensor& t, std::ostream& out);
SpTensor read_sptensor(const std::filesystem::path& path);

/// Dispatches on the file extension: .mtx Matrix Market, .spt level dump
/// (decompressed), anything else FROSTT. `synth:banded:N:NNZ` builds a
/// synthetic banded matrix instead of reading a file.
CooTensor read_any(const std::string& path_or_spec);

/// N x N matrix with roughly `nnz` entries clustered in a band around the
/// diagonal. Values are deterministic.
CooTensor make_banded(index_t n, index_t nnz);

/// Shortest text form of `v` that parses back exactly; always contains a
/// decimal point or exponent ("1.0", "0.25", "1e-300").
std::string format_value(double v);

}  // namespace sparta::ingest
