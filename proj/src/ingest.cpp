#include "sparta/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "sparta/error.hpp"

namespace sparta::ingest {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool parse_uint(std::string_view tok, index_t& out) {
  const auto* end = tok.data() + tok.size();
  auto [p, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc() && p == end;
}

bool parse_double(std::string_view tok, double& out) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  const auto* end = tok.data() + tok.size();
  auto [p, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc() && p == end;
}

std::string where(const std::string& source, std::size_t line_no) {
  return source + ":" + std::to_string(line_no) + ": ";
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

}  // namespace

std::string format_value(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, p);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";  // 'n' covers inf/nan
  return s;
}

// ---------------------------------------------------------------------------
// Matrix Market

CooTensor parse_matrix_market(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw IoError(source + ": empty file, expected %%MatrixMarket header");
  ++line_no;
  const auto header = split_ws(line);
  if (header.size() != 5 || lower(header[0]) != "%%matrixmarket") {
    throw IoError(where(source, line_no) + "missing %%MatrixMarket header");
  }
  if (lower(header[1]) != "matrix" || lower(header[2]) != "coordinate") {
    throw IoError(where(source, line_no) + "only 'matrix coordinate' files are supported");
  }
  const std::string field = lower(header[3]);
  const std::string symmetry = lower(header[4]);
  if (field != "real" && field != "integer" && field != "pattern") {
    throw IoError(where(source, line_no) + "unsupported field '" + std::string(header[3]) + "'");
  }
  if (symmetry != "general" && symmetry != "symmetric") {
    throw IoError(where(source, line_no) + "unsupported symmetry '" + std::string(header[4]) + "'");
  }
  const bool pattern = field == "pattern";
  const bool symmetric = symmetry == "symmetric";

  index_t rows = 0, cols = 0, declared = 0;
  bool have_size = false;
  std::vector<index_t> coords;
  std::vector<double> vals;
  index_t seen = 0;

  while (std::getline(in, line)) {
    ++line_no;
    const auto tok = split_ws(line);
    if (tok.empty() || tok[0].front() == '%') continue;
    if (!have_size) {
      if (tok.size() != 3 || !parse_uint(tok[0], rows) || !parse_uint(tok[1], cols) ||
          !parse_uint(tok[2], declared)) {
        throw IoError(where(source, line_no) + "expected size line 'M N NNZ'");
      }
      have_size = true;
      coords.reserve(declared * (symmetric ? 4 : 2));
      continue;
    }
    const std::size_t want = pattern ? 2 : 3;
    index_t i = 0, j = 0;
    double v = 1.0;
    if (tok.size() != want || !parse_uint(tok[0], i) || !parse_uint(tok[1], j) ||
        (!pattern && !parse_double(tok[2], v))) {
      throw IoError(where(source, line_no) + "malformed entry line");
    }
    if (i < 1 || i > rows || j < 1 || j > cols) {
      throw IoError(where(source, line_no) + "index (" + std::to_string(i) + "," +
                    std::to_string(j) + ") outside declared " + std::to_string(rows) + "x" +
                    std::to_string(cols));
    }
    ++seen;
    coords.push_back(i - 1);
    coords.push_back(j - 1);
    vals.push_back(v);
    if (symmetric && i != j) {
      coords.push_back(j - 1);
      coords.push_back(i - 1);
      vals.push_back(v);
    }
  }
  if (!have_size) throw IoError(source + ": missing size line");
  if (seen != declared) {
    throw IoError(source + ": header declares " + std::to_string(declared) + " entries, found " +
                  std::to_string(seen));
  }
  if (symmetric && rows != cols) throw IoError(source + ": symmetric matrix must be square");
  try {
    return CooTensor::from_entries({rows, cols}, std::move(coords), std::move(vals));
  } catch (const RuntimeError& e) {
    throw IoError(source + ": " + e.what());
  }
}

CooTensor read_matrix_market(const std::filesystem::path& path) {
  auto in = open_in(path);
  return parse_matrix_market(in, path.string());
}

// ---------------------------------------------------------------------------
// FROSTT

CooTensor parse_frostt(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t rank = 0;
  std::vector<index_t> declared;
  bool seen_data = false;
  bool seen_comment = false;
  std::vector<index_t> coords;
  std::vector<double> vals;
  std::vector<index_t> max_index;

  while (std::getline(in, line)) {
    ++line_no;
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok[0].front() == '#') {
      // Only the first comment line before any data may declare extents.
      if (!seen_data && !seen_comment) {
        std::string body = line.substr(line.find('#') + 1);
        const auto ext = split_ws(body);
        std::vector<index_t> parsed;
        bool all_int = !ext.empty();
        for (auto t : ext) {
          index_t e = 0;
          if (!parse_uint(t, e)) {
            all_int = false;
            break;
          }
          parsed.push_back(e);
        }
        if (all_int) declared = std::move(parsed);
      }
      seen_comment = true;
      continue;
    }
    if (!seen_data) {
      if (tok.size() < 2) throw IoError(where(source, line_no) + "need at least one index and a value");
      rank = tok.size() - 1;
      if (!declared.empty() && declared.size() != rank) {
        throw IoError(where(source, line_no) + "declared " + std::to_string(declared.size()) +
                      " extents but data has rank " + std::to_string(rank));
      }
      max_index.assign(rank, 0);
      seen_data = true;
    }
    if (tok.size() != rank + 1) {
      throw IoError(where(source, line_no) + "expected " + std::to_string(rank + 1) +
                    " tokens, found " + std::to_string(tok.size()));
    }
    for (std::size_t m = 0; m < rank; ++m) {
      index_t idx = 0;
      if (!parse_uint(tok[m], idx)) {
        throw IoError(where(source, line_no) + "non-numeric index '" + std::string(tok[m]) + "'");
      }
      if (idx < 1) throw IoError(where(source, line_no) + "indices are 1-based");
      if (!declared.empty() && idx > declared[m]) {
        throw IoError(where(source, line_no) + "index " + std::to_string(idx) +
                      " exceeds declared extent " + std::to_string(declared[m]));
      }
      max_index[m] = std::max(max_index[m], idx);
      coords.push_back(idx - 1);
    }
    double v = 0;
    if (!parse_double(tok[rank], v)) {
      throw IoError(where(source, line_no) + "non-numeric value '" + std::string(tok[rank]) + "'");
    }
    vals.push_back(v);
  }

  if (!seen_data) {
    if (declared.empty()) throw IoError(source + ": empty file");
    return CooTensor(declared);
  }
  return CooTensor::from_entries(declared.empty() ? max_index : declared, std::move(coords),
                                 std::move(vals));
}

CooTensor read_frostt(const std::filesystem::path& path) {
  auto in = open_in(path);
  return parse_frostt(in, path.string());
}

void write_coo(const CooTensor& t, std::ostream& out) {
  out << '#';
  for (index_t e : t.shape()) out << ' ' << e;
  out << '\n';
  for (std::size_t n = 0; n < t.nnz(); ++n) {
    for (index_t c : t.coord(n)) out << (c + 1) << ' ';
    out << format_value(t.vals()[n]) << '\n';
  }
}

void write_coo(const CooTensor& t, const std::filesystem::path& path) {
  auto out = open_out(path);
  write_coo(t, out);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

// ---------------------------------------------------------------------------
// dense text

void write_dense(std::span<const double> values, std::span<const index_t> shape,
                 std::ostream& out) {
  out << "# shape";
  index_t total = 1;
  for (index_t e : shape) {
    out << ' ' << e;
    total *= e;
  }
  out << '\n';
  if (values.size() != total) throw RuntimeError("dense value count does not match shape");
  const index_t inner = shape.empty() ? 1 : shape.back();
  if (inner == 0) return;
  for (index_t start = 0; start < total; start += inner) {
    for (index_t k = 0; k < inner; ++k) {
      if (k) out << ' ';
      out << format_value(values[start + k]);
    }
    out << '\n';
  }
}

void write_dense(std::span<const double> values, std::span<const index_t> shape,
                 const std::filesystem::path& path) {
  auto out = open_out(path);
  write_dense(values, shape, out);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

DenseText read_dense(const std::filesystem::path& path) {
  auto in = open_in(path);
  DenseText d;
  std::string line;
  bool have_shape = false;
  while (std::getline(in, line)) {
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok[0] == "#") {
      if (!have_shape && tok.size() >= 2 && tok[1] == "shape") {
        for (std::size_t i = 2; i < tok.size(); ++i) {
          index_t e = 0;
          if (!parse_uint(tok[i], e)) throw IoError(path.string() + ": bad shape line");
          d.shape.push_back(e);
        }
        have_shape = true;
      }
      continue;
    }
    for (auto t : tok) {
      double v = 0;
      if (!parse_double(t, v)) throw IoError(path.string() + ": bad value '" + std::string(t) + "'");
      d.values.push_back(v);
    }
  }
  if (!have_shape) throw IoError(path.string() + ": missing '# shape' line");
  index_t total = 1;
  for (index_t e : d.shape) total *= e;
  if (total != d.values.size()) throw IoError(path.string() + ": value count does not match shape");
  return d;
}

// ---------------------------------------------------------------------------
// level-format dump

void write_sptensor(const SpTensor& t, std::ostream& out) {
  auto list = [&](const std::vector<index_t>& v) {
    out << v.size();
    for (index_t x : v) out << ' ' << x;
    out << '\n';
  };
  out << "sptensor " << t.rank() << '\n';
  out << "shape";
  for (index_t e : t.shape()) out << ' ' << e;
  out << '\n';
  for (std::size_t l = 0; l < t.rank(); ++l) {
    const auto& ds = t.dims()[l];
    out << "level " << l << ' ' << to_string(ds.attr) << '\n';
    out << "pos ";
    list(ds.pos);
    out << "crd ";
    list(ds.crd);
  }
  out << "vals " << t.vals().size();
  for (double v : t.vals()) out << ' ' << format_value(v);
  out << '\n';
}

void write_sptensor(const SpTensor& t, const std::filesystem::path& path) {
  auto out = open_out(path);
  write_sptensor(t, out);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

SpTensor read_sptensor(const std::filesystem::path& path) {
  auto in = open_in(path);
  const std::string src = path.string();
  auto fail = [&](const std::string& what) { return IoError(src + ": " + what); };
  std::string word;
  std::size_t rank = 0;
  if (!(in >> word) || word != "sptensor" || !(in >> rank) || rank == 0) {
    throw fail("missing 'sptensor <rank>' header");
  }
  std::vector<index_t> shape(rank);
  if (!(in >> word) || word != "shape") throw fail("missing shape");
  for (auto& e : shape) {
    if (!(in >> e)) throw fail("bad shape");
  }
  auto read_list = [&](const char* key) {
    std::vector<index_t> v;
    std::size_t n = 0;
    if (!(in >> word) || word != key || !(in >> n)) throw fail(std::string("missing ") + key);
    v.resize(n);
    for (auto& x : v) {
      if (!(in >> x)) throw fail(std::string("bad ") + key + " entry");
    }
    return v;
  };
  std::vector<DimStorage> dims;
  for (std::size_t l = 0; l < rank; ++l) {
    std::size_t level = 0;
    std::string attr;
    if (!(in >> word) || word != "level" || !(in >> level >> attr) || level != l) {
      throw fail("missing level " + std::to_string(l));
    }
    DimStorage ds;
    try {
      ds.attr = parse_attr(attr);
    } catch (const SemanticError& e) {
      throw fail(e.what());
    }
    ds.pos = read_list("pos");
    ds.crd = read_list("crd");
    dims.push_back(std::move(ds));
  }
  std::size_t nvals = 0;
  if (!(in >> word) || word != "vals" || !(in >> nvals)) throw fail("missing vals");
  std::vector<double> vals(nvals);
  for (auto& v : vals) {
    std::string tok;
    if (!(in >> tok) || !parse_double(tok, v)) throw fail("bad value");
  }
  SpTensor t(std::move(shape), std::move(dims), std::move(vals));
  const auto violations = validate(t);
  if (!violations.empty()) throw fail(violations.front().message);
  return t;
}

// ---------------------------------------------------------------------------

CooTensor make_banded(index_t n, index_t nnz) {
  if (n == 0) return CooTensor({0, 0});
  const index_t per_row = std::clamp<index_t>(nnz / n, 1, n);
  const index_t half = per_row / 2;
  std::vector<index_t> coords;
  std::vector<double> vals;
  coords.reserve(n * per_row * 2);
  vals.reserve(n * per_row);
  for (index_t i = 0; i < n; ++i) {
    index_t start = i >= half ? i - half : 0;
    if (start + per_row > n) start = n - per_row;
    for (index_t k = 0; k < per_row; ++k) {
      const index_t j = start + k;
      coords.push_back(i);
      coords.push_back(j);
      vals.push_back(1.0 + static_cast<double>((i + 3 * j) % 7) * 0.125);
    }
  }
  return CooTensor::from_entries({n, n}, std::move(coords), std::move(vals));
}

CooTensor read_any(const std::string& path_or_spec) {
  if (path_or_spec.rfind("synth:", 0) == 0) {
    // synth:banded:N:NNZ
    std::vector<std::string> parts;
    std::stringstream ss(path_or_spec);
    std::string part;
    while (std::getline(ss, part, ':')) parts.push_back(part);
    index_t n = 0, nnz = 0;
    if (parts.size() != 4 || parts[1] != "banded" || !parse_uint(parts[2], n) ||
        !parse_uint(parts[3], nnz)) {
      throw IoError("bad synthetic input '" + path_or_spec + "', expected synth:banded:N:NNZ");
    }
    return make_banded(n, nnz);
  }
  const std::filesystem::path path(path_or_spec);
  const std::string ext = lower(path.extension().string());
  if (ext == ".mtx") return read_matrix_market(path);
  if (ext == ".spt") return decompress(read_sptensor(path));
  return read_frostt(path);
}

}  // namespace sparta::ingest
