#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "sparta/error.hpp"
#include "sparta/ingest.hpp"
#include "test_util.hpp"

using namespace sparta;
using namespace sparta::ingest;
using V = std::vector<index_t>;
using testutil::data_path;

namespace {

CooTensor mm(const std::string& text) {
  std::istringstream in(text);
  return parse_matrix_market(in);
}

CooTensor tns(const std::string& text) {
  std::istringstream in(text);
  return parse_frostt(in);
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "sparta_unit_ingest";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_SUITE("ingest") {
  TEST_CASE("matrix market corpus") {
    const auto m4 = read_matrix_market(data_path("m4.mtx"));
    CHECK(m4.shape() == V{4, 4});
    CHECK(m4.coords() == V{0, 0, 0, 3, 2, 0, 2, 2});
    CHECK(m4.vals() == std::vector<double>{1, 2, 3, 4});

    const auto integer = read_matrix_market(data_path("integer.mtx"));
    CHECK(integer.shape() == V{3, 2});
    CHECK(integer.vals() == std::vector<double>{5, -3, 7});

    const auto sym = read_matrix_market(data_path("symmetric.mtx"));
    CHECK(sym.nnz() == 6);
    CHECK(sym.coords() == V{0, 0, 0, 1, 1, 0, 1, 2, 2, 1, 2, 2});
    CHECK(sym.vals() == std::vector<double>{2.0, 1.5, 1.5, -1.0, -1.0, 4.0});

    const auto pat = read_matrix_market(data_path("pattern.mtx"));
    CHECK(pat.shape() == V{3, 4});
    CHECK(pat.vals() == std::vector<double>{1, 1, 1});

    const auto psym = read_matrix_market(data_path("pattern_symmetric.mtx"));
    CHECK(psym.coords() == V{0, 0, 0, 1, 1, 0, 1, 2, 2, 1});

    const auto empty = read_matrix_market(data_path("empty.mtx"));
    CHECK(empty.shape() == V{5, 3});
    CHECK(empty.nnz() == 0);

    const auto dup = read_matrix_market(data_path("duplicates.mtx"));
    CHECK(dup.coords() == V{0, 0, 1, 1});
    CHECK(dup.vals() == std::vector<double>{1.5, 0.0});

    const auto com = read_matrix_market(data_path("comments.mtx"));
    CHECK(com.shape() == V{2, 3});
    CHECK(com.coords() == V{0, 2, 1, 0});
    CHECK(com.vals() == std::vector<double>{6.25, -0.5});
  }

  TEST_CASE("a symmetric off-diagonal entry appears twice") {
    const auto t = mm("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n2 1 5.0\n");
    CHECK(t.coords() == V{0, 1, 1, 0});
    CHECK(t.vals() == std::vector<double>{5.0, 5.0});
  }

  TEST_CASE("matrix market errors") {
    CHECK_THROWS_AS(mm(""), IoError);
    CHECK_THROWS_AS(mm("%%MatrixMarket matrix array real general\n2 2\n"), IoError);
    CHECK_THROWS_AS(mm("%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n"), IoError);
    CHECK_THROWS_AS(mm("%%MatrixMarket matrix coordinate real hermitian\n1 1 0\n"), IoError);
    CHECK_THROWS_AS(mm("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n"), IoError);
    CHECK_THROWS_AS(mm("%%MatrixMarket matrix coordinate real general\n2 2 1\n0 1 1.0\n"), IoError);
    CHECK_THROWS_AS(mm("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n"), IoError);
    CHECK_THROWS_AS(mm("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 x 1.0\n"), IoError);
    CHECK_THROWS_AS(mm("%%MatrixMarket matrix coordinate real symmetric\n2 3 0\n"), IoError);
    CHECK_THROWS_AS(mm("not a header\n"), IoError);
    CHECK_THROWS_AS(read_matrix_market(data_path("missing.mtx")), IoError);
  }

  TEST_CASE("frostt corpus") {
    const auto t3 = read_frostt(data_path("t3.tns"));
    CHECK(t3.shape() == V{3, 4, 3});
    CHECK(t3.coords() == V{0, 0, 0, 0, 1, 2, 1, 0, 1, 2, 3, 0});

    const auto dup = read_frostt(data_path("t3_dup.tns"));
    CHECK(dup.coords() == V{0, 0, 0, 0, 1, 0, 1, 1, 1});
    CHECK(dup.vals() == std::vector<double>{1.25, 5.0, 3.0});

    const auto hdr = read_frostt(data_path("t3_header.tns"));
    CHECK(hdr.shape() == V{4, 4, 3});
    CHECK(hdr.vals() == std::vector<double>{1.5, -2.0});

    const auto t4 = read_frostt(data_path("t4.tns"));
    CHECK(t4.rank() == 4);
    CHECK(t4.shape() == V{2, 2, 3, 2});
  }

  TEST_CASE("frostt errors and edge cases") {
    CHECK_THROWS_AS(tns("1 1 1.0\n1 1 1 2.0\n"), IoError);
    CHECK_THROWS_AS(tns("0 1 1.0\n"), IoError);
    CHECK_THROWS_AS(tns("1 a 1.0\n"), IoError);
    CHECK_THROWS_AS(tns("1 1 abc\n"), IoError);
    CHECK_THROWS_AS(tns("# only a comment\n"), IoError);
    CHECK_THROWS_AS(tns("# 2 2\n3 1 1.0\n"), IoError);
    CHECK_THROWS_AS(tns("# 2 2\n1 1 1 1.0\n"), IoError);
    const auto declared_only = tns("# 2 5\n");
    CHECK(declared_only.shape() == V{2, 5});
    CHECK(declared_only.nnz() == 0);
  }

  TEST_CASE("write_coo is 1-based with an extents line") {
    const auto t = CooTensor::from_entries({2, 2, 2}, {0, 0, 0, 1, 1, 1}, {1.0, 0.5});
    std::ostringstream out;
    write_coo(t, out);
    CHECK(out.str() == "# 2 2 2\n1 1 1 1.0\n2 2 2 0.5\n");
  }

  TEST_CASE("format_value round trips") {
    CHECK(format_value(1.0) == "1.0");
    CHECK(format_value(0.25) == "0.25");
    CHECK(format_value(-3.0) == "-3.0");
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
      const double v = u(rng) * std::pow(10.0, i % 40 - 20);
      CHECK(std::stod(format_value(v)) == v);
    }
  }

  TEST_CASE("property: coo, dense and level-dump text round trips") {
    std::mt19937_64 rng(21);
    for (int n = 0; n < 60; ++n) {
      const std::size_t rank = 1 + static_cast<std::size_t>(n % 4);
      const auto t = testutil::random_coo(rng, testutil::random_shape(rng, rank, 5), 0.3);

      const auto coo_path = scratch("t.tns");
      write_coo(t, coo_path);
      CHECK(read_frostt(coo_path) == t);

      const auto dense = testutil::to_dense(t);
      const auto dense_path = scratch("t.txt");
      write_dense(dense.values, dense.shape, dense_path);
      const auto back = read_dense(dense_path);
      CHECK(back.shape == dense.shape);
      CHECK(testutil::bitwise_equal(back.values, dense.values));

      if (rank >= 2) {
        const auto spt_path = scratch("t.spt");
        const SpTensor sp = compress(t, preset_attrs("CSF", rank));
        write_sptensor(sp, spt_path);
        CHECK(read_sptensor(spt_path) == sp);
        CHECK(read_any(spt_path.string()) == t);
      }
    }
  }

  TEST_CASE("level dump rejects broken structure") {
    const auto path = scratch("bad.spt");
    {
      std::ofstream out(path);
      out << "garbage\n";
    }
    CHECK_THROWS_AS(read_sptensor(path), IoError);
  }

  TEST_CASE("read_any dispatch and synthetic banded input") {
    CHECK(read_any(data_path("m4.mtx")).nnz() == 4);
    CHECK(read_any(data_path("t3.tns")).rank() == 3);
    const auto b = read_any("synth:banded:100:500");
    CHECK(b.shape() == V{100, 100});
    CHECK(b.nnz() == 500);
    CHECK(b == make_banded(100, 500));
    for (std::size_t n = 0; n < b.nnz(); ++n) {
      const auto c = b.coord(n);
      const auto d = c[0] > c[1] ? c[0] - c[1] : c[1] - c[0];
      CHECK(d <= 5);
    }
    CHECK_THROWS_AS(read_any("synth:banded:x:1"), IoError);
    CHECK_THROWS_AS(read_any("synth:random:4:4"), IoError);
  }
}
