#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "sparta/dsl.hpp"
#include "sparta/exec.hpp"
#include "sparta/ingest.hpp"
#include "sparta/kernels.hpp"
#include "test_util.hpp"

using namespace sparta;
using namespace sparta::exec;
using kernels::Kernel;
using enum FormatAttr;
using A = std::vector<FormatAttr>;
using L = std::vector<std::string>;

namespace {

CooTensor m4() { return ingest::read_matrix_market(testutil::data_path("m4.mtx")); }

SpTensor dense_of(const DenseArray& d) { return SpTensor::dense(d.shape, d.values); }

SpTensor ones(std::vector<index_t> shape) {
  std::size_t n = 1;
  for (auto e : shape) n *= e;
  return SpTensor::dense(std::move(shape), std::vector<double>(n, 1.0));
}

std::map<std::string, SpTensor> run_source(const std::string& src, const ProgramOptions& base = {}) {
  ProgramOptions opts = base;
  if (opts.base_dir.empty()) opts.base_dir = SPARTA_TEST_DATA;
  return run_program(ir::lower_ast(dsl::parse(src)), opts);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// Labels of each kernel's operands, for the brute-force oracle.
std::array<L, 3> kernel_labels(Kernel k, std::size_t mode) {
  const L a = kernels::sparse_rank(k) == 2 ? L{"i", "j"} : L{"i", "j", "k"};
  L others;
  for (std::size_t d = 0; d < a.size(); ++d) {
    if (d != mode) others.push_back(a[d]);
  }
  switch (k) {
    case Kernel::SpMV: return {a, L{"j"}, L{"i"}};
    case Kernel::SpMM: return {a, L{"j", "k"}, L{"i", "k"}};
    case Kernel::TTV: return {a, L{a[mode]}, others};
    case Kernel::TTM: others.push_back("r"); return {a, L{a[mode], "r"}, others};
  }
  return {};
}

const std::vector<A> kRank2 = {{D, D}, {D, CU}, {CU, CU}, {CN, S}, {CU, D}, {CN, CU}, {CN, D}};
const std::vector<A> kRank3 = {{D, D, D}, {CU, CU, CU}, {CN, S, S}, {CN, S, D}, {D, CU, D}, {D, D, CU}, {CN, CU, CU}};

}  // namespace

TEST_SUITE("exec") {
  TEST_CASE("default grain") {
    CHECK(default_grain(100, 4) == 3);
    CHECK(default_grain(5, 8) == 1);
    CHECK(default_grain(0, 1) == 1);
    CHECK(default_grain(1000, 1) == 125);
  }

  TEST_CASE("M4 products") {
    const SpTensor a = compress(m4(), preset_attrs("CSR", 2));
    const auto spmm = kernels::run_kernel(Kernel::SpMM, a, ones({4, 2}), {});
    CHECK(spmm.shape == std::vector<index_t>{4, 2});
    CHECK(spmm.values == std::vector<double>{3, 3, 0, 0, 7, 7, 0, 0});
    const auto spmv = kernels::run_kernel(Kernel::SpMV, a, ones({4}), {});
    CHECK(spmv.values == std::vector<double>{3, 0, 7, 0});
    for (const char* f : {"COO", "DCSR", "Dense", "ModeGeneric"}) {
      const auto r = kernels::run_kernel(Kernel::SpMV, compress(m4(), preset_attrs(f, 2)), ones({4}), {});
      CHECK(r.values == std::vector<double>{3, 0, 7, 0});
    }
  }

  TEST_CASE("an empty matrix gives zeros") {
    const auto e = ingest::read_matrix_market(testutil::data_path("empty.mtx"));
    for (const char* f : {"CSR", "COO", "DCSR"}) {
      const auto r = kernels::run_kernel(Kernel::SpMV, compress(e, preset_attrs(f, 2)), ones({3}), {});
      CHECK(r.values == std::vector<double>(5, 0.0));
    }
  }

  TEST_CASE("dense oracle on small hand cases") {
    const DenseArray a{{2, 2}, {1, 2, 3, 4}};
    CHECK(kernels::dense_oracle(Kernel::SpMV, a, {{2}, {1, 1}}).values == std::vector<double>{3, 7});
    CHECK(kernels::dense_oracle(Kernel::SpMM, a, {{2, 1}, {1, 2}}).values == std::vector<double>{5, 11});
    const DenseArray t{{2, 2, 2}, {1, 2, 3, 4, 5, 6, 7, 8}};
    // contract mode 0: C[j,k] = t[0,j,k] + t[1,j,k]
    CHECK(kernels::dense_oracle(Kernel::TTV, t, {{2}, {1, 1}}, 0).values == std::vector<double>{6, 8, 10, 12});
    CHECK(kernels::dense_oracle(Kernel::TTV, t, {{2}, {1, 0}}, 2).values == std::vector<double>{1, 3, 5, 7});
    CHECK(kernels::dense_oracle(Kernel::TTM, t, {{2, 1}, {1, 1}}, 1).values == std::vector<double>{4, 6, 12, 14});
    CHECK_THROWS_AS(kernels::dense_oracle(Kernel::SpMV, a, {{3}, {1, 1, 1}}), RuntimeError);
  }

  TEST_CASE("property: every kernel and format matches a brute-force einsum") {
    std::mt19937_64 rng(31);
    for (auto k : kernels::kAllKernels) {
      const std::size_t rank = kernels::sparse_rank(k);
      const auto& lists = rank == 2 ? kRank2 : kRank3;
      for (int n = 0; n < 12; ++n) {
        const auto coo = testutil::random_coo(rng, testutil::random_shape(rng, rank, 7), 0.05 * (n % 8));
        const std::size_t mode = rank == 2 ? 2 : static_cast<std::size_t>(n % 3);
        const auto b = testutil::random_dense(rng, kernels::dense_operand_shape(k, coo.shape(), 3, mode));
        const auto a = testutil::to_dense(coo);
        const auto lab = kernel_labels(k, mode);
        const auto expect = testutil::einsum(lab[2], {lab[0], &a}, {lab[1], &b});
        CHECK(testutil::max_rel_error(kernels::dense_oracle(k, a, b, mode).values, expect.values) < 1e-12);
        for (const auto& attrs : lists) {
          const auto got = kernels::run_kernel(k, compress(coo, attrs), dense_of(b), {}, mode);
          CHECK(got.shape == expect.shape);
          CHECK(testutil::max_rel_error(got.values, expect.values) < 1e-12);
        }
      }
    }
  }

  TEST_CASE("property: parallel runs are bitwise identical to sequential") {
    std::mt19937_64 rng(41);
    std::uniform_int_distribution<std::size_t> grain(0, 9);
    for (auto k : kernels::kAllKernels) {
      const std::size_t rank = kernels::sparse_rank(k);
      for (const auto& attrs : rank == 2 ? kRank2 : kRank3) {
        const auto coo = testutil::random_coo(rng, testutil::random_shape(rng, rank, 12), 0.2);
        const auto b = testutil::random_dense(rng, kernels::dense_operand_shape(k, coo.shape(), 4, 2));
        const auto prepared = kernels::prepare(k, compress(coo, attrs), dense_of(b));
        const auto seq = prepared.run({});
        for (std::size_t w = 1; w <= 16; w += 3) {
          const auto par = prepared.run({Mode::Parallel, w, grain(rng)});
          CHECK(testutil::bitwise_equal(par.values, seq.values));
        }
      }
    }
  }

  TEST_CASE("parallel eligibility follows the outer index") {
    auto nest = [](Kernel k, A attrs, std::size_t mode) {
      const auto op = kernels::make_op(k, attrs, mode);
      return codegen::generate(ir::build_schedule(op), op);
    };
    CHECK(parallel_eligible(nest(Kernel::SpMM, {D, CU}, 2)));
    CHECK(parallel_eligible(nest(Kernel::TTV, {CU, CU, CU}, 2)));
    CHECK_FALSE(parallel_eligible(nest(Kernel::TTV, {CU, CU, CU}, 0)));
    // falls back to the sequential path and still agrees
    std::mt19937_64 rng(2);
    const auto coo = testutil::random_coo(rng, {6, 5, 4}, 0.3);
    const auto v = testutil::random_dense(rng, {6});
    const auto p = kernels::prepare(Kernel::TTV, compress(coo, preset_attrs("CSF", 3)), dense_of(v), 0);
    CHECK(testutil::bitwise_equal(p.run({Mode::Parallel, 4, 1}).values, p.run({}).values));
  }

  TEST_CASE("binding rejects malformed and mismatched operands") {
    Binding b;
    auto dims = compress(m4(), preset_attrs("CSR", 2)).dims();
    dims[1].pos = {0, 2, 2, 4};
    CHECK_THROWS_AS(b.bind("A", SpTensor({4, 4}, dims, {1, 2, 3, 4})), RuntimeError);
    CHECK_THROWS_AS(b.bind("A", std::shared_ptr<const SpTensor>()), RuntimeError);

    const SpTensor a = compress(m4(), preset_attrs("CSR", 2));
    CHECK_THROWS_AS(kernels::run_kernel(Kernel::SpMV, a, ones({5}), {}), RuntimeError);
    const auto op = kernels::make_op(Kernel::SpMV, A{D, CU});
    const auto nest = codegen::generate(ir::build_schedule(op), op);
    Binding partial;
    partial.bind("A", a);
    CHECK(partial.find("A") != nullptr);
    CHECK(partial.find("x") == nullptr);
    CHECK_THROWS_AS(run(nest, partial, {}), RuntimeError);
    Binding wrong_format;
    wrong_format.bind("A", compress(m4(), preset_attrs("COO", 2)));
    wrong_format.bind("x", ones({4}));
    CHECK_THROWS_AS(run(nest, wrong_format, {}), RuntimeError);
  }

  TEST_CASE("the example program") {
    const auto out = run_source(read_text(testutil::data_path("spmm_example.ta")));
    REQUIRE(out.contains("C"));
    const auto& c = out.at("C");
    CHECK(c.shape() == std::vector<index_t>{4, 32});
    for (index_t i = 0; i < 4; ++i) {
      const double want = i == 0 ? 3.0 : i == 2 ? 7.0 : 0.0;
      for (index_t k = 0; k < 32; ++k) CHECK(c.vals()[i * 32 + k] == want);
    }
    CHECK(out.at("A").attrs() == A{D, CU});
    CHECK(out.at("B").vals() == std::vector<double>(128, 1.0));
  }

  TEST_CASE("programs with fills only") {
    const auto out = run_source(
        "def main() {\n IndexLabel [i] = [2];\n IndexLabel [j] = [3];\n"
        " Tensor<double> X([i,j], Dense);\n Tensor<double> Y([i,j], COO);\n"
        " X[i,j] = 2.5;\n Y[i,j] = 1.0;\n}\n");
    CHECK(out.at("X").vals() == std::vector<double>(6, 2.5));
    CHECK(decompress(out.at("Y")).nnz() == 6);
  }

  TEST_CASE("a fill needs known extents") {
    CHECK_THROWS_AS(run_source("def main() {\n IndexLabel [i] = [?];\n Tensor<double> X([i], Dense);\n"
                               " X[i] = 1.0;\n}\n"),
                    RuntimeError);
  }

  TEST_CASE("a static extent that disagrees with the file is an error") {
    auto src = read_text(testutil::data_path("spmm_example.ta"));
    src.replace(src.find("[a] = [?]"), 9, "[a] = [5]");
    CHECK_THROWS_AS(run_source(src), RuntimeError);
  }

  TEST_CASE("products accumulate into the existing output") {
    auto src = read_text(testutil::data_path("spmm_example.ta"));
    src.replace(src.find("C[a,c] = 0.0"), 12, "C[a,c] = 1.5");
    const auto c = run_source(src).at("C");
    CHECK(c.vals()[0] == 4.5);
    CHECK(c.vals()[32] == 1.5);
    CHECK(c.vals()[64] == 8.5);
  }

  TEST_CASE("property: reordering does not change program results") {
    std::mt19937_64 rng(51);
    const auto dir = std::filesystem::temp_directory_path() / "sparta_unit_exec";
    std::filesystem::create_directories(dir);
    for (int n = 0; n < 20; ++n) {
      const auto coo = testutil::random_coo(rng, testutil::random_shape(rng, 2, 20), 0.15);
      {
        std::ofstream mtx(dir / "r.mtx");
        mtx << "%%MatrixMarket matrix coordinate real general\n"
            << coo.shape()[0] << ' ' << coo.shape()[1] << ' ' << coo.nnz() << '\n';
        for (std::size_t e = 0; e < coo.nnz(); ++e) {
          mtx << coo.coord(e)[0] + 1 << ' ' << coo.coord(e)[1] + 1 << ' ' << ingest::format_value(coo.vals()[e])
              << '\n';
        }
      }
      auto src = read_text(testutil::data_path("spmm_example.ta"));
      src.replace(src.find("m4.mtx"), 6, "r.mtx");
      src.replace(src.find("B[b,c] = 1.0"), 12, "B[b,c] = 0.5");
      ProgramOptions plain;
      plain.base_dir = dir;
      ProgramOptions reordered = plain;
      reordered.reorder = true;
      const auto x = run_source(src, plain);
      const auto y = run_source(src, reordered);
      CHECK(decompress(y.at("A")) == coo);
      CHECK(y.at("C").shape() == x.at("C").shape());
      CHECK(testutil::max_rel_error(y.at("C").vals(), x.at("C").vals()) < 1e-12);
    }
  }
}
