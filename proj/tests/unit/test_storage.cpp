#include <doctest.h>

#include <random>

#include "sparta/error.hpp"
#include "sparta/storage.hpp"
#include "test_util.hpp"

using namespace sparta;
using V = std::vector<index_t>;
using enum FormatAttr;

namespace {

CooTensor m4() { return CooTensor::from_entries({4, 4}, {0, 0, 0, 3, 2, 0, 2, 2}, {1.0, 2.0, 3.0, 4.0}); }

bool has_kind(const std::vector<Violation>& vs, ViolationKind k) {
  for (const auto& v : vs) {
    if (v.kind == k) return true;
  }
  return false;
}

}  // namespace

TEST_SUITE("storage") {
  TEST_CASE("attribute names and presets") {
    CHECK(parse_attr("CU") == CU);
    CHECK(to_string(S) == "S");
    CHECK_THROWS_AS(parse_attr("X"), SemanticError);
    CHECK(format_attrs(std::vector<FormatAttr>{D, CU}) == "{D,CU}");

    CHECK(preset_attrs("csr", 2) == std::vector<FormatAttr>{D, CU});
    CHECK(preset_attrs("DCSR", 2) == std::vector<FormatAttr>{CU, CU});
    CHECK(preset_attrs("COO", 3) == std::vector<FormatAttr>{CN, S, S});
    CHECK(preset_attrs("CSF", 3) == std::vector<FormatAttr>{CU, CU, CU});
    CHECK(preset_attrs("ModeGeneric", 3) == std::vector<FormatAttr>{CN, S, D});
    CHECK(preset_attrs("Dense", 2) == std::vector<FormatAttr>{D, D});
    CHECK_THROWS_AS(preset_attrs("CSR", 3), SemanticError);
    CHECK_THROWS_AS(preset_attrs("ELL", 2), SemanticError);
  }

  TEST_CASE("attribute chains") {
    CHECK_NOTHROW(check_attr_chain(std::vector<FormatAttr>{CU, S, D}, 3));
    CHECK_THROWS_AS(check_attr_chain(std::vector<FormatAttr>{S, D}, 2), SemanticError);
    CHECK_THROWS_AS(check_attr_chain(std::vector<FormatAttr>{D, S}, 2), SemanticError);
    CHECK_THROWS_AS(check_attr_chain(std::vector<FormatAttr>{D, CN}, 2), SemanticError);
    CHECK_THROWS_AS(check_attr_chain(std::vector<FormatAttr>{D}, 2), SemanticError);
  }

  TEST_CASE("from_entries sorts, sums duplicates and checks bounds") {
    const auto t = CooTensor::from_entries({3, 3}, {2, 1, 0, 0, 2, 1}, {1.0, 2.0, 0.5});
    CHECK(t.coords() == V{0, 0, 2, 1});
    CHECK(t.vals() == std::vector<double>{2.0, 1.5});
    CHECK_THROWS_AS(CooTensor::from_entries({2, 2}, {2, 0}, {1.0}), RuntimeError);
  }

  TEST_CASE("M4 as CSR") {
    const SpTensor sp = compress(m4(), preset_attrs("CSR", 2));
    CHECK(sp.dim(0).pos == V{4});
    CHECK(sp.dim(1).pos == V{0, 2, 2, 4, 4});  // one entry per row plus one
    CHECK(sp.dim(1).crd == V{0, 3, 0, 2});
    CHECK(sp.vals() == std::vector<double>{1, 2, 3, 4});
    CHECK(validate(sp).empty());
    CHECK(decompress(sp) == m4());
  }

  TEST_CASE("M4 as DCSR") {
    const SpTensor sp = compress(m4(), preset_attrs("DCSR", 2));
    CHECK(sp.dim(0).pos == V{0, 2});
    CHECK(sp.dim(0).crd == V{0, 2});
    CHECK(sp.dim(1).pos == V{0, 2, 4});
    CHECK(sp.dim(1).crd == V{0, 3, 0, 2});
    CHECK(sp.vals() == std::vector<double>{1, 2, 3, 4});
    CHECK(decompress(sp) == m4());
  }

  TEST_CASE("M4 as COO and Dense") {
    const SpTensor coo = compress(m4(), preset_attrs("COO", 2));
    CHECK(coo.dim(0).pos == V{0, 4});
    CHECK(coo.dim(0).crd == V{0, 0, 2, 2});
    CHECK(coo.dim(1).pos.empty());
    CHECK(coo.dim(1).crd == V{0, 3, 0, 2});

    const SpTensor dense = compress(m4(), preset_attrs("Dense", 2));
    CHECK(dense.is_dense());
    CHECK(dense.vals() == std::vector<double>{1, 0, 0, 2, 0, 0, 0, 0, 3, 0, 4, 0, 0, 0, 0, 0});
    CHECK(decompress(dense) == m4());
  }

  TEST_CASE("mode-generic keeps a dense trailing block") {
    const auto t = CooTensor::from_entries({2, 2, 3}, {0, 1, 0, 0, 1, 2, 1, 0, 1}, {1.0, 2.0, 3.0});
    const SpTensor sp = compress(t, preset_attrs("ModeGeneric", 3));
    CHECK(sp.dim(0).pos == V{0, 2});
    CHECK(sp.dim(0).crd == V{0, 1});
    CHECK(sp.dim(1).crd == V{1, 0});
    CHECK(sp.dim(2).pos == V{3});
    CHECK(sp.vals() == std::vector<double>{1, 0, 2, 0, 3, 0});
    CHECK(level_position_counts(sp) == std::vector<std::size_t>{1, 2, 2, 6});
    CHECK(decompress(sp) == t);
  }

  TEST_CASE("CU followed by S needs one tail per coordinate") {
    const auto t = CooTensor::from_entries({2, 2}, {0, 0, 0, 1}, {1.0, 2.0});
    CHECK_THROWS_AS(compress(t, std::vector<FormatAttr>{CU, S}), RuntimeError);
    const auto ok = CooTensor::from_entries({2, 2}, {0, 1, 1, 0}, {1.0, 2.0});
    CHECK(decompress(compress(ok, std::vector<FormatAttr>{CU, S})) == ok);
  }

  TEST_CASE("empty tensors") {
    const CooTensor e({3, 4});
    for (const char* p : {"Dense", "COO", "CSR", "DCSR", "CSF", "ModeGeneric"}) {
      const SpTensor sp = compress(e, preset_attrs(p, 2));
      CHECK(validate(sp).empty());
      CHECK(decompress(sp) == e);
    }
  }

  TEST_CASE("validate reports broken invariants") {
    const SpTensor good = compress(m4(), preset_attrs("CSR", 2));
    auto with_dim = [&](std::size_t l, DimStorage d, std::vector<double> vals = {1, 2, 3, 4}) {
      auto dims = good.dims();
      dims[l] = std::move(d);
      return SpTensor(good.shape(), dims, std::move(vals));
    };
    CHECK(has_kind(validate(with_dim(0, {D, {5}, {}})), ViolationKind::DensePos));
    CHECK(has_kind(validate(with_dim(1, {CU, {0, 2, 2, 4}, {0, 3, 0, 2}})), ViolationKind::PosLength));
    CHECK(has_kind(validate(with_dim(1, {CU, {1, 2, 2, 4, 4}, {0, 3, 0, 2}})), ViolationKind::PosStart));
    CHECK(has_kind(validate(with_dim(1, {CU, {0, 3, 2, 4, 4}, {0, 3, 0, 2}})), ViolationKind::NonDecreasing));
    CHECK(has_kind(validate(with_dim(1, {CU, {0, 2, 2, 4, 4}, {0, 3, 0}})), ViolationKind::CrdLength));
    CHECK(has_kind(validate(with_dim(1, {CU, {0, 2, 2, 4, 4}, {3, 0, 0, 2}})), ViolationKind::Uniqueness));
    CHECK(has_kind(validate(with_dim(1, {CU, {0, 2, 2, 4, 4}, {0, 9, 0, 2}})), ViolationKind::CrdRange));
    CHECK(has_kind(validate(with_dim(1, good.dim(1), {1, 2, 3})), ViolationKind::ValsLength));
    CHECK(has_kind(validate(with_dim(1, {S, {}, {0, 3, 0, 2}})), ViolationKind::Chain));

    const SpTensor coo = compress(m4(), preset_attrs("COO", 2));
    auto dims = coo.dims();
    dims[1].crd = {3, 0, 0, 2};  // (0,3) before (0,0)
    CHECK(has_kind(validate(SpTensor(coo.shape(), dims, coo.vals())), ViolationKind::RunOrder));
    dims = coo.dims();
    dims[1].pos = {0};
    CHECK(has_kind(validate(SpTensor(coo.shape(), dims, coo.vals())), ViolationKind::SingletonPos));
    CHECK_THROWS_AS(decompress(SpTensor(coo.shape(), dims, coo.vals())), RuntimeError);
  }

  TEST_CASE("property: compress then decompress is the identity") {
    std::mt19937_64 rng(11);
    const char* presets[] = {"Dense", "COO", "CSR", "DCSR", "CSF", "ModeGeneric"};
    const std::vector<std::vector<FormatAttr>> explicit_lists = {
        {D, CU, CU}, {CU, D, CU}, {CN, S, CU}, {CU, CU, D}, {D, D, CU}, {CU, S, S}};
    for (int n = 0; n < 200; ++n) {
      const std::size_t rank = 2 + static_cast<std::size_t>(n % 2);
      const auto t = testutil::random_coo(rng, testutil::random_shape(rng, rank, 6), (n % 10) * 0.05);
      for (const char* p : presets) {
        if ((std::string(p) == "CSR" || std::string(p) == "DCSR") && rank != 2) continue;
        const SpTensor sp = compress(t, preset_attrs(p, rank));
        REQUIRE(validate(sp).empty());
        CHECK(decompress(sp) == t);
      }
      if (rank == 3) {
        for (const auto& attrs : explicit_lists) {
          try {
            const SpTensor sp = compress(t, attrs);
            CHECK(validate(sp).empty());
            CHECK(decompress(sp) == t);
          } catch (const RuntimeError&) {
            // {CU,S,..} rejects tensors with several tails per coordinate
            CHECK(attrs[1] == S);
          }
        }
      }
    }
  }

  TEST_CASE("property: CU levels hold strictly increasing coordinates per segment") {
    std::mt19937_64 rng(12);
    for (int n = 0; n < 100; ++n) {
      const auto t = testutil::random_coo(rng, testutil::random_shape(rng, 3, 5), 0.3);
      const SpTensor sp = compress(t, preset_attrs("CSF", 3));
      for (std::size_t l = 0; l < 3; ++l) {
        const auto& d = sp.dim(l);
        for (std::size_t m = 0; m + 1 < d.pos.size(); ++m) {
          for (index_t k = d.pos[m] + 1; k < d.pos[m + 1]; ++k) CHECK(d.crd[k] > d.crd[k - 1]);
        }
      }
    }
  }
}
