#include <doctest.h>

#include "solvkit/error.hpp"
#include "solvkit/io.hpp"

using namespace solvkit;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::Domain;
}

const char* kKrawtchouk = R"({
  "coordinate": {"kind": "D1", "N": 4},
  "potential": {"L": 2, "v": {"2,0": 1, "1,1": -1, "1,0": -2, "0,1": 2, "0,0": 2}},
  "lattice": {"N": 4}
})";

}  // namespace

TEST_CASE("scalars") {
  CHECK(rational_from_json(Json(3), "x") == 3);
  CHECK(rational_from_json(Json("2/6"), "x") == Rational(1, 3));
  CHECK(rational_from_json(Json("-0.125"), "x") == Rational(-1, 8));
  CHECK(rational_from_json(Json(0.1), "x") == Rational(1, 10));
  CHECK(kind_of([] { rational_from_json(Json("abc"), "x"); }) == ErrorKind::Schema);
  CHECK(kind_of([] { rational_from_json(Json::array(), "x"); }) == ErrorKind::Schema);
  CHECK(rational_to_json(Rational(4)) == Json(4));
  CHECK(rational_to_json(Rational(-2, 3)) == Json("-2/3"));
}

TEST_CASE("coordinates") {
  for (auto k : all_coordinate_kinds()) {
    auto c = SinusoidalCoordinate::example(k);
    auto back = coordinate_from_json(coordinate_to_json(c));
    CHECK(back.kind() == c.kind());
    CHECK(back.q() == c.q());
    CHECK(back.d() == c.d());
    CHECK(back.gamma() == c.gamma());
    CHECK(back.eps_prime() == c.eps_prime());
  }
  CHECK(kind_of([] { coordinate_from_json(Json::parse(R"({"kind": "Z9"})")); }) == ErrorKind::Schema);
  CHECK(kind_of([] { coordinate_from_json(Json::parse(R"({"kind": "C1", "q": 0.5})")); }) == ErrorKind::Schema);
  CHECK(kind_of([] { coordinate_from_json(Json::parse(R"({"kind": "D1", "colour": 1})")); }) == ErrorKind::Schema);
}

TEST_CASE("model round trip") {
  auto m = model_from_json(Json::parse(kKrawtchouk));
  CHECK(m.L == 2);
  CHECK(m.coord.kind() == CoordinateKind::D1);
  REQUIRE(m.lattice.has_value());
  CHECK(*m.lattice->N == 4);
  auto s = m.spec<Rational>();
  CHECK(s.v(1, 0) == -2);
  auto again = model_from_json(model_to_json(m));
  CHECK(again.spec<Rational>() == s);
  CHECK(again.raw == m.raw);
}

TEST_CASE("non-canonical keys are canonicalized") {
  auto m = model_from_json(Json::parse(R"({"coordinate": {"kind": "D1"}, "potential": {"L": 2, "v": {"0,2": 1}}})"));
  CHECK(m.has_key(0, 2));
  auto s = m.spec<Rational>();
  CHECK(s.v(1, 1) == 2);
  CHECK(s.v(2, 0) == -1);
  CHECK(s.v(0, 0) == 1);
}

TEST_CASE("schema violations") {
  auto bad = [](const char* text) { return kind_of([&] { model_from_json(Json::parse(text)); }); };
  CHECK(bad(R"({"coordinate": {"kind": "D1"}})") == ErrorKind::Schema);
  CHECK(bad(R"({"coordinate": {"kind": "D1"}, "potential": {"L": 2, "v": {"x": 1}}})") == ErrorKind::Schema);
  CHECK(bad(R"({"coordinate": {"kind": "C1"}, "potential": {"L": 2, "v": {"2,0": 1}}, "lattice": {"N": 3}})") ==
        ErrorKind::Schema);
  CHECK(bad(R"({"coordinate": {"kind": "D1", "N": 4}, "potential": {"L": 2, "v": {"2,0": 1}}, "lattice": {"N": 3}})") ==
        ErrorKind::Schema);
  CHECK(bad(R"({"coordinate": {"kind": "D1", "N": 4}, "potential": {"L": 2, "v": {"2,0": 1}}, "lattice": {"K_tr": 30}})") ==
        ErrorKind::Schema);
  CHECK(bad(R"({"coordinate": {"kind": "D1"}, "potential": {"L": 2, "v": {"2,0": 1}}, "extra": 1})") ==
        ErrorKind::Schema);
}

TEST_CASE("expected block") {
  auto m = model_from_json(Json::parse(kKrawtchouk));
  auto e = record_expected(m, 5);
  REQUIRE(e.closure.has_value());
  REQUIRE(e.casimir.has_value());
  CHECK(*e.casimir == 2);
  REQUIRE(e.energies.size() == 5);
  for (int n = 0; n < 5; ++n) CHECK(e.energies[static_cast<size_t>(n)] == n);
  m.expected = e;
  auto back = model_from_json(model_to_json(m));
  REQUIRE(back.expected.has_value());
  CHECK(*back.expected->casimir == 2);
  CHECK(back.expected->closure->r1_0 == e.closure->r1_0);
  CHECK(back.expected->dual->Rm1d == e.dual->Rm1d);
}

TEST_CASE("report round trip") {
  CheckReport r;
  r.check = "closure";
  r.pass = true;
  r.max_residual = 1.5e-13;
  r.tolerance = 1e-9;
  r.samples_used = 20;
  r.skipped = 1;
  r.notes = {"sample skipped"};
  r.components = {{"closurerel1", 1e-14}, {"closurerel3", 1.5e-13}};
  auto j = report_to_json(r);
  CHECK(j["status"] == "PASS");
  auto b = report_from_json(j);
  CHECK(b.check == r.check);
  CHECK(b.pass);
  CHECK(b.max_residual == r.max_residual);
  CHECK(b.samples_used == 20);
  CHECK(b.skipped == 1);
  CHECK(b.notes == r.notes);
  CHECK(b.components == r.components);
}
