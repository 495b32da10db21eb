#include <doctest.h>

#include <numbers>

#include <Eigen/Dense>

#include "oracles.hpp"
#include "solvkit/error.hpp"
#include "solvkit/qes.hpp"

using namespace solvkit;

namespace {

const auto kD1 = SinusoidalCoordinate::discrete(CoordinateKind::D1);

template <class T>
PotentialSpec<T> spec_with_top(int L, std::mt19937_64& rng) {
  auto s = oracle::random_spec<T>(L, rng);
  if (exactly_zero(s.v(L, 0))) s.set(L, 0, T(1));
  return s;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::Domain;
}

}  // namespace

TEST_CASE("L=3 compensation") {
  std::mt19937_64 rng(1);
  auto s = spec_with_top<Rational>(3, rng);
  CHECK(qes_build(s, kD1, 0).e0 == 0);
  for (int M = 0; M <= 8; ++M) {
    Rational want = -Rational(M) * (s.v(3, 0) * (M - 1) + s.v(2, 1) * (M + 1)) / 2;
    auto q = qes_build(s, kD1, M);
    CHECK(q.e0 == want);
    CHECK_FALSE(q.e1.has_value());
    CHECK(qes_e0_closed(s, kD1, M) == qes_compensation_generic(s, kD1, 0, M));
  }
}

TEST_CASE("L=4, D1, M=3") {
  PotentialSpec<Rational> s(4);
  s.with(4, 0, 3).with(2, 1, 1).with(3, 0, 2).with(0, 1, 1);
  auto q = qes_build(s, kD1, 3);
  CHECK(q.spec.v(3, 1) == -2);
  CHECK(q.e0 == 3);  // -ε v40
  REQUIRE(q.e1.has_value());
  CHECK(*q.e1 == qes_compensation_generic(q.spec, kD1, 1, 3));
  CHECK(q.warnings.empty());

  s.set(3, 1, 5);
  auto w = qes_build(s, kD1, 3, V31Policy::Overwrite);
  CHECK(w.spec.v(3, 1) == -2);
  CHECK(w.warnings.size() == 1);
  CHECK(kind_of([&] { qes_build(s, kD1, 3, V31Policy::Require); }) == ErrorKind::InconsistentConstraint);
}

TEST_CASE("qes_build errors") {
  std::mt19937_64 rng(2);
  CHECK(kind_of([&] { qes_build(spec_with_top<double>(2, rng), kD1, 2); }) == ErrorKind::Unsupported);
  CHECK(kind_of([&] { qes_build(spec_with_top<double>(5, rng), kD1, 2); }) == ErrorKind::Unsupported);
  PotentialSpec<double> s(4);
  s.with(3, 1, 1.0).with(2, 1, 1.0);
  CHECK(kind_of([&] { qes_build(s, kD1, 2); }) == ErrorKind::InconsistentConstraint);
  auto trig = SinusoidalCoordinate::continuous(CoordinateKind::C7, std::numbers::pi / 5);
  auto s4 = spec_with_top<double>(4, rng);
  CHECK(kind_of([&] { qes_build(s4, trig, 5); }) == ErrorKind::SingularBracket);
}

TEST_CASE("qes_matrix examples") {
  std::mt19937_64 rng(3);
  auto s3 = spec_with_top<Rational>(3, rng);
  auto m = qes_matrix(qes_build(s3, kD1, 2), kD1);
  CHECK(m.entries.rows() == 3);
  CHECK(m.entries.cols() == 3);
  auto full = ht_matrix(s3, kD1, 3);
  CHECK(full(3, 2) != 0);  // without the compensation the η^3 term is present

  auto s4 = spec_with_top<Rational>(4, rng);
  auto q1 = qes_build(s4, kD1, 1);
  CHECK_NOTHROW(qes_matrix(q1, kD1));
}

TEST_CASE("v31 violation reports the leaked coefficient") {
  PotentialSpec<Rational> s(4);
  s.with(4, 0, 2).with(3, 1, 1).with(2, 1, 1);
  auto q = qes_build(s, kD1, 2, V31Policy::AsGiven);
  try {
    qes_matrix(q, kD1);
    FAIL("expected QesBroken");
  } catch (const QesBrokenError& e) {
    CHECK(e.kind() == ErrorKind::QesBroken);
    CHECK(e.column() == 1);  // H'η^{M-1} is the first column with an η^{M+1} term
    CHECK(e.row() == 3);
    // -ε([M-1] v40 + [M] v31) = 1·2 + 2·1
    CHECK(e.residual() == doctest::Approx(4.0));
  }
}

TEST_CASE("invariant subspace, all coordinates") {
  std::mt19937_64 rng(4);
  for (auto kind : all_coordinate_kinds()) {
    auto c = SinusoidalCoordinate::example(kind);
    CAPTURE(std::string(to_string(kind)));
    for (int L = 3; L <= 4; ++L)
      for (int M = 1; M <= 8; ++M) {
        auto s = spec_with_top<double>(L, rng);
        QesModel<double> q = qes_build(s, c, M);
        OperatorMatrix<double> m;
        REQUIRE_NOTHROW(m = qes_matrix(q, c));
        auto ev = operator_eigenvalues(m);
        CHECK(ev.size() == static_cast<size_t>(M + 1));
        for (auto z : ev) CHECK(std::isfinite(std::abs(z)));
        double g0 = qes_compensation_generic(q.spec, c, 0, M);
        CHECK(std::abs(q.e0 - g0) <= 1e-10 * std::max(1.0, std::abs(g0)));
        if (L == 4) {
          double g1 = qes_compensation_generic(q.spec, c, 1, M);
          CHECK(std::abs(*q.e1 - g1) <= 1e-10 * std::max(1.0, std::abs(g1)));
        }
        Eigen::MatrixXd dense(M + 1, M + 1);
        for (int i = 0; i <= M; ++i)
          for (int j = 0; j <= M; ++j) dense(i, j) = m(i, j);
        CHECK(Eigen::FullPivLU<Eigen::MatrixXd>(dense).rank() >= M);
      }
  }
}

TEST_CASE("invariant subspace, exact backend") {
  std::mt19937_64 rng(5);
  for (auto kind : {CoordinateKind::C1, CoordinateKind::C2, CoordinateKind::D1, CoordinateKind::D2}) {
    auto c = SinusoidalCoordinate::example(kind);
    for (int L = 3; L <= 4; ++L)
      for (int M = 1; M <= 8; ++M) {
        auto q = qes_build(spec_with_top<Rational>(L, rng), c, M);
        CHECK_NOTHROW(qes_matrix(q, c));
        CHECK(q.e0 == qes_compensation_generic(q.spec, c, 0, M));
        if (L == 4) CHECK(*q.e1 == qes_compensation_generic(q.spec, c, 1, M));
      }
  }
}

TEST_CASE("qes_feasible") {
  CHECK(qes_feasible<Rational>(3).feasible);
  CHECK(qes_feasible<Rational>(4).feasible);
  auto f = qes_feasible<Rational>(5, BracketContext(0.0), 6);
  CHECK_FALSE(f.feasible);
  REQUIRE(f.det.has_value());
  CHECK(*f.det == Rational(1, 2));
  auto g = qes_feasible<double>(5, BracketContext(0.5), 6);
  CHECK_FALSE(g.feasible);
  CHECK(*g.det == doctest::Approx(bracket<double>(BracketContext(0.5), 0.5)));
  CHECK(*g.det != 0.0);
  for (int L = 5; L <= 8; ++L)
    for (int M = 1; M <= 8; ++M) CHECK(*qes_feasible<Rational>(L, BracketContext(0.0), M).det == Rational(1, 2));
}
