#include <doctest.h>

#include "oracles.hpp"
#include "solvkit/error.hpp"

using namespace solvkit;

namespace {

PotentialSpec<Rational> krawtchouk() {
  PotentialSpec<Rational> s(2);
  s.with(2, 0, 1).with(1, 1, -1).with(1, 0, -2).with(0, 1, 2).with(0, 0, 2);
  return s;
}

const auto kD1 = SinusoidalCoordinate::discrete(CoordinateKind::D1);

template <class T>
bool degenerate_below(const PotentialSpec<T>& s, const SinusoidalCoordinate& c, int n) {
  T En = energy(s, c, n);
  for (int i = 0; i < n; ++i) {
    T Ei = energy(s, c, i);
    if constexpr (is_exact_v<T>) {
      if (Ei == En) return true;
    } else if (std::abs(Ei - En) < 1e-12 * std::max(1.0, std::abs(En))) {
      return true;
    }
  }
  return false;
}

/// Max |H c - E c| over the first n+1 rows, relative to |H| |c|.
template <class T>
double eigen_residual(const Matrix<T>& H, const PolyEta<T>& p, const T& E) {
  int n = p.degree();
  double res = 0, hmax = 1, cmax = 1;
  for (int i = 0; i <= n; ++i) {
    T acc = -E * p[i];
    for (int j = 0; j <= n; ++j) {
      acc += H(i, j) * p[j];
      hmax = std::max(hmax, magnitude(H(i, j)));
    }
    res = std::max(res, magnitude(acc));
    cmax = std::max(cmax, magnitude(p[i]));
  }
  return res / (hmax * cmax);
}

template <class T>
void check_exact_solvability(const SinusoidalCoordinate& c, std::mt19937_64& rng) {
  const int K = 6;
  for (int t = 0; t < 50; ++t) {
    auto s = oracle::random_spec<T>(2, rng);
    auto H = ht_matrix(s, c, K);
    for (int n = 0; n <= K; ++n) {
      for (int m = n + 1; m <= K; ++m) CHECK(exactly_zero(H(m, n)));
      if constexpr (is_exact_v<T>) {
        CHECK(H(n, n) == energy(s, c, n));
      } else {
        CHECK(oracle::rel_err(H(n, n), energy(s, c, n)) < 1e-10);
      }
      if (degenerate_below(s, c, n)) {
        CHECK_THROWS_AS(eigenpoly(s, c, n), Error);
        continue;
      }
      auto p = eigenpoly(s, c, n);
      CHECK(p.degree() == n);
      auto det = oracle::eigenpoly_det(H.entries, n);
      if constexpr (is_exact_v<T>) {
        CHECK(ht_apply(s, c, p) == p * energy(s, c, n));
        CHECK(det == p);
      } else {
        CHECK(eigen_residual(H.entries, p, energy(s, c, n)) < 1e-10);
        double diff = 0, scale = 1;
        for (int j = 0; j <= n; ++j) {
          diff = std::max(diff, std::abs(det[j] - p[j]));
          scale = std::max(scale, std::abs(p[j]));
        }
        CHECK(diff < 1e-8 * scale);
      }
    }
  }
}

}  // namespace

TEST_CASE("emjn examples") {
  std::mt19937_64 rng(3);
  for (auto kind : all_coordinate_kinds()) {
    auto c = SinusoidalCoordinate::example(kind);
    auto s = oracle::random_spec<double>(2, rng);
    for (int m = 0; m <= 2; ++m)
      for (int j = 0; j <= m; ++j) CHECK(emjn(s, c, m, j, 0) == 0.0);
    CHECK(emjn(s, c, 0, 0, 1) == doctest::Approx(c.epsilon() * s.v(1, 1)));
  }
  auto s = oracle::random_spec<Rational>(2, rng);
  for (int n = 0; n <= 8; ++n)
    CHECK(emjn(s, kD1, 0, 0, n) == -Rational(n) * (s.v(2, 0) * (n - 1) + s.v(1, 1) * (n + 1)) / 2);
}

TEST_CASE("emjn closed forms match the generic sums") {
  std::mt19937_64 rng(4);
  for (auto kind : {CoordinateKind::C2, CoordinateKind::D2, CoordinateKind::C3, CoordinateKind::C7, CoordinateKind::D5}) {
    auto c = SinusoidalCoordinate::example(kind);
    for (int L = 2; L <= 4; ++L) {
      auto s = oracle::random_spec<double>(L, rng);
      for (int m = 0; m <= L - 1; ++m)
        for (int j = 0; j <= std::min(m, 1); ++j)
          for (int n = 0; n <= 10; ++n) {
            double g = emjn(s, c, m, j, n);
            double cl = emjn_closed(s, c, m, j, n);
            CHECK(std::abs(g - cl) <= 1e-9 * std::max(1.0, std::abs(g)));
          }
    }
  }
  auto s = oracle::random_spec<Rational>(3, rng);
  auto c2 = SinusoidalCoordinate::example(CoordinateKind::C2);
  for (int m = 0; m <= 2; ++m)
    for (int j = 0; j <= std::min(m, 1); ++j)
      for (int n = 0; n <= 10; ++n) CHECK(emjn(s, c2, m, j, n) == emjn_closed(s, c2, m, j, n));
}

TEST_CASE("ht_matrix examples") {
  auto zero = ht_matrix(PotentialSpec<Rational>(2), kD1, 4);
  for (int i = 0; i <= 4; ++i)
    for (int j = 0; j <= 4; ++j) CHECK(zero(i, j) == 0);

  auto k = ht_matrix(krawtchouk(), kD1, 4);
  for (int n = 0; n <= 4; ++n) {
    CHECK(k(n, n) == n);
    for (int m = n + 1; m <= 4; ++m) CHECK(k(m, n) == 0);
  }

  std::mt19937_64 rng(9);
  auto s3 = oracle::random_spec<Rational>(3, rng);
  s3.set(3, 0, 1);
  auto h3 = ht_matrix(s3, kD1, 6);
  for (int n = 1; n <= 5; ++n) {
    CHECK(h3(n + 1, n) != 0);
    for (int m = n + 2; m <= 6; ++m) CHECK(h3(m, n) == 0);
  }
  CHECK(h3.truncated[6]);
  CHECK_FALSE(h3.truncated[5]);
}

TEST_CASE("column degree bound") {
  std::mt19937_64 rng(10);
  for (auto kind : all_coordinate_kinds()) {
    auto c = SinusoidalCoordinate::example(kind);
    for (int L = 2; L <= 5; ++L) {
      auto s = oracle::random_spec<double>(L, rng);
      const int K = 10;
      auto H = ht_matrix(s, c, K);
      for (int n = 0; n <= K; ++n)
        for (int m = n + L - 1; m <= K; ++m) CHECK(H(m, n) == 0.0);
    }
  }
}

TEST_CASE("matrix and functional forms agree") {
  std::mt19937_64 rng(12);
  for (auto kind : all_coordinate_kinds()) {
    auto c = SinusoidalCoordinate::example(kind);
    for (int L = 2; L <= 4; ++L) {
      auto s = oracle::random_spec<double>(L, rng);
      const int K = 8 + L - 2;
      auto H = ht_matrix(s, c, K);
      auto xs = sample_points<double>(c, 21, 8, 2);
      for (int n = 0; n <= 8; ++n)
        for (auto x : xs) {
          auto f = apply_ht_pointwise(s, c, PolyEta<double>::monomial(n), x);
          std::vector<double> col(static_cast<size_t>(K) + 1);
          for (int m = 0; m <= K; ++m) col[static_cast<size_t>(m)] = H(m, n);
          auto g = PolyEta<double>(col)(eta_eval(c, x));
          double scale = std::max(1.0, potential_scale(s, c) * std::pow(std::abs(eta_eval(c, x)) + 1.0, n));
          CHECK(std::abs(f - g) <= 1e-9 * std::max(std::abs(g), scale));
        }
    }
  }
}

TEST_CASE("energy") {
  std::mt19937_64 rng(13);
  for (auto kind : all_coordinate_kinds()) {
    auto c = SinusoidalCoordinate::example(kind);
    auto ctx = bracket_context(c);
    auto s = oracle::random_spec<double>(2, rng);
    double eps = c.epsilon();
    CHECK(energy(s, c, 0) == doctest::Approx(0.0));
    CHECK(energy(s, c, 1) == doctest::Approx(eps * s.v(1, 1)));
    CHECK(energy(s, c, 2) == doctest::Approx(eps * (s.v(2, 0) + (1 + bracket<double>(ctx, 2.0)) * s.v(1, 1))));
  }
  CHECK_THROWS_AS(energy(PotentialSpec<double>(3), kD1, 1), Error);
}

TEST_CASE("eigenpoly examples") {
  auto k = krawtchouk();
  CHECK(eigenpoly(k, kD1, 0) == PolyEta<Rational>{1});
  auto H = ht_matrix(k, kD1, 2);
  auto p1 = eigenpoly(k, kD1, 1);
  CHECK(p1 == PolyEta<Rational>{H(0, 1) / (energy(k, kD1, 1) - energy(k, kD1, 0)), 1});
  CHECK(p1 == PolyEta<Rational>{-2, 1});
  auto p2 = eigenpoly(k, kD1, 2);
  CHECK(p2 == PolyEta<Rational>{3, -4, 1});
  for (int x : {1, 2, 3}) {
    auto lhs = apply_ht_pointwise(k, kD1, p2, RationalComplex(x));
    CHECK(lhs == RationalComplex(2 * p2(Rational(x))));
  }
  CHECK(apply_ht_pointwise(k, kD1, PolyEta<Rational>{5}, RationalComplex(3)) == RationalComplex(0));

  PotentialSpec<Rational> deg(2);
  deg.with(2, 0, 3).with(1, 1, -1);  // E(n) = -n(n-2)
  CHECK(energy(deg, kD1, 2) == 0);
  CHECK_THROWS_AS(eigenpoly(deg, kD1, 2), Error);
  CHECK_THROWS_AS(eigenpoly(PotentialSpec<Rational>(3), kD1, 1), Error);
}

TEST_CASE("exact solvability, exact backend") {
  std::mt19937_64 rng(14);
  for (auto kind : {CoordinateKind::C1, CoordinateKind::C2, CoordinateKind::D1, CoordinateKind::D2}) {
    CAPTURE(std::string(to_string(kind)));
    check_exact_solvability<Rational>(SinusoidalCoordinate::example(kind), rng);
  }
}

TEST_CASE("exact solvability, float backend") {
  std::mt19937_64 rng(15);
  for (auto kind : all_coordinate_kinds()) {
    CAPTURE(std::string(to_string(kind)));
    check_exact_solvability<double>(SinusoidalCoordinate::example(kind), rng);
  }
}
