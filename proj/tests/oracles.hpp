#pragma once

// Independent reference computations used by the test suites.

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "solvkit/basicnum.hpp"
#include "solvkit/poly.hpp"
#include "solvkit/polyop.hpp"
#include "solvkit/potential.hpp"
#include "solvkit/sinusoid.hpp"

namespace oracle {

using namespace solvkit;

/// Σ_{r=m}^n [r], term by term.
template <class T>
T bracket_sum_direct(const BracketContext& ctx, long m, long n) {
  T s(0);
  for (long r = m; r <= n; ++r) s += bracket<T>(ctx, T(r));
  return s;
}

/// g_n(x) = (η(x-iβ)^{n+1} - η(x+iβ)^{n+1}) / (η(x-iβ) - η(x+iβ)).
inline std::complex<double> g_quotient(const SinusoidalCoordinate& c, std::complex<double> x, int n) {
  auto em = eta_eval(c, shift_arg<double>(c, x, 1.0));
  auto ep = eta_eval(c, shift_arg<double>(c, x, -1.0));
  return (std::pow(em, n + 1) - std::pow(ep, n + 1)) / (em - ep);
}

/// g_n^{(1)} closed form.
inline double g1_closed(const BracketContext& ctx, double rm12, int n) {
  if (ctx.regime() == Regime::Linear) return n * (n + 1.0) * (2.0 * n + 1.0) / 6.0 * rm12;
  auto b = [&](double v) { return bracket<double>(ctx, v); };
  return (n * b(n + 1) - (n + 1) * b(n)) / ctx.r11() * rm12;
}

/// Σ_{r=m}^n g_r^{(1)} closed form.
inline double g1_sum_closed(const BracketContext& ctx, double rm12, int m, int n) {
  if (ctx.regime() == Regime::Linear)
    return (n + m + 1.0) * (n - m + 1.0) * (double(n) * n + 2.0 * n + double(m) * m) / 12.0 * rm12;
  auto b = [&](double v) { return bracket<double>(ctx, v); };
  double h = b(0.5);
  return ((n + 1) * b(n + 1) - m * b(m) - b((n + m + 1) / 2.0) * b((n - m + 1) / 2.0) / (h * h)) / ctx.r11() *
         rm12;
}

/// Determinant by Gaussian elimination over a field.
template <class T>
T determinant(std::vector<std::vector<T>> a) {
  const size_t n = a.size();
  T det(1);
  for (size_t c = 0; c < n; ++c) {
    size_t p = c;
    while (p < n && exactly_zero(a[p][c])) ++p;
    if (p == n) return T(0);
    if (p != c) {
      std::swap(a[p], a[c]);
      det = -det;
    }
    det *= a[c][c];
    for (size_t r = c + 1; r < n; ++r) {
      T f = a[r][c] / a[c][c];
      for (size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
    }
  }
  return det;
}

/// P_n as the determinant with rows (H_ij - E δ_ij), i < n, and last row η^j,
/// expanded along the last row and normalized to be monic.
template <class T>
PolyEta<T> eigenpoly_det(const Matrix<T>& H, int n) {
  const T E = H(n, n);
  std::vector<T> coeff(static_cast<size_t>(n) + 1, T(0));
  for (int j = 0; j <= n; ++j) {
    std::vector<std::vector<T>> minor;
    for (int i = 0; i < n; ++i) {
      std::vector<T> row;
      for (int k = 0; k <= n; ++k) {
        if (k == j) continue;
        row.push_back(H(i, k) - (i == k ? E : T(0)));
      }
      minor.push_back(row);
    }
    T d = n == 0 ? T(1) : determinant(minor);
    coeff[static_cast<size_t>(j)] = ((n + j) % 2 == 0) ? d : T(-d);
  }
  return PolyEta<T>(coeff).monic();
}

/// Random spec of degree L with small dyadic coefficients, top part nonzero.
template <class T>
PotentialSpec<T> random_spec(int L, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> num(-8, 8);
  PotentialSpec<T> s(L);
  do {
    for (auto [k, l] : s.keys()) s.set(k, l, T(num(rng)) / T(4));
  } while (exactly_zero(s.v(L, 0)) && exactly_zero(s.v(L - 1, 1)));
  return s;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace oracle
