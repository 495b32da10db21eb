#pragma once

// Catalog of sinusoidal coordinates η(x) and their shift data.
//
// Continuous kinds (pure imaginary shifts, β = γ, ε = +1):
//   C1 x, C2 x², C3 1-cos x, C4 sin x, C5 1-e^{-x}, C6 e^x-1, C7 cosh x-1, C8 sinh x
// Discrete kinds (real shifts, β = i, ε = -1, so x ∓ iβ = x ± 1):
//   D1 x, D2 ε'x(x+d), D3 1-q^x, D4 q^{-x}-1, D5 ε'(q^{-x}-1)(1-dq^x)
// SinhPerturbed is x + sinh(2πx): a valid sinusoidal coordinate that lacks
// the half-shift property needed for shape invariance.

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "solvkit/basicnum.hpp"
#include "solvkit/poly.hpp"
#include "solvkit/scalar.hpp"

namespace solvkit {

enum class CoordinateKind { C1, C2, C3, C4, C5, C6, C7, C8, D1, D2, D3, D4, D5, SinhPerturbed };

const char* to_string(CoordinateKind kind);
CoordinateKind parse_coordinate_kind(const std::string& name);
std::vector<CoordinateKind> all_coordinate_kinds();  // the 13 standard entries

class SinusoidalCoordinate {
 public:
  static SinusoidalCoordinate continuous(CoordinateKind kind, double gamma = 1.0);
  static SinusoidalCoordinate discrete(CoordinateKind kind, double q = 0.5, double d = 0.0,
                                       int eps_prime = 1, std::optional<int> N = std::nullopt);
  static SinusoidalCoordinate sinh_perturbed();
  /// Reasonable default parameters for each kind (used by the catalog and tests).
  static SinusoidalCoordinate example(CoordinateKind kind, std::optional<int> N = std::nullopt);

  CoordinateKind kind() const { return kind_; }
  double gamma() const { return gamma_; }
  double q() const { return q_; }
  double d() const { return d_; }
  int eps_prime() const { return eps_prime_; }
  std::optional<int> N() const { return N_; }

  bool is_discrete() const;
  bool is_continuous() const { return !is_discrete(); }
  bool is_nonstandard() const { return kind_ == CoordinateKind::SinhPerturbed; }
  /// +1 for pure imaginary shifts, -1 for real shifts.
  int epsilon() const { return is_discrete() ? -1 : 1; }
  /// r11 == 0 identically; these kinds admit the exact backend.
  bool is_linear_regime() const;
  /// η is a polynomial in x (exact evaluation possible).
  bool is_polynomial() const;

  /// Copy with a different d (used by discrete shape invariance d → d').
  SinusoidalCoordinate with_d(double d) const;
  SinusoidalCoordinate with_N(std::optional<int> N) const;

  /// Real sampling interval inside the domain of continuous kinds.
  std::pair<double, double> sample_interval() const;

  std::string describe() const;

 private:
  SinusoidalCoordinate() = default;
  void validate() const;

  CoordinateKind kind_ = CoordinateKind::C1;
  double gamma_ = 1.0;
  double q_ = 0.5;
  double d_ = 0.0;
  int eps_prime_ = 1;
  std::optional<int> N_;
};

/// η(x) by the catalog formula.
std::complex<double> eta_eval(const SinusoidalCoordinate& coord, std::complex<double> x);
/// Exact η(x); polynomial kinds only.
RationalComplex eta_eval(const SinusoidalCoordinate& coord, const RationalComplex& x);

/// x - k·iβ, i.e. the argument produced by (e^{βp})^k. For discrete kinds
/// this is x + k.
template <class T>
complex_t<T> shift_arg(const SinusoidalCoordinate& coord, const complex_t<T>& x, const T& k);

/// Shift data: η(x-iβ)+η(x+iβ) = (2+r11)η(x)+rm12 and
/// η(x-iβ)η(x+iβ) = (η(x)-η(-iβ))(η(x)-η(iβ)).
template <class T>
struct ShiftParams {
  T r11;
  T rm12;
  complex_t<T> eta_mib;  // η(-iβ)
  complex_t<T> eta_pib;  // η(+iβ)
  T eta_product;         // η(-iβ)η(iβ), always real
};

template <class T>
ShiftParams<T> shift_params(const SinusoidalCoordinate& coord);

BracketContext bracket_context(const SinusoidalCoordinate& coord);

/// Throws Regime unless the coordinate is usable with backend T.
template <class T>
void require_backend(const SinusoidalCoordinate& coord);

/// Table of g_n(x) = Σ_k g_n^{(k)} η^{n-k}, built by the three-term recurrence
/// g_{n+1} = ((2+r11)η + rm12) g_n - (η-η(-iβ))(η-η(iβ)) g_{n-1}.
template <>
std::complex<double> shift_arg<double>(const SinusoidalCoordinate&, const std::complex<double>&, const double&);
template <>
RationalComplex shift_arg<Rational>(const SinusoidalCoordinate&, const RationalComplex&, const Rational&);
template <>
ShiftParams<double> shift_params<double>(const SinusoidalCoordinate&);
template <>
ShiftParams<Rational> shift_params<Rational>(const SinusoidalCoordinate&);
template <>
void require_backend<double>(const SinusoidalCoordinate&);
template <>
void require_backend<Rational>(const SinusoidalCoordinate&);

template <class T>
class GTable {
 public:
  GTable(const ShiftParams<T>& params, int n_max);

  int n_max() const { return static_cast<int>(polys_.size()) - 2; }
  /// g_n as a polynomial in η, n >= -1.
  const PolyEta<T>& poly(int n) const;
  /// g_n^{(k)}; zero unless 0 <= k <= n.
  T coeff(int n, int k) const;

 private:
  std::vector<PolyEta<T>> polys_;  // index n+1
};

/// [g_n^{(0)}, ..., g_n^{(n)}] (descending powers of η); empty for n = -1.
template <class T>
std::vector<T> g_coeffs(const SinusoidalCoordinate& coord, int n);

/// Sample points for pointwise identity checks. Continuous kinds: n_real
/// points in the open sample interval plus n_complex off-axis points.
/// Discrete kinds: integers 1..min(N-1, 20), padded with off-lattice reals
/// up to n_real. Exact backend samples are
/// rational (Gaussian-rational for continuous kinds).
template <class T>
std::vector<complex_t<T>> sample_points(const SinusoidalCoordinate& coord, unsigned long seed,
                                        int n_real = 20, int n_complex = 5);

}  // namespace solvkit
