#pragma once

// The "basic number" [n]: n itself, a q-number sinh(αn)/sinh(α), or its
// trigonometric analogue sin(αn)/sin(α), selected by the shift parameter r11.

#include "solvkit/scalar.hpp"

namespace solvkit {

enum class Regime { Linear, Hyperbolic, Trigonometric };

const char* to_string(Regime regime);

class BracketContext {
 public:
  /// |r11| below this threshold is classified as the linear regime.
  static constexpr double kLinearThreshold = 1e-12;

  /// Classifies r11 and derives α. Throws Domain if r11 <= -4.
  explicit BracketContext(double r11);

  /// Inverse construction from α; r11 = 2cosh(α)-2 or 2cos(α)-2.
  static BracketContext from_alpha(Regime regime, double alpha);

  double r11() const { return r11_; }
  Regime regime() const { return regime_; }
  double alpha() const { return alpha_; }

 private:
  double r11_;
  Regime regime_;
  double alpha_;
};

/// [n] for real n. The exact backend is accepted only in the linear regime.
template <class T>
T bracket(const BracketContext& ctx, const T& n);

template <>
double bracket<double>(const BracketContext& ctx, const double& n);
template <>
Rational bracket<Rational>(const BracketContext& ctx, const Rational& n);

/// Closed form of Σ_{r=m}^n [r] = [(n+m)/2][(n-m+1)/2]/[1/2]; requires n >= m-1.
template <class T>
T bracket_sum(const BracketContext& ctx, long m, long n);

}  // namespace solvkit
