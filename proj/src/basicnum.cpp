#include "solvkit/basicnum.hpp"

#include <cmath>
#include <string>

#include "solvkit/error.hpp"

namespace solvkit {

const char* to_string(Regime regime) {
  switch (regime) {
    case Regime::Linear: return "linear";
    case Regime::Hyperbolic: return "hyperbolic";
    case Regime::Trigonometric: return "trigonometric";
  }
  return "?";
}

BracketContext::BracketContext(double r11) : r11_(r11), regime_(Regime::Linear), alpha_(0.0) {
  if (!(r11 > -4.0)) throw Error(ErrorKind::Domain, "r11 must exceed -4, got " + std::to_string(r11));
  if (std::abs(r11) < kLinearThreshold) {
    regime_ = Regime::Linear;
  } else if (r11 > 0) {
    regime_ = Regime::Hyperbolic;
    alpha_ = std::acosh(1.0 + r11 / 2.0);
  } else {
    regime_ = Regime::Trigonometric;
    alpha_ = std::acos(1.0 + r11 / 2.0);
  }
}

BracketContext BracketContext::from_alpha(Regime regime, double alpha) {
  switch (regime) {
    case Regime::Linear:
      return BracketContext(0.0);
    case Regime::Hyperbolic:
      if (!(alpha > 0)) throw Error(ErrorKind::Domain, "hyperbolic regime needs alpha > 0");
      return BracketContext(2.0 * std::cosh(alpha) - 2.0);
    case Regime::Trigonometric:
      if (!(alpha > 0 && alpha < M_PI)) throw Error(ErrorKind::Domain, "trigonometric regime needs 0 < alpha < pi");
      return BracketContext(2.0 * std::cos(alpha) - 2.0);
  }
  throw Error(ErrorKind::Domain, "unknown regime");
}

template <>
double bracket<double>(const BracketContext& ctx, const double& n) {
  switch (ctx.regime()) {
    case Regime::Linear:
      return n;
    case Regime::Hyperbolic:
      return std::sinh(ctx.alpha() * n) / std::sinh(ctx.alpha());
    case Regime::Trigonometric:
      return std::sin(ctx.alpha() * n) / std::sin(ctx.alpha());
  }
  return n;
}

template <>
Rational bracket<Rational>(const BracketContext& ctx, const Rational& n) {
  if (ctx.regime() != Regime::Linear) {
    throw Error(ErrorKind::Regime, std::string("exact backend needs the linear regime, got ") +
                                       to_string(ctx.regime()));
  }
  return n;
}

template <class T>
T bracket_sum(const BracketContext& ctx, long m, long n) {
  if (n < m - 1) {
    throw Error(ErrorKind::Domain, "bracket_sum needs n >= m-1 (m=" + std::to_string(m) +
                                       ", n=" + std::to_string(n) + ")");
  }
  const T two(2);
  return bracket<T>(ctx, T(n + m) / two) * bracket<T>(ctx, T(n - m + 1) / two) /
         bracket<T>(ctx, T(1) / two);
}

template double bracket_sum<double>(const BracketContext&, long, long);
template Rational bracket_sum<Rational>(const BracketContext&, long, long);

}  // namespace solvkit
