#pragma once

// Scalar backends. Every algebraic routine is instantiated for
//   double   - IEEE evaluation, all coordinate regimes
//   Rational - exact GMP rationals, linear regime (r11 = 0) only
// and the matching complex field used for pointwise evaluation.

#include <cmath>
#include <complex>
#include <string>
#include <type_traits>

#include <boost/multiprecision/gmp.hpp>

namespace solvkit {

using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                               boost::multiprecision::et_off>;

/// Exact complex number over Q; enough field arithmetic for polynomial
/// sinusoidal coordinates evaluated at Gaussian-rational points.
class RationalComplex {
 public:
  RationalComplex() = default;
  RationalComplex(Rational re) : re_(std::move(re)) {}  // NOLINT: implicit like std::complex
  RationalComplex(Rational re, Rational im) : re_(std::move(re)), im_(std::move(im)) {}
  RationalComplex(int re) : re_(re) {}  // NOLINT

  const Rational& real() const { return re_; }
  const Rational& imag() const { return im_; }

  RationalComplex& operator+=(const RationalComplex& o) {
    re_ += o.re_;
    im_ += o.im_;
    return *this;
  }
  RationalComplex& operator-=(const RationalComplex& o) {
    re_ -= o.re_;
    im_ -= o.im_;
    return *this;
  }
  RationalComplex& operator*=(const RationalComplex& o) {
    Rational re = re_ * o.re_ - im_ * o.im_;
    im_ = re_ * o.im_ + im_ * o.re_;
    re_ = std::move(re);
    return *this;
  }
  RationalComplex& operator/=(const RationalComplex& o);

  friend RationalComplex operator+(RationalComplex a, const RationalComplex& b) { return a += b; }
  friend RationalComplex operator-(RationalComplex a, const RationalComplex& b) { return a -= b; }
  friend RationalComplex operator*(RationalComplex a, const RationalComplex& b) { return a *= b; }
  friend RationalComplex operator/(RationalComplex a, const RationalComplex& b) { return a /= b; }
  friend RationalComplex operator-(const RationalComplex& a) { return {-a.re_, -a.im_}; }
  friend bool operator==(const RationalComplex& a, const RationalComplex& b) {
    return a.re_ == b.re_ && a.im_ == b.im_;
  }
  friend bool operator!=(const RationalComplex& a, const RationalComplex& b) { return !(a == b); }

  bool is_zero() const { return re_ == 0 && im_ == 0; }

 private:
  Rational re_{0};
  Rational im_{0};
};

inline RationalComplex operator*(const Rational& s, RationalComplex z) { return z *= RationalComplex(s); }

template <class T>
struct ScalarTraits;

template <>
struct ScalarTraits<double> {
  using complex_type = std::complex<double>;
  static constexpr bool exact = false;
  static constexpr const char* name = "float";
};

template <>
struct ScalarTraits<Rational> {
  using complex_type = RationalComplex;
  static constexpr bool exact = true;
  static constexpr const char* name = "rational";
};

template <class T>
using complex_t = typename ScalarTraits<T>::complex_type;

template <class T>
inline constexpr bool is_exact_v = ScalarTraits<T>::exact;

// Conversions. Rational(double) is exact on the binary value.
template <class T>
T from_double(double x) {
  return T(x);
}

inline double to_double(double x) { return x; }
inline double to_double(const Rational& x) { return x.convert_to<double>(); }

inline double magnitude(double x) { return std::abs(x); }
inline double magnitude(const Rational& x) { return std::abs(to_double(x)); }
inline double magnitude(const std::complex<double>& z) { return std::abs(z); }
double magnitude(const RationalComplex& z);

inline std::complex<double> to_complex_double(const std::complex<double>& z) { return z; }
inline std::complex<double> to_complex_double(const RationalComplex& z) {
  return {to_double(z.real()), to_double(z.imag())};
}

inline double real_part(const std::complex<double>& z) { return z.real(); }
inline Rational real_part(const RationalComplex& z) { return z.real(); }

/// Imaginary unit of the complex field attached to T.
template <class T>
complex_t<T> imaginary_unit() {
  if constexpr (is_exact_v<T>) {
    return RationalComplex(Rational(0), Rational(1));
  } else {
    return {0.0, 1.0};
  }
}

inline bool exactly_zero(double x) { return x == 0.0; }
inline bool exactly_zero(const Rational& x) { return x == 0; }
inline bool exactly_zero(const std::complex<double>& z) { return z == std::complex<double>{}; }
inline bool exactly_zero(const RationalComplex& z) { return z.is_zero(); }

std::string format_scalar(double x);
std::string format_scalar(const Rational& x);

/// Parses "p/q", "p", or a decimal literal into an exact rational.
Rational parse_rational(const std::string& text);

}  // namespace solvkit
