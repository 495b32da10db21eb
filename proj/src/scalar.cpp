#include "solvkit/scalar.hpp"

#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "solvkit/error.hpp"

namespace solvkit {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Domain: return "domain error";
    case ErrorKind::SingularPoint: return "singular point";
    case ErrorKind::Unsupported: return "unsupported";
    case ErrorKind::NotExactlySolvable: return "not exactly solvable";
    case ErrorKind::ConstraintViolation: return "constraint violation";
    case ErrorKind::Positivity: return "positivity error";
    case ErrorKind::Degeneracy: return "degenerate eigenvalues";
    case ErrorKind::Underdetermined: return "underdetermined";
    case ErrorKind::NotRepresentable: return "not representable";
    case ErrorKind::SingularBracket: return "singular bracket";
    case ErrorKind::InconsistentConstraint: return "inconsistent constraint";
    case ErrorKind::QesBroken: return "qes broken";
    case ErrorKind::Regime: return "regime error";
    case ErrorKind::Precondition: return "precondition failed";
    case ErrorKind::BoundaryPropagation: return "boundary propagation error";
    case ErrorKind::Schema: return "schema error";
  }
  return "error";
}

RationalComplex& RationalComplex::operator/=(const RationalComplex& o) {
  Rational den = o.re_ * o.re_ + o.im_ * o.im_;
  if (den == 0) throw Error(ErrorKind::SingularPoint, "division by exact complex zero");
  Rational re = (re_ * o.re_ + im_ * o.im_) / den;
  im_ = (im_ * o.re_ - re_ * o.im_) / den;
  re_ = std::move(re);
  return *this;
}

double magnitude(const RationalComplex& z) {
  return std::hypot(to_double(z.real()), to_double(z.imag()));
}

std::string format_scalar(double x) {
  if (x == 0.0) return "0";  // folds -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  // Prefer the shortest representation that round-trips.
  for (int prec = 1; prec <= 17; ++prec) {
    char shorter[32];
    std::snprintf(shorter, sizeof shorter, "%.*g", prec, x);
    if (std::strtod(shorter, nullptr) == x) return shorter;
  }
  return buf;
}

std::string format_scalar(const Rational& x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

Rational parse_rational(const std::string& text) {
  if (text.empty()) throw Error(ErrorKind::Schema, "empty rational literal");
  auto slash = text.find('/');
  try {
    if (slash != std::string::npos) {
      Rational num(text.substr(0, slash));
      Rational den(text.substr(slash + 1));
      if (den == 0) throw Error(ErrorKind::Schema, "zero denominator in '" + text + "'");
      return num / den;
    }
    if (text.find_first_of(".eE") != std::string::npos) {
      // Decimal literal: interpret exactly in base ten.
      std::string mant = text;
      long exp10 = 0;
      if (auto e = mant.find_first_of("eE"); e != std::string::npos) {
        exp10 = std::stol(mant.substr(e + 1));
        mant = mant.substr(0, e);
      }
      if (auto dot = mant.find('.'); dot != std::string::npos) {
        exp10 -= static_cast<long>(mant.size() - dot - 1);
        mant.erase(dot, 1);
      }
      Rational value(mant);
      Rational ten(10);
      for (long i = 0; i < std::labs(exp10); ++i) {
        if (exp10 > 0) value *= ten; else value /= ten;
      }
      return value;
    }
    return Rational(text);
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    throw Error(ErrorKind::Schema, "cannot parse rational '" + text + "'");
  }
}

}  // namespace solvkit
