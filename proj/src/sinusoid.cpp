#include "solvkit/sinusoid.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "solvkit/error.hpp"

namespace solvkit {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct KindInfo {
  CoordinateKind kind;
  const char* name;
};

constexpr KindInfo kKinds[] = {
    {CoordinateKind::C1, "C1"}, {CoordinateKind::C2, "C2"}, {CoordinateKind::C3, "C3"},
    {CoordinateKind::C4, "C4"}, {CoordinateKind::C5, "C5"}, {CoordinateKind::C6, "C6"},
    {CoordinateKind::C7, "C7"}, {CoordinateKind::C8, "C8"}, {CoordinateKind::D1, "D1"},
    {CoordinateKind::D2, "D2"}, {CoordinateKind::D3, "D3"}, {CoordinateKind::D4, "D4"},
    {CoordinateKind::D5, "D5"}, {CoordinateKind::SinhPerturbed, "X1"},
};

double closed_form_r11(const SinusoidalCoordinate& c) {
  switch (c.kind()) {
    case CoordinateKind::C1:
    case CoordinateKind::C2:
    case CoordinateKind::D1:
    case CoordinateKind::D2:
    case CoordinateKind::SinhPerturbed:
      return 0.0;
    case CoordinateKind::C3:
    case CoordinateKind::C4:
      return 2.0 * std::cosh(c.gamma()) - 2.0;
    case CoordinateKind::C5:
    case CoordinateKind::C6:
    case CoordinateKind::C7:
    case CoordinateKind::C8:
      return 2.0 * std::cos(c.gamma()) - 2.0;
    case CoordinateKind::D3:
    case CoordinateKind::D4:
    case CoordinateKind::D5:
      return c.q() + 1.0 / c.q() - 2.0;
  }
  return 0.0;
}

}  // namespace

const char* to_string(CoordinateKind kind) {
  for (const auto& k : kKinds)
    if (k.kind == kind) return k.name;
  return "?";
}

CoordinateKind parse_coordinate_kind(const std::string& name) {
  for (const auto& k : kKinds)
    if (name == k.name) return k.kind;
  if (name == "nonstandard" || name == "sinh") return CoordinateKind::SinhPerturbed;
  throw Error(ErrorKind::Schema, "unknown coordinate kind '" + name + "'");
}

std::vector<CoordinateKind> all_coordinate_kinds() {
  std::vector<CoordinateKind> out;
  for (const auto& k : kKinds)
    if (k.kind != CoordinateKind::SinhPerturbed) out.push_back(k.kind);
  return out;
}

bool SinusoidalCoordinate::is_discrete() const {
  switch (kind_) {
    case CoordinateKind::D1:
    case CoordinateKind::D2:
    case CoordinateKind::D3:
    case CoordinateKind::D4:
    case CoordinateKind::D5:
      return true;
    default:
      return false;
  }
}

bool SinusoidalCoordinate::is_linear_regime() const {
  return closed_form_r11(*this) == 0.0;
}

bool SinusoidalCoordinate::is_polynomial() const {
  return kind_ == CoordinateKind::C1 || kind_ == CoordinateKind::C2 || kind_ == CoordinateKind::D1 ||
         kind_ == CoordinateKind::D2;
}

SinusoidalCoordinate SinusoidalCoordinate::continuous(CoordinateKind kind, double gamma) {
  SinusoidalCoordinate c;
  c.kind_ = kind;
  c.gamma_ = gamma;
  if (c.is_discrete()) throw Error(ErrorKind::Domain, std::string(to_string(kind)) + " is a discrete kind");
  c.validate();
  return c;
}

SinusoidalCoordinate SinusoidalCoordinate::discrete(CoordinateKind kind, double q, double d, int eps_prime,
                                                    std::optional<int> N) {
  SinusoidalCoordinate c;
  c.kind_ = kind;
  c.q_ = q;
  c.d_ = d;
  c.eps_prime_ = eps_prime;
  c.N_ = N;
  if (!c.is_discrete()) throw Error(ErrorKind::Domain, std::string(to_string(kind)) + " is not a discrete kind");
  c.validate();
  return c;
}

SinusoidalCoordinate SinusoidalCoordinate::sinh_perturbed() {
  SinusoidalCoordinate c;
  c.kind_ = CoordinateKind::SinhPerturbed;
  c.gamma_ = 1.0;
  return c;
}

SinusoidalCoordinate SinusoidalCoordinate::example(CoordinateKind kind, std::optional<int> N) {
  switch (kind) {
    case CoordinateKind::C1:
    case CoordinateKind::C2:
      return continuous(kind, 1.0);
    case CoordinateKind::C3:
    case CoordinateKind::C4:
    case CoordinateKind::C5:
    case CoordinateKind::C6:
    case CoordinateKind::C7:
    case CoordinateKind::C8:
      return continuous(kind, 0.7);
    case CoordinateKind::D1:
      return discrete(kind, 0.5, 0.0, 1, N);
    case CoordinateKind::D2:
      return discrete(kind, 0.5, 0.25, 1, N);
    case CoordinateKind::D3:
    case CoordinateKind::D4:
      return discrete(kind, 0.5, 0.0, 1, N);
    case CoordinateKind::D5:
      return discrete(kind, 0.5, 0.4, 1, N);
    case CoordinateKind::SinhPerturbed:
      return sinh_perturbed();
  }
  throw Error(ErrorKind::Domain, "unknown kind");
}

SinusoidalCoordinate SinusoidalCoordinate::with_d(double d) const {
  SinusoidalCoordinate c = *this;
  c.d_ = d;
  c.validate();
  return c;
}

SinusoidalCoordinate SinusoidalCoordinate::with_N(std::optional<int> N) const {
  SinusoidalCoordinate c = *this;
  c.N_ = N;
  c.validate();
  return c;
}

void SinusoidalCoordinate::validate() const {
  const std::string name = to_string(kind_);
  if (is_continuous()) {
    if (gamma_ == 0.0 || !std::isfinite(gamma_)) throw Error(ErrorKind::Domain, name + ": gamma must be nonzero");
    if (kind_ >= CoordinateKind::C5 && kind_ <= CoordinateKind::C8) {
      // r11 = 2cos(γ)-2 must lie strictly inside (-4, 0).
      double c = std::cos(gamma_);
      if (std::abs(c - 1.0) < 1e-12 || std::abs(c + 1.0) < 1e-12)
        throw Error(ErrorKind::Domain, name + ": gamma must not be a multiple of pi");
    }
    return;
  }
  if (N_ && *N_ < 0) throw Error(ErrorKind::Domain, name + ": N must be non-negative");
  if (kind_ == CoordinateKind::D3 || kind_ == CoordinateKind::D4 || kind_ == CoordinateKind::D5) {
    if (!(q_ > 0.0 && q_ < 1.0)) throw Error(ErrorKind::Domain, name + ": q must lie in (0,1)");
  }
  if (kind_ == CoordinateKind::D2 || kind_ == CoordinateKind::D5) {
    if (eps_prime_ != 1 && eps_prime_ != -1) throw Error(ErrorKind::Domain, name + ": eps_prime must be +1 or -1");
    if (kind_ == CoordinateKind::D2) {
      if (eps_prime_ == 1 && !(d_ > -1.0)) throw Error(ErrorKind::Domain, "D2 with eps'=+1 needs d > -1");
      if (eps_prime_ == -1) {
        if (!N_) throw Error(ErrorKind::Domain, "D2 with eps'=-1 needs a finite N");
        if (!(d_ < -*N_)) throw Error(ErrorKind::Domain, "D2 with eps'=-1 needs d < -N");
      }
    } else {
      if (eps_prime_ == 1 && !(d_ < 1.0 / q_)) throw Error(ErrorKind::Domain, "D5 with eps'=+1 needs d < 1/q");
      if (eps_prime_ == -1) {
        if (!N_) throw Error(ErrorKind::Domain, "D5 with eps'=-1 needs a finite N");
        if (!(d_ > std::pow(q_, -*N_))) throw Error(ErrorKind::Domain, "D5 with eps'=-1 needs d > q^-N");
      }
    }
  }
}

std::pair<double, double> SinusoidalCoordinate::sample_interval() const {
  switch (kind_) {
    case CoordinateKind::C1:
      return {-3.0, 3.0};
    case CoordinateKind::C2:
    case CoordinateKind::C7:
      return {0.1, 3.0};
    case CoordinateKind::C3:
      return {0.05, kPi - 0.05};
    case CoordinateKind::C4:
      return {-kPi / 2 + 0.05, kPi / 2 - 0.05};
    case CoordinateKind::C5:
    case CoordinateKind::C6:
    case CoordinateKind::C8:
      return {-2.0, 2.0};
    case CoordinateKind::SinhPerturbed:
      return {-0.5, 0.5};
    default: {
      int hi = N_ ? std::max(*N_, 1) : 20;
      return {0.0, static_cast<double>(hi)};
    }
  }
}

std::string SinusoidalCoordinate::describe() const {
  std::ostringstream os;
  os << to_string(kind_) << ": ";
  switch (kind_) {
    case CoordinateKind::C1: os << "eta(x) = x"; break;
    case CoordinateKind::C2: os << "eta(x) = x^2"; break;
    case CoordinateKind::C3: os << "eta(x) = 1 - cos x"; break;
    case CoordinateKind::C4: os << "eta(x) = sin x"; break;
    case CoordinateKind::C5: os << "eta(x) = 1 - e^-x"; break;
    case CoordinateKind::C6: os << "eta(x) = e^x - 1"; break;
    case CoordinateKind::C7: os << "eta(x) = cosh x - 1"; break;
    case CoordinateKind::C8: os << "eta(x) = sinh x"; break;
    case CoordinateKind::D1: os << "eta(x) = x"; break;
    case CoordinateKind::D2: os << "eta(x) = eps' x (x + d)"; break;
    case CoordinateKind::D3: os << "eta(x) = 1 - q^x"; break;
    case CoordinateKind::D4: os << "eta(x) = q^-x - 1"; break;
    case CoordinateKind::D5: os << "eta(x) = eps' (q^-x - 1)(1 - d q^x)"; break;
    case CoordinateKind::SinhPerturbed: os << "eta(x) = x + sinh(2 pi x) [nonstandard]"; break;
  }
  if (is_continuous()) {
    os << ", gamma=" << format_scalar(gamma_);
  } else {
    if (kind_ >= CoordinateKind::D3) os << ", q=" << format_scalar(q_);
    if (kind_ == CoordinateKind::D2 || kind_ == CoordinateKind::D5)
      os << ", d=" << format_scalar(d_) << ", eps'=" << eps_prime_;
    if (N_) os << ", N=" << *N_;
  }
  return os.str();
}

std::complex<double> eta_eval(const SinusoidalCoordinate& c, std::complex<double> x) {
  using std::exp;
  const double ln_q = std::log(c.q());
  switch (c.kind()) {
    case CoordinateKind::C1:
    case CoordinateKind::D1:
      return x;
    case CoordinateKind::C2:
      return x * x;
    case CoordinateKind::C3:
      return 1.0 - std::cos(x);
    case CoordinateKind::C4:
      return std::sin(x);
    case CoordinateKind::C5:
      return 1.0 - exp(-x);
    case CoordinateKind::C6:
      return exp(x) - 1.0;
    case CoordinateKind::C7:
      return std::cosh(x) - 1.0;
    case CoordinateKind::C8:
      return std::sinh(x);
    case CoordinateKind::D2:
      return static_cast<double>(c.eps_prime()) * x * (x + c.d());
    case CoordinateKind::D3:
      return 1.0 - exp(x * ln_q);
    case CoordinateKind::D4:
      return exp(-x * ln_q) - 1.0;
    case CoordinateKind::D5:
      return static_cast<double>(c.eps_prime()) * (exp(-x * ln_q) - 1.0) * (1.0 - c.d() * exp(x * ln_q));
    case CoordinateKind::SinhPerturbed:
      return x + std::sinh(2.0 * kPi * x);
  }
  return x;
}

RationalComplex eta_eval(const SinusoidalCoordinate& c, const RationalComplex& x) {
  switch (c.kind()) {
    case CoordinateKind::C1:
    case CoordinateKind::D1:
      return x;
    case CoordinateKind::C2:
      return x * x;
    case CoordinateKind::D2:
      return Rational(c.eps_prime()) * (x * (x + RationalComplex(Rational(c.d()))));
    default:
      throw Error(ErrorKind::Regime,
                  std::string("exact evaluation needs a polynomial coordinate, got ") + to_string(c.kind()));
  }
}

template <>
std::complex<double> shift_arg<double>(const SinusoidalCoordinate& c, const std::complex<double>& x,
                                       const double& k) {
  if (c.is_discrete()) return x + k;
  return x - std::complex<double>(0.0, k * c.gamma());
}

template <>
RationalComplex shift_arg<Rational>(const SinusoidalCoordinate& c, const RationalComplex& x, const Rational& k) {
  if (c.is_discrete()) return x + RationalComplex(k);
  return x - RationalComplex(Rational(0), k * Rational(c.gamma()));
}

template <>
void require_backend<double>(const SinusoidalCoordinate&) {}

template <>
void require_backend<Rational>(const SinusoidalCoordinate& c) {
  if (!c.is_linear_regime() || !c.is_polynomial()) {
    throw Error(ErrorKind::Regime, std::string("exact backend needs a linear-regime polynomial coordinate, got ") +
                                       to_string(c.kind()));
  }
}

template <>
ShiftParams<double> shift_params<double>(const SinusoidalCoordinate& c) {
  ShiftParams<double> p;
  p.r11 = closed_form_r11(c);
  p.eta_mib = eta_eval(c, shift_arg<double>(c, {0.0, 0.0}, 1.0));
  p.eta_pib = eta_eval(c, shift_arg<double>(c, {0.0, 0.0}, -1.0));
  p.rm12 = (p.eta_mib + p.eta_pib).real();
  p.eta_product = (p.eta_mib * p.eta_pib).real();
  return p;
}

template <>
ShiftParams<Rational> shift_params<Rational>(const SinusoidalCoordinate& c) {
  require_backend<Rational>(c);
  ShiftParams<Rational> p;
  p.r11 = 0;
  p.eta_mib = eta_eval(c, shift_arg<Rational>(c, RationalComplex(0), Rational(1)));
  p.eta_pib = eta_eval(c, shift_arg<Rational>(c, RationalComplex(0), Rational(-1)));
  p.rm12 = (p.eta_mib + p.eta_pib).real();
  p.eta_product = (p.eta_mib * p.eta_pib).real();
  return p;
}

BracketContext bracket_context(const SinusoidalCoordinate& c) { return BracketContext(closed_form_r11(c)); }

template <class T>
GTable<T>::GTable(const ShiftParams<T>& p, int n_max) {
  if (n_max < -1) throw Error(ErrorKind::Domain, "GTable needs n_max >= -1");
  const PolyEta<T> a{p.rm12, T(2) + p.r11};
  const PolyEta<T> b{p.eta_product, -p.rm12, T(1)};
  polys_.reserve(static_cast<size_t>(n_max) + 2);
  polys_.emplace_back();                             // g_{-1}
  polys_.push_back(PolyEta<T>::constant(T(1)));  // g_0
  for (int n = 0; n + 1 <= n_max; ++n) {
    const auto& gn = polys_[static_cast<size_t>(n) + 1];
    const auto& gm = polys_[static_cast<size_t>(n)];
    polys_.push_back(a * gn - b * gm);
  }
}

template <class T>
const PolyEta<T>& GTable<T>::poly(int n) const {
  if (n < -1 || n > n_max()) throw Error(ErrorKind::Domain, "g_n index out of table range: " + std::to_string(n));
  return polys_[static_cast<size_t>(n) + 1];
}

template <class T>
T GTable<T>::coeff(int n, int k) const {
  if (n < 0 || k < 0 || k > n) return T(0);
  return poly(n)[n - k];
}

template <class T>
std::vector<T> g_coeffs(const SinusoidalCoordinate& coord, int n) {
  if (n < -1) throw Error(ErrorKind::Domain, "g_coeffs needs n >= -1");
  GTable<T> table(shift_params<T>(coord), std::max(n, 0));
  std::vector<T> out;
  for (int k = 0; k <= n; ++k) out.push_back(table.coeff(n, k));
  return out;
}

template <class T>
std::vector<complex_t<T>> sample_points(const SinusoidalCoordinate& coord, unsigned long seed, int n_real,
                                        int n_complex) {
  std::mt19937_64 rng(seed);
  std::vector<complex_t<T>> out;
  auto to_field = [](double re, double im) -> complex_t<T> {
    if constexpr (is_exact_v<T>) {
      // Small dyadic denominators keep exact arithmetic cheap.
      return RationalComplex(Rational(std::round(re * 256.0)) / 256, Rational(std::round(im * 256.0)) / 256);
    } else {
      return {re, im};
    }
  };
  if (coord.is_discrete()) {
    int hi = coord.N() ? std::min(*coord.N() - 1, 20) : 20;
    if (coord.kind() == CoordinateKind::D3) {
      // η saturates at 1; lattice differences q^x drown in rounding.
      hi = std::min(hi, std::max(1, static_cast<int>(std::log(0.1) / std::log(coord.q()))));
    }
    for (int x = 1; x <= hi && static_cast<int>(out.size()) < n_real; ++x) out.push_back(to_field(x, 0.0));
    // Identities are analytic in x; pad with off-lattice real points when the
    // lattice is too small.
    const double top = std::max(3.0, static_cast<double>(std::max(hi, 1)));
    const double bottom = coord.kind() == CoordinateKind::D3 ? -5.0 : 0.25;
    std::uniform_real_distribution<double> u(bottom, top);
    while (static_cast<int>(out.size()) < n_real) {
      double x = u(rng);
      if (std::abs(x - std::round(x)) < 0.05) continue;
      out.push_back(to_field(x, 0.0));
    }
    return out;
  }
  auto [lo, hi] = coord.sample_interval();
  const double margin = 0.02 * (hi - lo);
  std::uniform_real_distribution<double> ure(lo + margin, hi - margin);
  for (int i = 0; i < n_real; ++i) out.push_back(to_field(ure(rng), 0.0));
  const double span = 0.3 * std::min(std::abs(coord.gamma()), 1.0);
  std::uniform_real_distribution<double> uim(0.1 * span, span);
  std::bernoulli_distribution sign;
  for (int i = 0; i < n_complex; ++i) {
    double im = uim(rng) * (sign(rng) ? 1.0 : -1.0);
    out.push_back(to_field(ure(rng), im));
  }
  return out;
}

template class GTable<double>;
template class GTable<Rational>;
template std::vector<double> g_coeffs<double>(const SinusoidalCoordinate&, int);
template std::vector<Rational> g_coeffs<Rational>(const SinusoidalCoordinate&, int);
template std::vector<std::complex<double>> sample_points<double>(const SinusoidalCoordinate&, unsigned long, int, int);
template std::vector<RationalComplex> sample_points<Rational>(const SinusoidalCoordinate&, unsigned long, int, int);

}  // namespace solvkit
