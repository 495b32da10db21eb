#include "solvkit/potential.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "solvkit/error.hpp"

namespace solvkit {

namespace {

template <class T>
complex_t<T> eta_at(const SinusoidalCoordinate& coord, const complex_t<T>& x) {
  return eta_eval(coord, x);
}

template <class T>
complex_t<T> shifted_eta(const SinusoidalCoordinate& coord, const complex_t<T>& x, int k) {
  return eta_eval(coord, shift_arg<T>(coord, x, T(k)));
}

/// (η, η(x∓iβ), η(x±iβ)) for the requested side.
template <class T>
struct EtaTriple {
  complex_t<T> e, s, t;
};

template <class T>
EtaTriple<T> eta_triple(const SinusoidalCoordinate& coord, const complex_t<T>& x, Side side) {
  const int k = side == Side::Plus ? 1 : -1;
  return {eta_at<T>(coord, x), shifted_eta<T>(coord, x, k), shifted_eta<T>(coord, x, -k)};
}

template <class T>
complex_t<T> cpow(const complex_t<T>& z, int n) {
  complex_t<T> r(T(1));
  for (int i = 0; i < n; ++i) r *= z;
  return r;
}

std::string describe_point(const std::complex<double>& z) {
  std::ostringstream os;
  os << format_scalar(z.real());
  if (z.imag() != 0.0) os << (z.imag() < 0 ? "-" : "+") << format_scalar(std::abs(z.imag())) << "i";
  return os.str();
}

}  // namespace

template <class T>
PotentialSpec<T>::PotentialSpec(int L) : L_(L) {
  if (L < 0) throw Error(ErrorKind::Domain, "potential degree L must be >= 0");
  v0_.assign(static_cast<size_t>(L) + 1, T(0));
  v1_.assign(static_cast<size_t>(L), T(0));
}

template <class T>
T PotentialSpec<T>::v(int k, int l) const {
  if (k < 0) return T(0);
  if (l == 0 && k <= L_) return v0_[static_cast<size_t>(k)];
  if (l == 1 && k + 1 <= L_) return v1_[static_cast<size_t>(k)];
  return T(0);
}

template <class T>
void PotentialSpec<T>::set(int k, int l, const T& value) {
  if (k < 0 || (l != 0 && l != 1) || k + l > L_) {
    throw Error(ErrorKind::Domain, "invalid potential key (" + std::to_string(k) + "," + std::to_string(l) +
                                       ") for L=" + std::to_string(L_));
  }
  (l == 0 ? v0_ : v1_)[static_cast<size_t>(k)] = value;
}

template <class T>
std::vector<std::pair<int, int>> PotentialSpec<T>::keys() const {
  std::vector<std::pair<int, int>> out;
  for (int k = 0; k <= L_; ++k) {
    out.emplace_back(k, 0);
    if (k + 1 <= L_) out.emplace_back(k, 1);
  }
  return out;
}

template <class T>
bool PotentialSpec<T>::is_zero() const {
  for (auto [k, l] : keys())
    if (!exactly_zero(v(k, l))) return false;
  return true;
}

template <class T>
double PotentialSpec<T>::max_abs() const {
  double m = 0.0;
  for (auto [k, l] : keys()) m = std::max(m, magnitude(v(k, l)));
  return m;
}

template <class T>
void PotentialSpec<T>::require_top_nonzero() const {
  T sum(0);
  sum += v(L_, 0) * v(L_, 0);
  if (L_ >= 1) sum += v(L_ - 1, 1) * v(L_ - 1, 1);
  if (exactly_zero(sum)) {
    throw Error(ErrorKind::ConstraintViolation,
                "top-degree coefficients v_{L,0}, v_{L-1,1} both vanish (L=" + std::to_string(L_) + ")");
  }
}

template <class T>
PotentialSpec<T> canonicalize(const RawPotential<T>& raw, int L, const SinusoidalCoordinate& coord) {
  const auto p = shift_params<T>(coord);
  std::map<std::pair<int, int>, T> work;
  int lmax = 0;
  for (const auto& [key, value] : raw) {
    auto [k, l] = key;
    if (k < 0 || l < 0) throw Error(ErrorKind::Domain, "negative potential key");
    if (k + l > L) {
      throw Error(ErrorKind::Domain, "key (" + std::to_string(k) + "," + std::to_string(l) + ") exceeds L=" +
                                         std::to_string(L));
    }
    work[key] += value;
    lmax = std::max(lmax, l);
  }
  const T two_r(T(2) + p.r11);
  for (int l = lmax; l >= 2; --l) {
    for (int k = 0; k + l <= L; ++k) {
      auto it = work.find({k, l});
      if (it == work.end()) continue;
      const T c = it->second;
      work.erase(it);
      // η^k s^l = η^k s^{l-2} (two_r η s + rm12 s - η^2 + rm12 η - P)
      work[{k + 1, l - 1}] += c * two_r;
      work[{k, l - 1}] += c * p.rm12;
      work[{k + 2, l - 2}] -= c;
      work[{k + 1, l - 2}] += c * p.rm12;
      work[{k, l - 2}] -= c * p.eta_product;
    }
  }
  PotentialSpec<T> out(L);
  for (const auto& [key, value] : work) out.set(key.first, key.second, value);
  return out;
}

template <class T>
complex_t<T> vtilde_eval(const PotentialSpec<T>& spec, const SinusoidalCoordinate& coord, const complex_t<T>& x,
                         Side side) {
  const auto tr = eta_triple<T>(coord, x, side);
  complex_t<T> acc(T(0));
  complex_t<T> ek(T(1));
  for (int k = 0; k <= spec.L(); ++k) {
    acc += complex_t<T>(spec.v(k, 0)) * ek;
    if (k + 1 <= spec.L()) acc += complex_t<T>(spec.v(k, 1)) * ek * tr.s;
    ek *= tr.e;
  }
  return acc;
}

template <class T>
complex_t<T> vtilde_eval(const RawPotential<T>& raw, const SinusoidalCoordinate& coord, const complex_t<T>& x,
                         Side side) {
  const auto tr = eta_triple<T>(coord, x, side);
  complex_t<T> acc(T(0));
  for (const auto& [key, value] : raw) acc += complex_t<T>(value) * cpow<T>(tr.e, key.first) * cpow<T>(tr.s, key.second);
  return acc;
}

template <class T>
complex_t<T> v_denominator(const SinusoidalCoordinate& coord, const complex_t<T>& x, Side side) {
  const auto tr = eta_triple<T>(coord, x, side);
  return (tr.s - tr.e) * (tr.s - tr.t);
}

template <class T>
complex_t<T> v_eval(const PotentialSpec<T>& spec, const SinusoidalCoordinate& coord, const complex_t<T>& x, Side side) {
  const auto tr = eta_triple<T>(coord, x, side);
  const complex_t<T> den = (tr.s - tr.e) * (tr.s - tr.t);
  bool singular = exactly_zero(den);
  if constexpr (!is_exact_v<T>) {
    const double ref = std::max({std::abs(tr.e), std::abs(tr.s), std::abs(tr.t), 1.0});
    singular = singular || std::abs(den) < 1e-14 * ref * ref;
  }
  if (singular) {
    throw Error(ErrorKind::SingularPoint,
                "V" + std::string(side == Side::Plus ? "+" : "-") + " denominator vanishes at x=" +
                    describe_point(to_complex_double(x)));
  }
  return vtilde_eval(spec, coord, x, side) / den;
}

template <class T>
T b_eval(const PotentialSpec<T>& spec, const SinusoidalCoordinate& coord, const T& x) {
  return real_part(v_eval(spec, coord, complex_t<T>(x), Side::Plus));
}

template <class T>
T d_eval(const PotentialSpec<T>& spec, const SinusoidalCoordinate& coord, const T& x) {
  return real_part(v_eval(spec, coord, complex_t<T>(x), Side::Minus));
}

template <class T>
double potential_scale(const PotentialSpec<T>& spec, const SinusoidalCoordinate& coord) {
  double eta_max = 1.0;
  for (const auto& x : sample_points<double>(coord, 0, 20, 5))
    eta_max = std::max(eta_max, std::abs(eta_eval(coord, x)));
  return std::max(spec.max_abs() * eta_max, 1e-300);
}

template <class T>
std::vector<int> positivity_violations(const PotentialSpec<T>& spec, const SinusoidalCoordinate& coord, int N) {
  std::vector<int> bad;
  for (int x = 0; x <= N; ++x) {
    bool ok = true;
    if (x <= N - 1 && !(b_eval<T>(spec, coord, T(x)) > T(0))) ok = false;
    if (x >= 1 && !(d_eval<T>(spec, coord, T(x)) > T(0))) ok = false;
    if (!ok) bad.push_back(x);
  }
  return bad;
}

template <class T>
PotentialSpec<T> apply_discrete_boundary(const PotentialSpec<T>& spec, const SinusoidalCoordinate& coord,
                                         std::optional<int> N) {
  if (!coord.is_discrete()) {
    throw Error(ErrorKind::Domain, std::string("boundary condition needs a discrete coordinate, got ") +
                                       to_string(coord.kind()));
  }
  PotentialSpec<T> out = spec;
  const T eta_m1 = real_part(eta_eval(coord, complex_t<T>(T(-1))));
  out.set(0, 0, -spec.v(0, 1) * eta_m1);
  if (!N) return out;
  if (*N < 0) throw Error(ErrorKind::Domain, "N must be non-negative");
  const T bN = b_eval<T>(out, coord, T(*N));
  bool vanishes = exactly_zero(bN);
  if constexpr (!is_exact_v<T>) vanishes = std::abs(bN) < 1e-10 * potential_scale(out, coord);
  if (!vanishes) {
    throw Error(ErrorKind::ConstraintViolation,
                "B(N) must vanish at N=" + std::to_string(*N) + ", got " + format_scalar(bN));
  }
  auto bad = positivity_violations(out, coord, *N);
  if (!bad.empty()) {
    std::string list;
    for (int x : bad) list += (list.empty() ? "" : ",") + std::to_string(x);
    throw Error(ErrorKind::Positivity, "B or D not positive at x=" + list);
  }
  return out;
}

PotentialSpec<double> fit_potential(const std::vector<PotentialSample>& plus_samples,
                                    const std::vector<PotentialSample>& minus_samples,
                                    const SinusoidalCoordinate& coord, int L) {
  if (L < 0) throw Error(ErrorKind::Domain, "L must be >= 0");
  PotentialSpec<double> shape(L);
  const auto keys = shape.keys();
  const int n_unknowns = static_cast<int>(keys.size());
  const int n_points = static_cast<int>(plus_samples.size() + minus_samples.size());
  if (n_points < 2 * L + 1) {
    throw Error(ErrorKind::Underdetermined, "need at least " + std::to_string(2 * L + 1) + " samples, got " +
                                                std::to_string(n_points));
  }
  // Each complex equation contributes its real and imaginary parts.
  Eigen::MatrixXd A(2 * n_points, n_unknowns);
  Eigen::VectorXd b(2 * n_points);
  int row = 0;
  auto add = [&](const PotentialSample& sample, Side side) {
    const auto tr = eta_triple<double>(coord, sample.x, side);
    const std::complex<double> rhs = sample.value * (tr.s - tr.e) * (tr.s - tr.t);
    for (int c = 0; c < n_unknowns; ++c) {
      auto [k, l] = keys[static_cast<size_t>(c)];
      std::complex<double> basis = std::pow(tr.e, k) * (l == 1 ? tr.s : 1.0);
      A(row, c) = basis.real();
      A(row + 1, c) = basis.imag();
    }
    b(row) = rhs.real();
    b(row + 1) = rhs.imag();
    row += 2;
  };
  for (const auto& s : plus_samples) add(s, Side::Plus);
  for (const auto& s : minus_samples) add(s, Side::Minus);

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  qr.setThreshold(1e-12);
  if (qr.rank() < n_unknowns) {
    throw Error(ErrorKind::Underdetermined, "sample system has rank " + std::to_string(qr.rank()) + " < " +
                                                std::to_string(n_unknowns));
  }
  Eigen::VectorXd sol = qr.solve(b);
  PotentialSpec<double> out(L);
  for (int c = 0; c < n_unknowns; ++c) out.set(keys[static_cast<size_t>(c)].first, keys[static_cast<size_t>(c)].second, sol(c));

  const double resid = (A * sol - b).cwiseAbs().maxCoeff();
  const double scale = std::max({potential_scale(out, coord), b.cwiseAbs().maxCoeff(), 1e-300});
  if (resid > 1e-8 * scale) {
    throw Error(ErrorKind::NotRepresentable,
                "samples are not reproduced by any degree-" + std::to_string(L) + " potential (residual " +
                    format_scalar(resid) + ")");
  }
  out.require_top_nonzero();
  return out;
}

#define SOLVKIT_INSTANTIATE(T)                                                                                 \
  template class PotentialSpec<T>;                                                                           \
  template PotentialSpec<T> canonicalize<T>(const RawPotential<T>&, int, const SinusoidalCoordinate&);       \
  template complex_t<T> vtilde_eval<T>(const PotentialSpec<T>&, const SinusoidalCoordinate&,                 \
                                       const complex_t<T>&, Side);                                           \
  template complex_t<T> vtilde_eval<T>(const RawPotential<T>&, const SinusoidalCoordinate&,                  \
                                       const complex_t<T>&, Side);                                           \
  template complex_t<T> v_eval<T>(const PotentialSpec<T>&, const SinusoidalCoordinate&, const complex_t<T>&, \
                                  Side);                                                                     \
  template complex_t<T> v_denominator<T>(const SinusoidalCoordinate&, const complex_t<T>&, Side);            \
  template T b_eval<T>(const PotentialSpec<T>&, const SinusoidalCoordinate&, const T&);                      \
  template T d_eval<T>(const PotentialSpec<T>&, const SinusoidalCoordinate&, const T&);                      \
  template double potential_scale<T>(const PotentialSpec<T>&, const SinusoidalCoordinate&);                  \
  template std::vector<int> positivity_violations<T>(const PotentialSpec<T>&, const SinusoidalCoordinate&,   \
                                                     int);                                                   \
  template PotentialSpec<T> apply_discrete_boundary<T>(const PotentialSpec<T>&, const SinusoidalCoordinate&, \
                                                       std::optional<int>);

SOLVKIT_INSTANTIATE(double)
SOLVKIT_INSTANTIATE(Rational)

#undef SOLVKIT_INSTANTIATE

}  // namespace solvkit
