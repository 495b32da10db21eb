#include "solvkit/polyop.hpp"

#include <algorithm>
#include <cmath>

#include "solvkit/basicnum.hpp"
#include "solvkit/error.hpp"

namespace solvkit {

const char* to_string(Flavor flavor) {
  switch (flavor) {
    case Flavor::ES: return "ES";
    case Flavor::General: return "general";
    case Flavor::QesModified: return "QES-modified";
  }
  return "?";
}

namespace {

void require_L_at_least_2(int L) {
  if (L < 2) {
    throw Error(ErrorKind::Unsupported, "potentials with L < 2 are not handled (L=" + std::to_string(L) + ")");
  }
}

template <class T>
T half_bracket(const BracketContext& ctx, long num) {
  return bracket<T>(ctx, T(num) / T(2));
}

}  // namespace

template <class T>
T emjn(const PotentialSpec<T>& spec, int epsilon, const GTable<T>& table, int m, int j, int n) {
  if (m < 0 || j < 0 || n < 0) throw Error(ErrorKind::Domain, "emjn indices must be non-negative");
  T sum(0);
  for (int l = 0; l <= 1; ++l) {
    const int k = spec.L() - m + j - l;
    if (k < 0) continue;
    const T v = spec.v(k, l);
    if (exactly_zero(v)) continue;
    T inner(0);
    for (int r = 0; r <= n - 1; ++r) inner += table.coeff(n + l - r - 2, j);
    sum += v * inner;
  }
  return T(epsilon) * sum;
}

template <class T>
T emjn(const PotentialSpec<T>& spec, const SinusoidalCoordinate& coord, int m, int j, int n) {
  require_backend<T>(coord);
  GTable<T> table(shift_params<T>(coord), std::max(n, 1));
  return emjn(spec, coord.epsilon(), table, m, j, n);
}

template <class T>
T emjn_closed(const PotentialSpec<T>& spec, const SinusoidalCoordinate& coord, int m, int j, int n) {
  if (m < 0 || n < 0) throw Error(ErrorKind::Domain, "emjn indices must be non-negative");
  if (j != 0 && j != 1) throw Error(ErrorKind::Domain, "closed forms exist for j = 0, 1 only");
  require_backend<T>(coord);
  const auto ctx = bracket_context(coord);
  const auto p = shift_params<T>(coord);
  const T eps(coord.epsilon());
  const T h = half_bracket<T>(ctx, 1);
  T sum(0);
  if (j == 0) {
    for (int l = 0; l <= 1; ++l) sum += spec.v(spec.L() - m - l, l) * half_bracket<T>(ctx, n + 2 * l - 1);
    return eps * half_bracket<T>(ctx, n) / h * sum;
  }
  for (int l = 0; l <= 1; ++l) {
    const T v = spec.v(spec.L() - m + 1 - l, l);
    if (exactly_zero(v)) continue;
    T factor;
    if (ctx.regime() == Regime::Linear) {
      const long a = n + l - 1;
      factor = T(static_cast<long>(n) * (n + 2 * l - 2) * (a * a + l * l - 2 * l)) / T(12);
    } else {
      auto br = [&](long x) { return bracket<T>(ctx, T(x)); };
      factor = (T(n + l - 1) * br(n + l - 1) - T(l - 1) * br(l - 1) -
                half_bracket<T>(ctx, n + 2 * l - 2) * half_bracket<T>(ctx, n) / (h * h)) /
               p.r11;
    }
    sum += v * factor * p.rm12;
  }
  return eps * sum;
}

template <class T>
OperatorMatrix<T> ht_matrix(const PotentialSpec<T>& spec, const SinusoidalCoordinate& coord, int K) {
  require_L_at_least_2(spec.L());
  require_backend<T>(coord);
  if (K < 0) throw Error(ErrorKind::Domain, "truncation degree K must be >= 0");
  const int L = spec.L();
  GTable<T> table(shift_params<T>(coord), K + 1);
  OperatorMatrix<T> out;
  out.K = K;
  out.L = L;
  out.flavor = L == 2 ? Flavor::ES : Flavor::General;
  out.entries = Matrix<T>(K + 1, K + 1);
  out.truncated.assign(static_cast<size_t>(K) + 1, false);
  for (int n = 0; n <= K; ++n) {
    out.truncated[static_cast<size_t>(n)] = n + L - 2 > K;
    for (int m = 0; m <= std::min(K, n + L - 2); ++m) {
      const int mm = n + L - 2 - m;
      T entry(0);
      for (int j = std::max(n - 2 - m, 0); j <= mm; ++j) entry += emjn(spec, coord.epsilon(), table, mm, j, n);
      out.entries(m, n) = entry;
    }
  }
  return out;
}

template <class T>
PolyEta<T> ht_apply(const PotentialSpec<T>& spec, const SinusoidalCoordinate& coord, const PolyEta<T>& f) {
  require_L_at_least_2(spec.L());
  require_backend<T>(coord);
  if (f.is_zero()) return {};
  const int deg = f.degree();
  GTable<T> table(shift_params<T>(coord), deg + 1);
  PolyEta<T> out;
  for (int n = 1; n <= deg; ++n) {
    if (exactly_zero(f[n])) continue;
    PolyEta<T> col;
    for (auto [k, l] : spec.keys()) {
      const T v = spec.v(k, l);
      if (exactly_zero(v)) continue;
      for (int r = 0; r <= n - 1; ++r) {
        const int idx = n + l - r - 2;
        if (idx < 0) continue;
        col += table.poly(idx).shifted_up(k + r) * v;
      }
    }
    out += col * (T(coord.epsilon()) * f[n]);
  }
  return out;
}

template <class T>
T energy(const PotentialSpec<T>& spec, const SinusoidalCoordinate& coord, int n) {
  if (spec.L() != 2) {
    throw Error(ErrorKind::NotExactlySolvable, "closed-form spectrum needs L=2, got L=" + std::to_string(spec.L()));
  }
  if (n < 0) throw Error(ErrorKind::Domain, "energy level must be >= 0");
  require_backend<T>(coord);
  const auto ctx = bracket_context(coord);
  return T(coord.epsilon()) * half_bracket<T>(ctx, n) / half_bracket<T>(ctx, 1) *
         (spec.v(2, 0) * half_bracket<T>(ctx, n - 1) + spec.v(1, 1) * half_bracket<T>(ctx, n + 1));
}

template <class T>
std::vector<T> upper_eigenvector(const Matrix<T>& H, int n) {
  std::vector<T> c(static_cast<size_t>(n) + 1, T(0));
  c[static_cast<size_t>(n)] = T(1);
  const T En = H(n, n);
  for (int i = n - 1; i >= 0; --i) {
    const T gap = H(i, i) - En;
    bool degenerate = exactly_zero(gap);
    if constexpr (!is_exact_v<T>) degenerate = std::abs(gap) < 1e-12 * std::max(1.0, std::abs(En));
    if (degenerate) {
      throw Error(ErrorKind::Degeneracy, "E(" + std::to_string(i) + ") = E(" + std::to_string(n) + ") = " +
                                             format_scalar(En));
    }
    T acc(0);
    for (int j = i + 1; j <= n; ++j) acc += H(i, j) * c[static_cast<size_t>(j)];
    c[static_cast<size_t>(i)] = -acc / gap;
  }
  return c;
}

template <class T>
PolyEta<T> eigenpoly(const PotentialSpec<T>& spec, const SinusoidalCoordinate& coord, int n) {
  if (spec.L() != 2) {
    throw Error(ErrorKind::NotExactlySolvable, "eigenpolynomials need L=2, got L=" + std::to_string(spec.L()));
  }
  if (n < 0) throw Error(ErrorKind::Domain, "degree must be >= 0");
  const auto H = ht_matrix(spec, coord, n);
  return PolyEta<T>(upper_eigenvector(H.entries, n));
}

template <class T>
PointFn<T> poly_function(const SinusoidalCoordinate& coord, PolyEta<T> f) {
  return [coord, f = std::move(f)](const complex_t<T>& x) { return f(eta_eval(coord, x)); };
}

template <class T>
PointFn<T> ht_operator(const PotentialSpec<T>& spec, const SinusoidalCoordinate& coord, PointFn<T> f) {
  return [spec, coord, f = std::move(f)](const complex_t<T>& x) {
    const complex_t<T> fx = f(x);
    const complex_t<T> up = f(shift_arg<T>(coord, x, T(1)));
    const complex_t<T> down = f(shift_arg<T>(coord, x, T(-1)));
    const complex_t<T> vp = v_eval(spec, coord, x, Side::Plus);
    const complex_t<T> vm = v_eval(spec, coord, x, Side::Minus);
    return complex_t<T>(T(coord.epsilon())) * (vp * (up - fx) + vm * (down - fx));
  };
}

template <class T>
complex_t<T> apply_ht_pointwise(const PotentialSpec<T>& spec, const SinusoidalCoordinate& coord,
                                const PolyEta<T>& f, const complex_t<T>& x) {
  return ht_operator<T>(spec, coord, poly_function<T>(coord, f))(x);
}

#define SOLVKIT_INSTANTIATE(T)                                                                                  \
  template T emjn<T>(const PotentialSpec<T>&, int, const GTable<T>&, int, int, int);                         \
  template T emjn<T>(const PotentialSpec<T>&, const SinusoidalCoordinate&, int, int, int);                   \
  template T emjn_closed<T>(const PotentialSpec<T>&, const SinusoidalCoordinate&, int, int, int);            \
  template OperatorMatrix<T> ht_matrix<T>(const PotentialSpec<T>&, const SinusoidalCoordinate&, int);        \
  template PolyEta<T> ht_apply<T>(const PotentialSpec<T>&, const SinusoidalCoordinate&, const PolyEta<T>&);  \
  template T energy<T>(const PotentialSpec<T>&, const SinusoidalCoordinate&, int);                           \
  template std::vector<T> upper_eigenvector<T>(const Matrix<T>&, int);                                       \
  template PolyEta<T> eigenpoly<T>(const PotentialSpec<T>&, const SinusoidalCoordinate&, int);               \
  template PointFn<T> poly_function<T>(const SinusoidalCoordinate&, PolyEta<T>);                             \
  template PointFn<T> ht_operator<T>(const PotentialSpec<T>&, const SinusoidalCoordinate&, PointFn<T>);      \
  template complex_t<T> apply_ht_pointwise<T>(const PotentialSpec<T>&, const SinusoidalCoordinate&,          \
                                              const PolyEta<T>&, const complex_t<T>&);

SOLVKIT_INSTANTIATE(double)
SOLVKIT_INSTANTIATE(Rational)

#undef SOLVKIT_INSTANTIATE

}  // namespace solvkit
