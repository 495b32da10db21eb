#include "solvkit/qes.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "solvkit/error.hpp"

namespace solvkit {

namespace {

template <class T>
T br(const BracketContext& ctx, long num, long den = 1) {
  return bracket<T>(ctx, T(num) / T(den));
}

template <class T>
bool nearly_equal(const T& a, const T& b, double scale) {
  if constexpr (is_exact_v<T>) {
    (void)scale;
    return a == b;
  } else {
    return std::abs(a - b) <= 1e-10 * std::max({1.0, scale, std::abs(a), std::abs(b)});
  }
}

void require_qes_degree(int L) {
  if (L != 3 && L != 4) {
    throw Error(ErrorKind::Unsupported, "QES construction exists for L = 3, 4 only, got L=" + std::to_string(L));
  }
}

template <class T>
void require_nonzero_bracket_M(const BracketContext& ctx, int M) {
  const T bm = br<T>(ctx, M);
  bool zero = exactly_zero(bm);
  if constexpr (!is_exact_v<T>) zero = std::abs(bm) < 1e-12;
  if (zero) throw Error(ErrorKind::SingularBracket, "[M] vanishes for M=" + std::to_string(M));
}

}  // namespace

template <class T>
T qes_compensation_generic(const PotentialSpec<T>& spec, const SinusoidalCoordinate& coord, int m, int M) {
  require_backend<T>(coord);
  GTable<T> table(shift_params<T>(coord), std::max(M, 1));
  T sum(0);
  for (int j = 0; j <= m; ++j) sum += emjn(spec, coord.epsilon(), table, m, j, M);
  return sum;
}

template <class T>
T qes_v31_required(const PotentialSpec<T>& spec, const SinusoidalCoordinate& coord, int M) {
  const auto ctx = bracket_context(coord);
  require_nonzero_bracket_M<T>(ctx, M);
  return -br<T>(ctx, M - 1) / br<T>(ctx, M) * spec.v(4, 0);
}

template <class T>
T qes_e0_closed(const PotentialSpec<T>& spec, const SinusoidalCoordinate& coord, int M) {
  require_qes_degree(spec.L());
  require_backend<T>(coord);
  const auto ctx = bracket_context(coord);
  const T eps(coord.epsilon());
  const T h = br<T>(ctx, 1, 2);
  if (spec.L() == 3) {
    return eps * br<T>(ctx, M, 2) / h * (br<T>(ctx, M - 1, 2) * spec.v(3, 0) + br<T>(ctx, M + 1, 2) * spec.v(2, 1));
  }
  require_nonzero_bracket_M<T>(ctx, M);
  return -eps * br<T>(ctx, M, 2) * br<T>(ctx, M - 1, 2) / (h * br<T>(ctx, M)) * spec.v(4, 0);
}

template <class T>
T qes_e1_closed(const PotentialSpec<T>& spec, const SinusoidalCoordinate& coord, int M) {
  if (spec.L() != 4) throw Error(ErrorKind::Unsupported, "e1(M) exists for L = 4 only");
  require_backend<T>(coord);
  const auto ctx = bracket_context(coord);
  require_nonzero_bracket_M<T>(ctx, M);
  const auto p = shift_params<T>(coord);
  const T eps(coord.epsilon());
  const T h = br<T>(ctx, 1, 2);
  const T base =
      eps * br<T>(ctx, M, 2) / h * (br<T>(ctx, M - 1, 2) * spec.v(3, 0) + br<T>(ctx, M + 1, 2) * spec.v(2, 1));
  T tail;
  if (ctx.regime() == Regime::Linear) {
    tail = -T(static_cast<long>(M) * (M - 1) * (M - 1)) / T(4);
  } else {
    const T hm = br<T>(ctx, M, 2);
    tail = (hm * hm - h * h * br<T>(ctx, M) * (br<T>(ctx, M - 1) + T(1))) / (p.r11 * h * h * br<T>(ctx, M));
  }
  return base + eps * p.rm12 * spec.v(4, 0) * tail;
}

template <class T>
QesModel<T> qes_build(const PotentialSpec<T>& spec, const SinusoidalCoordinate& coord, int M, V31Policy policy) {
  require_qes_degree(spec.L());
  require_backend<T>(coord);
  if (M < 0) throw Error(ErrorKind::Domain, "M must be >= 0");
  QesModel<T> model{spec, M, T(0), std::nullopt, {}};
  const double scale = potential_scale(spec, coord);

  if (spec.L() == 4) {
    const auto ctx = bracket_context(coord);
    require_nonzero_bracket_M<T>(ctx, M);
    const T v31 = spec.v(3, 1);
    if (exactly_zero(spec.v(4, 0)) && !exactly_zero(v31) && policy != V31Policy::AsGiven) {
      throw Error(ErrorKind::InconsistentConstraint, "v40 = 0 forces v31 = 0, got v31=" + format_scalar(v31));
    }
    const T wanted = qes_v31_required(spec, coord, M);
    switch (policy) {
      case V31Policy::Overwrite:
        if (!exactly_zero(v31) && !nearly_equal(v31, wanted, scale)) {
          model.warnings.push_back("v31=" + format_scalar(v31) + " overwritten by -[M-1]/[M] v40 = " +
                                   format_scalar(wanted));
        }
        model.spec.set(3, 1, wanted);
        break;
      case V31Policy::Require:
        if (!nearly_equal(v31, wanted, scale)) {
          throw Error(ErrorKind::InconsistentConstraint, "v31=" + format_scalar(v31) + " but -[M-1]/[M] v40 = " +
                                                             format_scalar(wanted));
        }
        break;
      case V31Policy::AsGiven:
        break;
    }
  }

  model.e0 = qes_compensation_generic(model.spec, coord, 0, M);
  if (spec.L() == 4) model.e1 = qes_compensation_generic(model.spec, coord, 1, M);

  const bool constraint_holds =
      spec.L() == 3 || nearly_equal(model.spec.v(3, 1), qes_v31_required(model.spec, coord, M), scale);
  if (constraint_holds) {
    const T e0c = qes_e0_closed(model.spec, coord, M);
    bool ok = nearly_equal(e0c, model.e0, scale);
    if (spec.L() == 4) ok = ok && nearly_equal(qes_e1_closed(model.spec, coord, M), *model.e1, scale);
    if (!ok) throw Error(ErrorKind::ConstraintViolation, "closed-form compensation disagrees with e_m(M) sums");
  }
  return model;
}

template <class T>
OperatorMatrix<T> qes_matrix(const QesModel<T>& model, const SinusoidalCoordinate& coord) {
  const int L = model.spec.L();
  require_qes_degree(L);
  const int M = model.M;
  const int K = M + L - 2;
  OperatorMatrix<T> full = ht_matrix(model.spec, coord, K);
  auto& H = full.entries;
  for (int n = 0; n + L - 2 <= K; ++n) {
    H(n + L - 2, n) -= model.e0;
    if (L == 4 && model.e1) H(n + 1, n) -= *model.e1;
  }
  double scale = 0.0;
  for (int m = 0; m <= K; ++m)
    for (int n = 0; n <= M; ++n) scale = std::max(scale, magnitude(H(m, n)));
  scale = std::max(scale, 1.0);
  for (int n = 0; n <= M; ++n) {
    for (int m = M + 1; m <= K; ++m) {
      const double r = magnitude(H(m, n));
      bool leak = !exactly_zero(H(m, n));
      if constexpr (!is_exact_v<T>) leak = r > 1e-12 * scale;
      if (leak) {
        throw QesBrokenError(n, m, r,
                             "H' eta^" + std::to_string(n) + " has an eta^" + std::to_string(m) +
                                 " component " + format_scalar(H(m, n)) + " outside V_" + std::to_string(M));
      }
    }
  }
  OperatorMatrix<T> out;
  out.K = M;
  out.L = L;
  out.flavor = Flavor::QesModified;
  out.entries = Matrix<T>(M + 1, M + 1);
  out.truncated.assign(static_cast<size_t>(M) + 1, false);
  for (int m = 0; m <= M; ++m)
    for (int n = 0; n <= M; ++n) out.entries(m, n) = H(m, n);
  return out;
}

template <class T>
std::vector<std::complex<double>> operator_eigenvalues(const OperatorMatrix<T>& m) {
  const int n = m.entries.rows();
  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = to_double(m.entries(i, j));
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
  std::vector<std::complex<double>> out;
  for (int i = 0; i < n; ++i) out.push_back(es.eigenvalues()(i));
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return out;
}

template <class T>
QesFeasibility<T> qes_feasible(int L, const BracketContext& ctx, int M) {
  if (L < 2) throw Error(ErrorKind::Domain, "qes_feasible needs L >= 2");
  QesFeasibility<T> out;
  out.feasible = L == 3 || L == 4;
  if (L >= 5) {
    std::array<std::array<T, 2>, 2> w{{{br<T>(ctx, M - 1), br<T>(ctx, M)},
                                       {br<T>(ctx, 2 * M - 3, 2), br<T>(ctx, 2 * M - 1, 2)}}};
    out.det = w[0][0] * w[1][1] - w[0][1] * w[1][0];
    out.witness = w;
  }
  return out;
}

#define SOLVKIT_INSTANTIATE(T)                                                                                    \
  template T qes_compensation_generic<T>(const PotentialSpec<T>&, const SinusoidalCoordinate&, int, int);       \
  template T qes_e0_closed<T>(const PotentialSpec<T>&, const SinusoidalCoordinate&, int);                       \
  template T qes_e1_closed<T>(const PotentialSpec<T>&, const SinusoidalCoordinate&, int);                       \
  template T qes_v31_required<T>(const PotentialSpec<T>&, const SinusoidalCoordinate&, int);                    \
  template QesModel<T> qes_build<T>(const PotentialSpec<T>&, const SinusoidalCoordinate&, int, V31Policy);      \
  template OperatorMatrix<T> qes_matrix<T>(const QesModel<T>&, const SinusoidalCoordinate&);                    \
  template std::vector<std::complex<double>> operator_eigenvalues<T>(const OperatorMatrix<T>&);                 \
  template QesFeasibility<T> qes_feasible<T>(int, const BracketContext&, int);

SOLVKIT_INSTANTIATE(double)
SOLVKIT_INSTANTIATE(Rational)

#undef SOLVKIT_INSTANTIATE

}  // namespace solvkit
