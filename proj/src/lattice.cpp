#include "solvkit/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "solvkit/error.hpp"
#include "solvkit/polyop.hpp"

namespace solvkit {

void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
  const double cut = 1e-12 * v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > cut) {
      if (v(i) < 0) v = -v;
      return;
    }
  }
}

namespace {

void require_discrete(const SinusoidalCoordinate& coord) {
  if (!coord.is_discrete()) {
    throw Error(ErrorKind::Domain,
                std::string("lattice models need a discrete coordinate, got ") + to_string(coord.kind()));
  }
}

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::abs(a.dot(b)) / (na * nb);
}

Eigen::VectorXd phi0_times_poly(const LatticeModel& m, const std::vector<double>& coeffs) {
  Eigen::VectorXd out(m.size());
  for (int x = 0; x < m.size(); ++x) {
    double p = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) p = p * m.eta[static_cast<size_t>(x)] + *it;
    out(x) = m.phi0_normalized[static_cast<size_t>(x)] * p;
  }
  return out;
}

}  // namespace

template <class T>
std::vector<T> groundstate_squared(const PotentialSpec<T>& spec, const SinusoidalCoordinate& coord, int N) {
  require_discrete(coord);
  if (N < 0) throw Error(ErrorKind::Domain, "N must be non-negative");
  require_backend<T>(coord);
  std::vector<T> out{T(1)};
  for (int y = 0; y < N; ++y) {
    const T b = b_eval<T>(spec, coord, T(y));
    const T d = d_eval<T>(spec, coord, T(y + 1));
    if (exactly_zero(d)) throw Error(ErrorKind::Positivity, "D(" + std::to_string(y + 1) + ") = 0 inside the lattice");
    out.push_back(out.back() * b / d);
  }
  return out;
}

LatticeModel build_lattice(const PotentialSpec<double>& spec, const SinusoidalCoordinate& coord,
                           std::optional<int> N_arg, std::optional<int> K_tr) {
  require_discrete(coord);
  std::optional<int> N = N_arg ? N_arg : coord.N();
  if (N && K_tr) throw Error(ErrorKind::Domain, "give either N or K_tr, not both");
  if (!N && !K_tr) throw Error(ErrorKind::Domain, "a semi-infinite model needs a truncation K_tr");
  if (K_tr && *K_tr < 1) throw Error(ErrorKind::Domain, "K_tr must be >= 1");

  const SinusoidalCoordinate co = N ? coord.with_N(N) : coord;
  LatticeModel m{co, apply_discrete_boundary(spec, co, N), N, K_tr, K_tr.has_value(), {}, {}, {}, {}, {}, {}, {},
                 0.0, 0.0, 0.0, {}};
  if (K_tr) {
    auto bad = positivity_violations(m.spec, co, *K_tr);
    if (!bad.empty()) {
      std::string list;
      for (int x : bad) list += (list.empty() ? "" : ",") + std::to_string(x);
      throw Error(ErrorKind::Positivity, "B or D not positive at x=" + list);
    }
  }
  const int last = N ? *N : *K_tr;
  const int n = last + 1;
  for (int x = 0; x <= last; ++x) {
    m.eta.push_back(eta_eval(co, std::complex<double>(x)).real());
    m.B.push_back(b_eval<double>(m.spec, co, x));
    m.D.push_back(d_eval<double>(m.spec, co, x));
  }
  m.D[0] = 0.0;
  m.B[static_cast<size_t>(last)] = 0.0;
  if (K_tr) m.notes.push_back("truncated at K_tr=" + std::to_string(*K_tr) + " with a hard wall; spectrum is approximate");

  m.phi0.assign(static_cast<size_t>(n), 1.0);
  for (int x = 0; x < last; ++x) {
    m.phi0[static_cast<size_t>(x) + 1] = m.phi0[static_cast<size_t>(x)] *
                                         std::sqrt(m.B[static_cast<size_t>(x)] / m.D[static_cast<size_t>(x) + 1]);
  }
  double norm = 0.0;
  for (double p : m.phi0) norm += p * p;
  norm = std::sqrt(norm);
  for (double p : m.phi0) m.phi0_normalized.push_back(p / norm);
  m.H = Eigen::MatrixXd::Zero(n, n);
  m.A = Eigen::MatrixXd::Zero(n, n);
  for (int x = 0; x <= last; ++x) {
    const auto ux = static_cast<size_t>(x);
    m.H(x, x) = m.B[ux] + m.D[ux];
    m.A(x, x) = std::sqrt(m.B[ux]);
    if (x < last) {
      const double off = -std::sqrt(m.B[ux] * m.D[ux + 1]);
      m.H(x, x + 1) = off;
      m.H(x + 1, x) = off;
      m.A(x, x + 1) = -std::sqrt(m.D[ux + 1]);
    }
  }
  const double hmax = std::max(1.0, m.H.cwiseAbs().maxCoeff());
  m.factor_residual = (m.H - m.A.transpose() * m.A).cwiseAbs().maxCoeff() / hmax;
  if (m.factor_residual > 1e-12) {
    throw Error(ErrorKind::ConstraintViolation, "H != A^T A (residual " + format_scalar(m.factor_residual) + ")");
  }
  const Eigen::VectorXd phi = Eigen::Map<const Eigen::VectorXd>(m.phi0_normalized.data(), n);
  const Eigen::VectorXd Hphi = m.H * phi;
  for (int x = 0; x <= last; ++x) {
    const double row = (m.H.row(x).cwiseAbs() * phi.cwiseAbs())(0);
    if (row > 0) m.zero_mode_residual = std::max(m.zero_mode_residual, std::abs(Hphi(x)) / row);
  }
  if (m.zero_mode_residual > 1e-12) {
    throw Error(ErrorKind::ConstraintViolation,
                "H phi0 != 0 (residual " + format_scalar(m.zero_mode_residual) + ")");
  }
  if (K_tr) {
    for (int k = 0; k < std::min(kTailLevels, n); ++k) {
      const auto P = lattice_eigenpoly_values(m, k);
      double nrm = 0.0;
      for (int x = 0; x <= last; ++x) {
        const double psi = m.phi0[static_cast<size_t>(x)] * P[static_cast<size_t>(x)];
        nrm += psi * psi;
      }
      const double t = m.phi0.back() * P.back();
      m.tail = std::max(m.tail, t * t / nrm);
    }
    if (m.tail >= 1e-12) {
      throw Error(ErrorKind::ConstraintViolation, "eigenstate tail at K_tr=" + std::to_string(*K_tr) + " is " +
                                                      format_scalar(m.tail) + " (need < 1e-12)");
    }
  }
  return m;
}

std::vector<double> groundstate(const LatticeModel& model) { return model.phi0; }

std::vector<double> lattice_eigenpoly_values(const LatticeModel& model, int n, double* cancellation) {
  using F = boost::multiprecision::cpp_bin_float_50;
  const int size = model.size();
  if (n < 0 || n >= size) throw Error(ErrorKind::Domain, "level " + std::to_string(n) + " outside the lattice");
  const auto& eta = model.eta;
  // Newton basis φ_k(η) = Π_{j<k} (η - η(j)); H̃ φ_k = E(k) φ_k + b_k φ_{k-1}.
  // The sum at large x cancels heavily, hence the wide accumulator.
  auto newton = [&](int k, int x) {
    F p = 1;
    for (int j = 0; j < k; ++j) p *= F(eta[static_cast<size_t>(x)]) - F(eta[static_cast<size_t>(j)]);
    return p;
  };
  std::vector<F> E(static_cast<size_t>(n) + 1);
  double scale = 1.0;
  for (int k = 0; k <= n; ++k) {
    const double e = energy(model.spec, model.coord, k);
    E[static_cast<size_t>(k)] = e;
    scale = std::max(scale, std::abs(e));
  }
  std::vector<F> c(static_cast<size_t>(n) + 1, F(0));
  c[static_cast<size_t>(n)] = 1;
  for (int j = n - 1; j >= 0; --j) {
    const F gap = E[static_cast<size_t>(n)] - E[static_cast<size_t>(j)];
    if (abs(gap) <= 1e-12 * scale) {
      throw Error(ErrorKind::Degeneracy, "E(" + std::to_string(j) + ") = E(" + std::to_string(n) + ")");
    }
    const F b = -F(model.B[static_cast<size_t>(j)]) * newton(j + 1, j + 1) / newton(j, j);
    c[static_cast<size_t>(j)] = c[static_cast<size_t>(j) + 1] * b / gap;
  }
  std::vector<double> out(static_cast<size_t>(size), 0.0);
  double worst_terms = 0.0, psi_max = 0.0;
  for (int x = 0; x < size; ++x) {
    F acc = 0, mag = 0;
    for (int k = 0; k <= std::min(n, x); ++k) {
      const F t = c[static_cast<size_t>(k)] * newton(k, x);
      acc += t;
      mag += abs(t);
    }
    out[static_cast<size_t>(x)] = acc.convert_to<double>();
    const double w = model.phi0[static_cast<size_t>(x)];
    worst_terms = std::max(worst_terms, w * mag.convert_to<double>());
    psi_max = std::max(psi_max, std::abs(w * out[static_cast<size_t>(x)]));
  }
  if (cancellation) *cancellation = psi_max > 0.0 ? worst_terms / psi_max : 0.0;
  return out;
}

LatticeSpectrum spectrum_check(const LatticeModel& model, int levels) {
  LatticeSpectrum out;
  CheckReport& rep = out.report;
  rep.check = "lattice_spectrum";
  rep.tolerance = 1e-8;
  const int n = model.size();
  if (levels < 0) levels = model.approximate ? std::min(5, n) : n;
  levels = std::min(levels, n);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(model.H);
  out.eigenvectors = es.eigenvectors();
  for (int i = 0; i < n; ++i) {
    out.computed.push_back(es.eigenvalues()(i));
    fix_sign(out.eigenvectors.col(i));
  }
  out.min_eigenvalue = out.computed.front();
  for (int k = 0; k < n; ++k) out.expected.push_back(energy(model.spec, model.coord, k));

  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return out.expected[static_cast<size_t>(a)] < out.expected[static_cast<size_t>(b)];
  });
  // Level k sits at position rank[k] of the ascending spectrum.
  std::vector<int> rank(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) rank[static_cast<size_t>(order[static_cast<size_t>(i)])] = i;

  double scale = 1.0;
  for (double e : out.expected) scale = std::max(scale, std::abs(e));
  double eig_err = 0.0;
  for (int i = 0; i < levels; ++i) {
    const double want = out.expected[static_cast<size_t>(order[static_cast<size_t>(i)])];
    eig_err = std::max(eig_err, std::abs(out.computed[static_cast<size_t>(i)] - want) / scale);
  }

  double vec_err = 0.0, orth_err = 0.0, worst_cancel = 1.0;
  std::vector<Eigen::VectorXd> psi;
  try {
    for (int k = 0; k < n && static_cast<int>(psi.size()) < n; ++k) {
      if (rank[static_cast<size_t>(k)] >= levels) continue;
      double cancel = 0.0;
      const auto P = lattice_eigenpoly_values(model, k, &cancel);
      worst_cancel = std::max(worst_cancel, cancel);
      psi.push_back(Eigen::Map<const Eigen::VectorXd>(P.data(), n).cwiseProduct(
          Eigen::Map<const Eigen::VectorXd>(model.phi0.data(), n)));
      const Eigen::VectorXd v = out.eigenvectors.col(rank[static_cast<size_t>(k)]);
      vec_err = std::max(vec_err, 1.0 - cosine(psi.back(), v));
    }
    for (size_t a = 0; a < psi.size(); ++a)
      for (size_t b = a + 1; b < psi.size(); ++b) orth_err = std::max(orth_err, cosine(psi[a], psi[b]));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Degeneracy) throw;
    rep.notes.push_back(e.what());
    vec_err = orth_err = 1.0;
  }

  rep.components = {{"eigenvalues", eig_err},
                    {"eigenvectors", vec_err},
                    {"orthogonality", orth_err},
                    {"semidefinite", std::abs(out.min_eigenvalue) / scale}};
  rep.samples_used = levels;
  rep.max_residual = eig_err;
  rep.pass = eig_err <= 1e-8 && vec_err <= 1e-10 && orth_err <= 1e-10 * scale && std::abs(out.min_eigenvalue) <= 1e-12 * scale;
  if (worst_cancel > 1e4) {
    rep.notes.push_back("P_n(eta(x)) sums cancel by a factor " + format_scalar(worst_cancel) +
                        "; eigenvector comparison limited to about 1e-16 times that");
  }
  if (model.approximate) rep.notes.push_back("lowest " + std::to_string(levels) + " levels of a truncated model");
  return out;
}

QesLatticeReport qes_lattice(const LatticeModel& model, const QesModel<double>& qes) {
  const int L = qes.spec.L();
  if (L != 3 && L != 4) throw Error(ErrorKind::Unsupported, "QES lattice needs L = 3 or 4");
  if (!(model.spec == apply_discrete_boundary(qes.spec, model.coord))) {
    throw Error(ErrorKind::Domain, "lattice model and QES model were built from different specs");
  }
  if (qes.M > model.last()) {
    throw Error(ErrorKind::Domain, "M=" + std::to_string(qes.M) + " exceeds the lattice size N=" +
                                       std::to_string(model.last()));
  }
  QesLatticeReport out;
  CheckReport& rep = out.report;
  rep.check = "qes_lattice";
  rep.tolerance = 1e-7;

  const int n = model.size();
  Eigen::MatrixXd Hp = model.H;
  for (int x = 0; x < n; ++x) {
    const double e = model.eta[static_cast<size_t>(x)];
    Hp(x, x) -= L == 3 ? qes.e0 * e : qes.e0 * e * e + qes.e1.value_or(0.0) * e;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Hp, Eigen::EigenvaluesOnly);
  for (int i = 0; i < n; ++i) out.h_prime_eigenvalues.push_back(es.eigenvalues()(i));
  out.min_eigenvalue = out.h_prime_eigenvalues.front();

  const auto qm = qes_matrix(qes, model.coord);
  const int m = qm.entries.rows();
  Eigen::MatrixXd Q(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) Q(i, j) = qm.entries(i, j);
  Eigen::EigenSolver<Eigen::MatrixXd> qs(Q);

  double scale = 1.0;
  for (double e : out.h_prime_eigenvalues) scale = std::max(scale, std::abs(e));
  const double hnorm = std::max(1.0, Hp.cwiseAbs().maxCoeff());
  double eig_err = 0.0, vec_err = 0.0;
  for (int i = 0; i < m; ++i) {
    const std::complex<double> lam = qs.eigenvalues()(i);
    out.qes_eigenvalues.push_back(lam);
    if (std::abs(lam.imag()) > 1e-9 * scale) rep.notes.push_back("complex QES eigenvalue " + format_scalar(lam.real()) + (lam.imag() < 0 ? "-" : "+") +
                                                        format_scalar(std::abs(lam.imag())) + "i");
    int best = 0;
    for (int j = 1; j < n; ++j) {
      if (std::abs(out.h_prime_eigenvalues[static_cast<size_t>(j)] - lam) <
          std::abs(out.h_prime_eigenvalues[static_cast<size_t>(best)] - lam))
        best = j;
    }
    out.matched.push_back(best);
    eig_err = std::max(eig_err, std::abs(out.h_prime_eigenvalues[static_cast<size_t>(best)] - lam) / scale);

    // Eigenvector φ0 p(η) with p from the QES matrix, rotated to be real.
    Eigen::VectorXcd pc = qs.eigenvectors().col(i);
    Eigen::Index arg = 0;
    pc.cwiseAbs().maxCoeff(&arg);
    pc /= pc(arg);
    std::vector<double> c(static_cast<size_t>(m));
    for (int j = 0; j < m; ++j) c[static_cast<size_t>(j)] = pc(j).real();
    const Eigen::VectorXd psi = phi0_times_poly(model, c);
    const double r = (Hp * psi - lam.real() * psi).norm() / (hnorm * std::max(psi.norm(), 1e-300));
    vec_err = std::max(vec_err, r);
  }
  const Eigen::VectorXd phi = Eigen::Map<const Eigen::VectorXd>(model.phi0_normalized.data(), n);
  const double phi_res = (Hp * phi).norm() / hnorm;
  if (phi_res > 1e-10) rep.notes.push_back("phi0 is not an eigenvector of H' (|H' phi0| = " + format_scalar(phi_res) + ")");
  if (out.min_eigenvalue < -1e-12 * scale) {
    rep.notes.push_back("H' has negative eigenvalue " + format_scalar(out.min_eigenvalue));
  }
  rep.components = {{"qes_eigenvalues", eig_err}, {"qes_eigenvectors", vec_err}};
  rep.samples_used = m;
  rep.max_residual = std::max(eig_err, vec_err);
  rep.pass = eig_err <= 1e-7 && vec_err <= 1e-7;
  return out;
}

PotentialSpec<double> sample_admissible_spec(const SinusoidalCoordinate& coord, int L, int N, std::mt19937_64& rng,
                                             std::optional<int> qes_M, int max_attempts) {
  require_discrete(coord);
  if (L < 2) throw Error(ErrorKind::Domain, "L must be >= 2");
  if (N < 1) throw Error(ErrorKind::Domain, "N must be >= 1");
  const SinusoidalCoordinate co = coord.with_N(N);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    PotentialSpec<double> s(L);
    for (auto [k, l] : s.keys()) s.set(k, l, u(rng));
    if (L == 4 && qes_M) s.set(3, 1, qes_v31_required(s, co, *qes_M));
    s.set(1, 0, 0.0);
    s = apply_discrete_boundary(s, co);
    const double b0 = b_eval<double>(s, co, N);
    PotentialSpec<double> s1 = s;
    s1.set(1, 0, 1.0);
    const double b1 = b_eval<double>(s1, co, N) - b0;
    if (std::abs(b1) < 1e-12) continue;
    s.set(1, 0, -b0 / b1);
    try {
      return apply_discrete_boundary(s, co, N);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Positivity && e.kind() != ErrorKind::ConstraintViolation) throw;
    }
  }
  throw Error(ErrorKind::Positivity, "no admissible spec found in " + std::to_string(max_attempts) + " attempts");
}

template std::vector<double> groundstate_squared<double>(const PotentialSpec<double>&, const SinusoidalCoordinate&, int);
template std::vector<Rational> groundstate_squared<Rational>(const PotentialSpec<Rational>&,
                                                             const SinusoidalCoordinate&, int);

}  // namespace solvkit
