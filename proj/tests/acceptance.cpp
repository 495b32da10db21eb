// Acceptance gate: prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails.

#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "oracles.hpp"
#include "solvkit/error.hpp"
#include "solvkit/lattice.hpp"
#include "solvkit/qes.hpp"
#include "solvkit/verify.hpp"

using namespace solvkit;

namespace {

struct Tally {
  bool pass = true;
  double worst = 0.0;
  std::string first_failure;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) first_failure = what;
    pass = pass && ok;
  }
  /// Records a residual against its tolerance.
  void residual(double r, double tol, const std::string& what) {
    worst = std::max(worst, r);
    require(r <= tol, what + " residual " + format_scalar(r));
  }
};

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", x);
  return buf;
}

PotentialSpec<double> krawtchouk() {
  PotentialSpec<double> s(2);
  s.with(2, 0, 1).with(1, 1, -1).with(1, 0, -2).with(0, 1, 2).with(0, 0, 2);
  return s;
}

PotentialSpec<double> l2_spec(const SinusoidalCoordinate& c, std::mt19937_64& rng) {
  auto s = oracle::random_spec<double>(2, rng);
  return c.is_discrete() ? apply_discrete_boundary(s, c) : s;
}

bool is_linear(CoordinateKind k) {
  return k == CoordinateKind::C1 || k == CoordinateKind::C2 || k == CoordinateKind::D1 || k == CoordinateKind::D2;
}

Tally coordinate_axioms() {
  Tally t;
  for (auto kind : all_coordinate_kinds()) {
    auto c = SinusoidalCoordinate::example(kind);
    auto r = verify_coordinate_axioms<double>(c);
    t.require(r.samples_used >= 20, std::string(to_string(kind)) + " samples");
    t.residual(r.max_residual, 1e-10, std::string(to_string(kind)) + " axioms");
    if (is_linear(kind)) {
      auto e = verify_coordinate_axioms<Rational>(c);
      t.require(e.pass && e.max_residual == 0.0, std::string(to_string(kind)) + " exact axioms");
    }
    if (c.is_continuous()) t.require(verify_half_shift(c).pass, std::string(to_string(kind)) + " half-shift");
  }
  auto x1 = SinusoidalCoordinate::sinh_perturbed();
  t.require(verify_coordinate_axioms<double>(x1).pass, "control axioms");
  t.require(!verify_half_shift(x1).pass, "control half-shift should fail");
  return t;
}

Tally g_coefficients() {
  Tally t;
  std::vector<SinusoidalCoordinate> coords = {SinusoidalCoordinate::discrete(CoordinateKind::D4, 0.5),
                                              SinusoidalCoordinate::continuous(CoordinateKind::C7, std::numbers::pi / 5)};
  for (const auto& c : coords) {
    auto p = shift_params<double>(c);
    auto ctx = bracket_context(c);
    GTable<double> g(p, 11);
    for (int n = 0; n <= 10; ++n) {
      t.residual(oracle::rel_err(g.coeff(n, 0), bracket<double>(ctx, n + 1.0)), 1e-12, "g0");
      t.residual(oracle::rel_err(g.coeff(n, 1), oracle::g1_closed(ctx, p.rm12, n)), 1e-10, "g1");
    }
    for (int m = -1; m <= 10; ++m)
      for (int n = m - 1; n <= 10; ++n) {
        double s = 0;
        for (int r = m; r <= n; ++r) s += g.coeff(r, 1);
        t.residual(oracle::rel_err(s, oracle::g1_sum_closed(ctx, p.rm12, m, n)), 1e-10, "sum g1");
      }
  }
  // linear regime, exactly
  auto d2 = SinusoidalCoordinate::example(CoordinateKind::D2);
  auto pe = shift_params<Rational>(d2);
  GTable<Rational> ge(pe, 11);
  for (int n = 0; n <= 10; ++n) {
    t.require(ge.coeff(n, 0) == n + 1, "exact g0");
    t.require(ge.coeff(n, 1) == Rational(n * (n + 1) * (2 * n + 1), 6) * pe.rm12, "exact g1");
  }
  const double grid[] = {-1.5, -0.5, 0.25, 1.0, 2.5};
  for (auto ctx : {BracketContext(0.0), BracketContext(0.5), BracketContext::from_alpha(Regime::Trigonometric, std::numbers::pi / 5)}) {
    auto b = [&](double v) { return bracket<double>(ctx, v); };
    for (double a : grid)
      for (double bb : grid)
        for (double c : grid) {
          double rhs = b(a - bb) * b(a + bb + c);
          t.residual(std::abs(b(a) * b(a + c) - b(bb) * b(bb + c) - rhs) / std::max(1.0, std::abs(rhs)), 1e-12,
                     "bracket identity");
        }
  }
  return t;
}

template <class T>
void exact_solvability_one(const SinusoidalCoordinate& c, std::mt19937_64& rng, Tally& t) {
  const int K = 6;
  for (int trial = 0; trial < 50; ++trial) {
    auto s = oracle::random_spec<T>(2, rng);
    auto H = ht_matrix(s, c, K);
    for (int n = 0; n <= K; ++n) {
      for (int m = n + 1; m <= K; ++m) t.require(exactly_zero(H(m, n)), "upper triangular");
      const T E = energy(s, c, n);
      if constexpr (is_exact_v<T>) {
        t.require(H(n, n) == E, "exact diagonal");
      } else {
        t.residual(oracle::rel_err(H(n, n), E), 1e-10, "diagonal");
      }
      PolyEta<T> p;
      try {
        p = eigenpoly(s, c, n);
      } catch (const Error& e) {
        t.require(e.kind() == ErrorKind::Degeneracy, "eigenpoly error");
        continue;
      }
      auto det = oracle::eigenpoly_det(H.entries, n);
      if constexpr (is_exact_v<T>) {
        t.require(ht_apply(s, c, p) == p * E, "exact eigen-relation");
        t.require(det == p, "determinant oracle");
      } else {
        auto hp = ht_apply(s, c, p);
        double res = 0, sc = 1, diff = 0;
        for (int j = 0; j <= n; ++j) {
          res = std::max(res, std::abs(hp[j] - E * p[j]));
          sc = std::max(sc, std::abs(E * p[j]) + std::abs(hp[j]));
          diff = std::max(diff, std::abs(det[j] - p[j]) / std::max(1.0, std::abs(p[j])));
        }
        t.residual(res / sc, 1e-10, "eigen-relation");
        t.residual(diff, 1e-8, "determinant oracle");
      }
    }
  }
}

Tally exact_solvability() {
  Tally t;
  std::mt19937_64 rng(3);
  for (auto kind : all_coordinate_kinds()) {
    auto c = SinusoidalCoordinate::example(kind);
    if (is_linear(kind)) exact_solvability_one<Rational>(c, rng, t);
    exact_solvability_one<double>(c, rng, t);
  }
  return t;
}

Tally closure() {
  Tally t;
  std::mt19937_64 rng(4);
  for (auto kind : all_coordinate_kinds()) {
    auto c = SinusoidalCoordinate::example(kind);
    auto p = shift_params<double>(c);
    const double eps = c.epsilon();
    for (int trial = 0; trial < 10; ++trial) {
      auto s = oracle::random_spec<double>(2, rng);
      auto r = verify_closure(s, c, 10 + trial);
      t.require(r.components.size() >= 6, "closure components");
      t.residual(r.max_residual, 1e-9, std::string(to_string(kind)) + " closure");
      auto k = closure_coeffs(s, c);
      const double v20 = s.v(2, 0), v11 = s.v(1, 1), v10 = s.v(1, 0), v01 = s.v(0, 1);
      double dev = std::max({std::abs(k.r1_1 - p.r11), std::abs(k.r0_2 - p.r11), std::abs(k.r0_1 - 2 * k.r1_0),
                             std::abs(k.r1_0 - eps * (v20 + v11)), std::abs(k.r0_0 + v20 * v11),
                             std::abs(k.rm1_1 - eps * (v10 + v01)), std::abs(k.rm1_0 + v20 * v01)});
      t.residual(dev, 1e-9, "r coefficients");
      auto a = verify_alpha_pm(s, c, 10);
      t.residual(a.max_residual, 1e-9, "alpha_pm");
    }
  }
  return t;
}

Tally dual_closure() {
  Tally t;
  std::mt19937_64 rng(5);
  for (auto kind : all_coordinate_kinds()) {
    auto c = SinusoidalCoordinate::example(kind);
    for (int L = 2; L <= 4; ++L) {
      auto s = oracle::random_spec<double>(L, rng);
      auto r = verify_dual_closure(s, c, 20 + L);
      t.residual(r.max_residual, 1e-9, std::string(to_string(kind)) + " dual L=" + std::to_string(L));
    }
    auto s = oracle::random_spec<double>(2, rng);
    auto p = shift_params<double>(c);
    double q = s.v(1, 1) * s.v(0, 0) - s.v(1, 0) * s.v(0, 1) - p.rm12 * s.v(2, 0) * s.v(0, 1);
    t.residual(oracle::rel_err(aw_casimir(s, c), q), 1e-12, "casimir closed form");
    auto r = verify_casimir(s, c, 31);
    t.residual(r.max_residual, 1e-8, std::string(to_string(kind)) + " casimir");
  }
  return t;
}

Tally shape_invariance() {
  Tally t;
  std::mt19937_64 rng(6);
  for (auto kind : all_coordinate_kinds()) {
    auto c = SinusoidalCoordinate::example(kind);
    for (int trial = 0; trial < 5; ++trial) {
      auto s = l2_spec(c, rng);
      auto st = shape_step(s, c);
      t.residual(verify_shape(s, c, st, 50 + trial).max_residual, 1e-8, std::string(to_string(kind)) + " shape");
      auto tel = telescoped_spectrum(s, c, 6);
      for (int n = 0; n <= 6; ++n)
        t.residual(oracle::rel_err(tel[static_cast<size_t>(n)], energy(s, c, n)), 1e-8, "telescoped spectrum");
    }
  }
  return t;
}

Tally qes() {
  Tally t;
  std::mt19937_64 rng(7);
  for (auto kind : all_coordinate_kinds()) {
    auto c = SinusoidalCoordinate::example(kind);
    for (int L = 3; L <= 4; ++L)
      for (int M = 1; M <= 8; ++M) {
        auto s = oracle::random_spec<double>(L, rng);
        if (s.v(L, 0) == 0.0) s.set(L, 0, 1.0);
        try {
          auto q = qes_build(s, c, M);
          qes_matrix(q, c);
          t.residual(oracle::rel_err(q.e0, qes_compensation_generic(q.spec, c, 0, M)), 1e-10, "e0");
          if (L == 4) t.residual(oracle::rel_err(*q.e1, qes_compensation_generic(q.spec, c, 1, M)), 1e-10, "e1");
        } catch (const Error& e) {
          t.require(false, std::string(to_string(kind)) + ": " + e.what());
        }
        if (is_linear(kind)) {
          auto se = oracle::random_spec<Rational>(L, rng);
          if (se.v(L, 0) == 0) se.set(L, 0, 1);
          auto q = qes_build(se, c, M);
          try {
            qes_matrix(q, c);
          } catch (const Error& e) {
            t.require(false, e.what());
          }
          t.require(q.e0 == qes_compensation_generic(q.spec, c, 0, M), "exact e0");
          if (L == 4) t.require(*q.e1 == qes_compensation_generic(q.spec, c, 1, M), "exact e1");
        }
      }
  }
  auto lin = qes_feasible<Rational>(5, BracketContext(0.0), 6);
  t.require(!lin.feasible && lin.det && *lin.det == Rational(1, 2), "L=5 linear determinant");
  auto hyp = qes_feasible<double>(5, BracketContext(0.5), 6);
  t.require(!hyp.feasible && hyp.det && std::abs(*hyp.det - bracket<double>(BracketContext(0.5), 0.5)) < 1e-12 &&
                *hyp.det != 0.0,
            "L=5 q determinant");
  return t;
}

Tally lattice() {
  Tally t;
  auto d1 = SinusoidalCoordinate::discrete(CoordinateKind::D1);
  auto m = build_lattice(krawtchouk(), d1, 4);
  t.require(m.size() == 5, "size");
  t.require(m.H == m.H.transpose(), "symmetric");
  t.residual((m.H - m.A.transpose() * m.A).cwiseAbs().maxCoeff(), 1e-12, "H = A^T A");
  Eigen::Map<const Eigen::VectorXd> phi(m.phi0.data(), m.size());
  t.residual((m.H * phi).cwiseAbs().maxCoeff(), 1e-12, "H phi0");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.H, Eigen::EigenvaluesOnly);
  for (int n = 0; n <= 4; ++n) t.residual(std::abs(es.eigenvalues()(n) - n), 1e-12, "spectrum");
  auto sp = spectrum_check(m);
  t.require(sp.report.pass, "spectrum_check");
  for (int a = 0; a <= 4; ++a)
    for (int b = a + 1; b <= 4; ++b) {
      auto pa = lattice_eigenpoly_values(m, a), pb = lattice_eigenpoly_values(m, b);
      double s = 0;
      for (size_t x = 0; x < 5; ++x) s += m.phi0[x] * m.phi0[x] * pa[x] * pb[x];
      t.residual(std::abs(s), 1e-10, "orthogonality");
    }

  PotentialSpec<double> s3(3);
  s3.with(3, 0, 1).with(2, 1, -2).with(2, 0, 1).with(1, 1, 6).with(1, 0, 8).with(0, 1, 8).with(0, 0, 8);
  auto c8 = SinusoidalCoordinate::discrete(CoordinateKind::D1, 0.5, 0.0, 1, 8);
  auto m3 = build_lattice(s3, c8, 8);
  for (int M = 0; M <= 8; ++M) {
    auto r = qes_lattice(m3, qes_build(s3, c8, M));
    t.require(r.report.pass, "L=3 QES lattice M=" + std::to_string(M));
    t.worst = std::max(t.worst, r.report.max_residual);
  }
  std::mt19937_64 rng(8);
  for (auto kind : {CoordinateKind::D1, CoordinateKind::D3, CoordinateKind::D4}) {
    auto c = SinusoidalCoordinate::example(kind, 8);
    auto s4 = sample_admissible_spec(c, 4, 8, rng, 3);
    auto q = qes_build(s4, c, 3);
    auto r = qes_lattice(build_lattice(q.spec, c, 8), q);
    t.require(r.report.pass, std::string("L=4 QES lattice ") + to_string(kind));
    t.worst = std::max(t.worst, r.report.max_residual);
  }
  return t;
}

Tally degradation() {
  Tally t;
  t.worst = 1e300;
  std::mt19937_64 rng(9);
  for (auto kind : all_coordinate_kinds()) {
    auto c = SinusoidalCoordinate::example(kind);
    auto s = oracle::random_spec<double>(2, rng);
    auto ref_c = closure_coeffs(s, c);
    auto ref_d = dual_closure_coeffs(s, c);
    for (auto [k, l] : s.keys()) {
      auto p = s;
      p.set(k, l, p.v(k, l) + 1e-3);
      double r = std::max(verify_closure(p, c, 1, std::optional(ref_c)).max_residual,
                          verify_dual_closure(p, c, 1, std::optional(ref_d)).max_residual);
      t.worst = std::min(t.worst, r);
      t.require(r > 1e-5, std::string(to_string(kind)) + " v" + std::to_string(k) + std::to_string(l) +
                              " perturbation undetected (" + sci(r) + ")");
    }
  }
  return t;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Tally()> run;
    const char* measure;
  };
  const Criterion criteria[] = {
      {1, "coordinate axioms and half-shift control", coordinate_axioms, "worst residual"},
      {2, "g-coefficient closed forms and bracket identity", g_coefficients, "worst relative error"},
      {3, "exact solvability for L=2", exact_solvability, "worst residual"},
      {4, "closure relation and alpha_pm", closure, "worst residual"},
      {5, "dual closure and Casimir", dual_closure, "worst residual"},
      {6, "shape invariance and telescoped spectrum", shape_invariance, "worst residual"},
      {7, "QES invariance, compensation, non-QES for L=5", qes, "worst relative error"},
      {8, "lattice reconstruction and QES lattice spectra", lattice, "worst residual"},
      {9, "degradation controls", degradation, "smallest perturbed residual"},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Tally t;
    try {
      t = c.run();
    } catch (const std::exception& e) {
      t.pass = false;
      t.first_failure = e.what();
    }
    std::printf("criterion %d %s: %s (%s %s)%s%s\n", c.id, t.pass ? "PASS" : "FAIL", c.name, c.measure,
                sci(t.worst).c_str(), t.pass ? "" : "; first failure: ", t.first_failure.c_str());
    failures += !t.pass;
  }
  return failures == 0 ? 0 : 1;
}
