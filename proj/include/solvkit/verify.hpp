#pragma once

// Pointwise verification of the identity layer: closure relation, dual
// closure relation, Askey-Wilson Casimir, ladder operators, shape invariance
// and the Crum step.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "solvkit/poly.hpp"
#include "solvkit/polyop.hpp"
#include "solvkit/potential.hpp"
#include "solvkit/sinusoid.hpp"

namespace solvkit {

struct CheckReport {
  std::string check;
  bool pass = false;
  double max_residual = 0.0;
  double tolerance = 0.0;
  int samples_used = 0;
  int skipped = 0;
  std::vector<std::string> notes;
  /// Residual of each component equation, in evaluation order.
  std::vector<std::pair<std::string, double>> components;

  const char* status() const { return pass ? "PASS" : "FAIL"; }
  double component(const std::string& name) const;
};

/// Every pointwise check needs at least this many regular samples.
inline constexpr int kMinSurvivingSamples = 10;

template <class T>
struct ClosureCoeffs {
  T r1_1, r1_0;
  T r0_2, r0_1, r0_0;
  T rm1_2, rm1_1, rm1_0;
};

/// R1(z) = r1_1 z + r1_0 etc. from v20, v11, v10, v01 and the shift data (L = 2).
template <class T>
ClosureCoeffs<T> closure_coeffs(const PotentialSpec<T>& spec, const SinusoidalCoordinate& coord);

/// α±(E) = (R1(E) ± sqrt(R1(E)^2 + 4R0(E)))/2. Throws Regime when the
/// discriminant is negative beyond rounding.
std::pair<double, double> alpha_pm(const ClosureCoeffs<double>& c, double E);

/// Five component equations and the operator form on η^n (n <= 4). With
/// `reference` the given coefficients are used instead of recomputed ones.
template <class T>
CheckReport verify_closure(const PotentialSpec<T>& spec, const SinusoidalCoordinate& coord, unsigned long seed = 1,
                           const std::optional<ClosureCoeffs<T>>& reference = std::nullopt);

/// α±(E(n)) against E(n±1)-E(n) for n = 0..n_max.
CheckReport verify_alpha_pm(const PotentialSpec<double>& spec, const SinusoidalCoordinate& coord, int n_max = 10);

template <class T>
struct DualClosureCoeffs {
  PolyEta<T> R1d;   // r11 z + rm12
  PolyEta<T> R0d;   // r11 z^2 + 2 rm12 z - η(-iβ)η(iβ)
  PolyEta<T> Rm1d;  // ε(v00 + Σ_k (v_{k,0} + v_{k-1,1}) z^k)
};

template <class T>
DualClosureCoeffs<T> dual_closure_coeffs(const PotentialSpec<T>& spec, const SinusoidalCoordinate& coord);

/// [η,[η,H̃]]f = H̃(R0d f) + [η,H̃](R1d f) + Rm1d f for f = η^n, n <= 4.
template <class T>
CheckReport verify_dual_closure(const PotentialSpec<T>& spec, const SinusoidalCoordinate& coord,
                                unsigned long seed = 1,
                                const std::optional<DualClosureCoeffs<T>>& reference = std::nullopt);

/// Q = ε^2 (v11 v00 - v10 v01 - rm12 v20 v01), L = 2.
template <class T>
T aw_casimir(const PotentialSpec<T>& spec, const SinusoidalCoordinate& coord);

/// Applies the Casimir word combination with K1 = H̃, K2 = η to η^n (n <= 3)
/// and compares with Q η^n.
template <class T>
CheckReport verify_casimir(const PotentialSpec<T>& spec, const SinusoidalCoordinate& coord, unsigned long seed = 1,
                           const std::optional<T>& reference = std::nullopt);

struct LadderMatrices {
  Matrix<double> a_plus;
  Matrix<double> a_minus;
  CheckReport report;
};

/// a^{(±)} on V_K from the spectral decomposition of the H̃ matrix and the
/// η-multiplication matrix; checks a+P_n ∝ P_{n+1}, a-P_n ∝ P_{n-1}.
LadderMatrices ladder_matrices(const PotentialSpec<double>& spec, const SinusoidalCoordinate& coord, int K);

template <class T>
struct ShapeStep {
  PotentialSpec<T> spec;        // λ'
  SinusoidalCoordinate coord;   // coordinate of λ' (d' for D2/D5)
  T E1;                         // E(1; λ)
  T kappa;
  std::optional<int> N;         // N' = N - 1
};

/// Continuous (pure imaginary shift) map λ → λ'. v' are divided by κ.
template <class T>
ShapeStep<T> shape_step_continuous(const PotentialSpec<T>& spec, const SinusoidalCoordinate& coord,
                                   const T& kappa = T(1));

/// Discrete (real shift) map λ → λ' including d' and N' = N - 1.
template <class T>
ShapeStep<T> shape_step_discrete(const PotentialSpec<T>& spec, const SinusoidalCoordinate& coord,
                                 const T& kappa = T(1));

template <class T>
ShapeStep<T> shape_step(const PotentialSpec<T>& spec, const SinusoidalCoordinate& coord, const T& kappa = T(1));

/// Functional shape-invariance conditions for one step.
template <class T>
CheckReport verify_shape(const PotentialSpec<T>& spec, const SinusoidalCoordinate& coord, const ShapeStep<T>& step,
                         unsigned long seed = 1);

/// Σ_{s<n} κ^s E(1; λ^[s]) for n = 0..n_max.
template <class T>
std::vector<T> telescoped_spectrum(const PotentialSpec<T>& spec, const SinusoidalCoordinate& coord, int n_max,
                                   const T& kappa = T(1));

/// V(x+iγ/2; λ') = κ^{-1} V(x; λ)(η(x-iγ)-η(x))/(η(x)-η(x+iγ)).
template <class T>
CheckReport crum_step_check(const PotentialSpec<T>& spec, const SinusoidalCoordinate& coord,
                            const ShapeStep<T>& step, unsigned long seed = 1);

/// Half-shift relation η(x) = [1/2](η(x-iγ/2)+η(x+iγ/2)-η(-iγ/2)-η(iγ/2)).
CheckReport verify_half_shift(const SinusoidalCoordinate& coord, unsigned long seed = 1);

/// Addition and multiplication axioms of the sinusoidal coordinate.
template <class T>
CheckReport verify_coordinate_axioms(const SinusoidalCoordinate& coord, unsigned long seed = 1);

}  // namespace solvkit
