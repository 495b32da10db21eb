#pragma once

// Quasi-exact solvability: H̃' = H̃ - Σ_m e_m(M) η^{L-2-m} leaves V_M invariant
// for L = 3 and for L = 4 with v31 = -[M-1]/[M] v40.

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "solvkit/basicnum.hpp"
#include "solvkit/polyop.hpp"
#include "solvkit/potential.hpp"

namespace solvkit {

/// How qes_build treats v31 for L = 4.
enum class V31Policy {
  Overwrite,  // replace v31 by the forced value (warns if a different value was present)
  Require,    // the given v31 must already satisfy the constraint
  AsGiven,    // leave the spec alone; qes_matrix then reports the leak
};

template <class T>
struct QesModel {
  PotentialSpec<T> spec;
  int M = 0;
  T e0{0};
  std::optional<T> e1;  // L = 4 only
  std::vector<std::string> warnings;
};

/// e_m(M) = Σ_{j=0}^m e_{m,j,M}.
template <class T>
T qes_compensation_generic(const PotentialSpec<T>& spec, const SinusoidalCoordinate& coord, int m, int M);

/// Closed forms of e0(M) (L = 3, 4) and e1(M) (L = 4, assuming the v31 constraint).
template <class T>
T qes_e0_closed(const PotentialSpec<T>& spec, const SinusoidalCoordinate& coord, int M);
template <class T>
T qes_e1_closed(const PotentialSpec<T>& spec, const SinusoidalCoordinate& coord, int M);

/// -[M-1]/[M] v40.
template <class T>
T qes_v31_required(const PotentialSpec<T>& spec, const SinusoidalCoordinate& coord, int M);

template <class T>
QesModel<T> qes_build(const PotentialSpec<T>& spec, const SinusoidalCoordinate& coord, int M,
                      V31Policy policy = V31Policy::Overwrite);

/// (M+1)x(M+1) matrix of H̃' on V_M. Throws QesBrokenError if H̃'V_M leaks
/// out of V_M.
template <class T>
OperatorMatrix<T> qes_matrix(const QesModel<T>& model, const SinusoidalCoordinate& coord);

/// Eigenvalues of a (generally non-symmetric) operator matrix, sorted by
/// real then imaginary part.
template <class T>
std::vector<std::complex<double>> operator_eigenvalues(const OperatorMatrix<T>& m);

template <class T>
struct QesFeasibility {
  bool feasible = false;
  /// For L >= 5: the system [[M-1],[M]; [M-3/2],[M-1/2]] (v_{L,0}, v_{L-1,1})^T = 0.
  std::optional<std::array<std::array<T, 2>, 2>> witness;
  std::optional<T> det;
};

template <class T>
QesFeasibility<T> qes_feasible(int L, const BracketContext& ctx = BracketContext(0.0), int M = 6);

}  // namespace solvkit
