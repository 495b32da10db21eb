#pragma once

// Real-shift models on the lattice x = 0..N: the symmetric Hamiltonian H,
// its factorization H = A^T A and the zero mode φ0.

#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "solvkit/potential.hpp"
#include "solvkit/qes.hpp"
#include "solvkit/sinusoid.hpp"
#include "solvkit/verify.hpp"

namespace solvkit {

/// Levels whose weight at the wall bounds a truncation.
inline constexpr int kTailLevels = 5;

struct LatticeModel {
  SinusoidalCoordinate coord;
  PotentialSpec<double> spec;
  std::optional<int> N;       // finite model
  std::optional<int> K_tr;    // truncation of a semi-infinite model
  bool approximate = false;
  std::vector<double> eta, B, D;
  std::vector<double> phi0;             // φ0(0) = 1
  std::vector<double> phi0_normalized;  // unit l2 norm
  Eigen::MatrixXd H;
  Eigen::MatrixXd A;
  double factor_residual = 0.0;  // max |H - A^T A|
  double zero_mode_residual = 0.0;  // max |H φ0| / max |H|
  /// Truncated models: max over n < kTailLevels of ψ_n(K_tr)^2 / ||ψ_n||^2, ψ_n = φ0 P_n(η).
  double tail = 0.0;
  std::vector<std::string> notes;

  int size() const { return static_cast<int>(B.size()); }
  /// Largest lattice point.
  int last() const { return size() - 1; }
};

/// Tridiagonal H with diagonal B+D and off-diagonal -sqrt(B(x)D(x+1)).
/// N defaults to coord.N(); with neither N nor K_tr the call is rejected.
/// Semi-infinite models are cut at K_tr with a hard wall; φ0 and the lowest
/// excited states must have negligible weight at the wall.
LatticeModel build_lattice(const PotentialSpec<double>& spec, const SinusoidalCoordinate& coord,
                           std::optional<int> N = std::nullopt, std::optional<int> K_tr = std::nullopt);

/// φ0(x)^2 = Π_{y<x} B(y)/D(y+1) for x = 0..N.
template <class T>
std::vector<T> groundstate_squared(const PotentialSpec<T>& spec, const SinusoidalCoordinate& coord, int N);

/// Unnormalized φ0 with φ0(0) = 1.
std::vector<double> groundstate(const LatticeModel& model);

struct LatticeSpectrum {
  CheckReport report;
  std::vector<double> computed;   // dense eigenvalues, ascending
  std::vector<double> expected;   // E(n), n = 0..last
  Eigen::MatrixXd eigenvectors;   // columns ordered like `computed`, first nonzero entry positive
  double min_eigenvalue = 0.0;
};

/// Monic P_n(η(x)) at x = 0..last, expanded in the Newton basis on the
/// lattice nodes. Throws Degeneracy when E(j) = E(n) for some j < n.
/// `cancellation` receives max_x φ0 Σ|terms| / max_x |φ0 P_n|.
std::vector<double> lattice_eigenpoly_values(const LatticeModel& model, int n, double* cancellation = nullptr);

/// Eigenvalues against E(n), eigenvectors against φ0 P_n(η), and
/// orthogonality of the P_n under φ0^2.
LatticeSpectrum spectrum_check(const LatticeModel& model, int levels = -1);

struct QesLatticeReport {
  CheckReport report;
  std::vector<double> h_prime_eigenvalues;
  std::vector<std::complex<double>> qes_eigenvalues;
  /// Index into h_prime_eigenvalues for each QES eigenvalue.
  std::vector<int> matched;
  double min_eigenvalue = 0.0;
};

/// H' = H - diag(e0 η) (L = 3) or H - diag(e0 η^2 + e1 η) (L = 4); the
/// qes_matrix eigenvalues must reappear in its spectrum with eigenvectors
/// φ0 p(η), deg p <= M.
QesLatticeReport qes_lattice(const LatticeModel& model, const QesModel<double>& qes);

/// Rejection sampling of a spec with D(0) = 0, B(N) = 0 and B, D > 0 inside
/// the lattice. v10 is solved from B(N) = 0; with qes_M and L = 4, v31 is
/// tied to v40. Throws Positivity after max_attempts draws.
PotentialSpec<double> sample_admissible_spec(const SinusoidalCoordinate& coord, int L, int N, std::mt19937_64& rng,
                                             std::optional<int> qes_M = std::nullopt, int max_attempts = 10000);

/// Sets the first entry of magnitude above 1e-12 |v| positive.
void fix_sign(Eigen::Ref<Eigen::VectorXd> v);

}  // namespace solvkit
