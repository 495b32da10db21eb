#pragma once

// Potential functions V±(x) = Ṽ±(x) / ((η(x∓iβ)-η(x))(η(x∓iβ)-η(x±iβ))) with
// Ṽ±(x) = Σ v_{k,l} η(x)^k η(x∓iβ)^l, l ∈ {0,1}, k+l <= L.
// For discrete kinds V+ = B and V- = D.

#include <complex>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "solvkit/scalar.hpp"
#include "solvkit/sinusoid.hpp"

namespace solvkit {

template <class T>
class PotentialSpec {
 public:
  explicit PotentialSpec(int L);

  int L() const { return L_; }
  /// v_{k,l}; zero for keys outside the admissible set.
  T v(int k, int l) const;
  /// Throws Domain unless l ∈ {0,1}, k >= 0 and k+l <= L.
  void set(int k, int l, const T& value);
  PotentialSpec& with(int k, int l, const T& value) {
    set(k, l, value);
    return *this;
  }

  /// All admissible keys in the order (0,0),(0,1),(1,0),(1,1),...,(L,0).
  std::vector<std::pair<int, int>> keys() const;
  bool is_zero() const;
  double max_abs() const;

  /// Throws ConstraintViolation when Σ_{k+l=L} v_{k,l}^2 = 0.
  void require_top_nonzero() const;

  template <class U>
  PotentialSpec<U> cast() const {
    PotentialSpec<U> out(L_);
    for (auto [k, l] : keys()) out.set(k, l, convert<U>(v(k, l)));
    return out;
  }

  friend bool operator==(const PotentialSpec& a, const PotentialSpec& b) {
    return a.L_ == b.L_ && a.v0_ == b.v0_ && a.v1_ == b.v1_;
  }

 private:
  template <class U>
  static U convert(const T& x) {
    if constexpr (std::is_same_v<U, T>) {
      return x;
    } else if constexpr (std::is_same_v<U, double>) {
      return to_double(x);
    } else {
      return U(x);
    }
  }

  int L_;
  std::vector<T> v0_;  // v_{k,0}, k = 0..L
  std::vector<T> v1_;  // v_{k,1}, k = 0..L-1
};

/// Uncanonicalized coefficients: any l >= 0.
template <class T>
using RawPotential = std::map<std::pair<int, int>, T>;

/// Eliminates l >= 2 with η(x∓iβ)^2 = ((2+r11)η + rm12)η(x∓iβ) - η^2 + rm12 η - η(-iβ)η(iβ).
template <class T>
PotentialSpec<T> canonicalize(const RawPotential<T>& raw, int L, const SinusoidalCoordinate& coord);

enum class Side { Plus, Minus };

/// Ṽ± at x (numerator only).
template <class T>
complex_t<T> vtilde_eval(const PotentialSpec<T>& spec, const SinusoidalCoordinate& coord, const complex_t<T>& x,
                         Side side);
template <class T>
complex_t<T> vtilde_eval(const RawPotential<T>& raw, const SinusoidalCoordinate& coord, const complex_t<T>& x,
                         Side side);

/// V±(x). Throws SingularPoint when the denominator vanishes.
template <class T>
complex_t<T> v_eval(const PotentialSpec<T>& spec, const SinusoidalCoordinate& coord, const complex_t<T>& x, Side side);

/// Denominator (η(x∓iβ)-η(x))(η(x∓iβ)-η(x±iβ)).
template <class T>
complex_t<T> v_denominator(const SinusoidalCoordinate& coord, const complex_t<T>& x, Side side);

/// B(x) and D(x) for discrete kinds at real x.
template <class T>
T b_eval(const PotentialSpec<T>& spec, const SinusoidalCoordinate& coord, const T& x);
template <class T>
T d_eval(const PotentialSpec<T>& spec, const SinusoidalCoordinate& coord, const T& x);

/// max|v| · max|η| over the coordinate's sample grid (at least 1e-300).
template <class T>
double potential_scale(const PotentialSpec<T>& spec, const SinusoidalCoordinate& coord);

/// Sets v_{0,0} = -v_{0,1} η(-1) so that D(0) = 0. With N given, also checks
/// B(N) = 0 and B, D > 0 inside the lattice.
template <class T>
PotentialSpec<T> apply_discrete_boundary(const PotentialSpec<T>& spec, const SinusoidalCoordinate& coord,
                                         std::optional<int> N = std::nullopt);

/// Lattice points where B or D fail to be positive (empty if admissible).
template <class T>
std::vector<int> positivity_violations(const PotentialSpec<T>& spec, const SinusoidalCoordinate& coord, int N);

struct PotentialSample {
  std::complex<double> x;
  std::complex<double> value;
};

/// Least-squares inverse of v ↦ V±: recovers a degree-L spec from samples of
/// V+ (B) and V- (D).
PotentialSpec<double> fit_potential(const std::vector<PotentialSample>& plus_samples,
                                    const std::vector<PotentialSample>& minus_samples,
                                    const SinusoidalCoordinate& coord, int L);

}  // namespace solvkit
