#pragma once

// H̃ = ε(V+(x)(e^{βp}-1) + V-(x)(e^{-βp}-1)) acting on polynomials in η.

#include <functional>
#include <string>
#include <vector>

#include "solvkit/poly.hpp"
#include "solvkit/potential.hpp"
#include "solvkit/scalar.hpp"
#include "solvkit/sinusoid.hpp"

namespace solvkit {

/// Small dense row-major matrix over T.
template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, T(0)) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  T& operator()(int i, int j) { return data_[static_cast<size_t>(i) * cols_ + j]; }
  const T& operator()(int i, int j) const { return data_[static_cast<size_t>(i) * cols_ + j]; }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    Matrix r(a.rows_, b.cols_);
    for (int i = 0; i < a.rows_; ++i)
      for (int k = 0; k < a.cols_; ++k) {
        if (exactly_zero(a(i, k))) continue;
        for (int j = 0; j < b.cols_; ++j) r(i, j) += a(i, k) * b(k, j);
      }
    return r;
  }
  std::vector<T> operator*(const std::vector<T>& v) const {
    std::vector<T> r(static_cast<size_t>(rows_), T(0));
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) r[static_cast<size_t>(i)] += (*this)(i, j) * v[static_cast<size_t>(j)];
    return r;
  }
  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

enum class Flavor { ES, General, QesModified };
const char* to_string(Flavor flavor);

/// Matrix of H̃ (or H̃') in the basis {η^0..η^K}; column n holds H̃η^n.
template <class T>
struct OperatorMatrix {
  Matrix<T> entries;
  int K = 0;
  int L = 2;
  Flavor flavor = Flavor::ES;
  /// Column n has support beyond row K (n+L-2 > K) and is cut off.
  std::vector<bool> truncated;

  const T& operator()(int m, int n) const { return entries(m, n); }
};

/// e_{m,j,n} = ε Σ_l v_{L-m+j-l,l} Σ_{r=0}^{n-1} g^{(j)}_{n+l-r-2}.
template <class T>
T emjn(const PotentialSpec<T>& spec, const SinusoidalCoordinate& coord, int m, int j, int n);
template <class T>
T emjn(const PotentialSpec<T>& spec, int epsilon, const GTable<T>& table, int m, int j, int n);

/// Closed forms of e_{m,0,n} and e_{m,1,n} via bracket sums (j ∈ {0,1}).
template <class T>
T emjn_closed(const PotentialSpec<T>& spec, const SinusoidalCoordinate& coord, int m, int j, int n);

template <class T>
OperatorMatrix<T> ht_matrix(const PotentialSpec<T>& spec, const SinusoidalCoordinate& coord, int K);

/// H̃ applied to a polynomial, as a polynomial (exact degree bookkeeping).
template <class T>
PolyEta<T> ht_apply(const PotentialSpec<T>& spec, const SinusoidalCoordinate& coord, const PolyEta<T>& f);

/// E(n) = ε [n/2]/[1/2] (v20 [(n-1)/2] + v11 [(n+1)/2]); L = 2 only.
template <class T>
T energy(const PotentialSpec<T>& spec, const SinusoidalCoordinate& coord, int n);

/// Monic P_n with H̃ P_n = E(n) P_n, by back-substitution.
template <class T>
PolyEta<T> eigenpoly(const PotentialSpec<T>& spec, const SinusoidalCoordinate& coord, int n);

/// Back-substitution on an upper-triangular matrix: monic eigenvector of column n.
template <class T>
std::vector<T> upper_eigenvector(const Matrix<T>& H, int n);

template <class T>
using PointFn = std::function<complex_t<T>(const complex_t<T>&)>;

/// x ↦ f(η(x)).
template <class T>
PointFn<T> poly_function(const SinusoidalCoordinate& coord, PolyEta<T> f);

/// The functional form of H̃: x ↦ ε[V+(x)(f(x-iβ)-f(x)) + V-(x)(f(x+iβ)-f(x))].
template <class T>
PointFn<T> ht_operator(const PotentialSpec<T>& spec, const SinusoidalCoordinate& coord, PointFn<T> f);

template <class T>
complex_t<T> apply_ht_pointwise(const PotentialSpec<T>& spec, const SinusoidalCoordinate& coord,
                                const PolyEta<T>& f, const complex_t<T>& x);

}  // namespace solvkit
