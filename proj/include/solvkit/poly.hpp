#pragma once

#include <algorithm>
#include <climits>
#include <initializer_list>
#include <vector>

#include "solvkit/scalar.hpp"

namespace solvkit {

/// Polynomial in η with dense ascending coefficients. Trailing exact zeros
/// are trimmed so that the leading coefficient of a nonzero polynomial is
/// nonzero; the zero polynomial has degree kZeroDegree.
template <class T>
class PolyEta {
 public:
  static constexpr int kZeroDegree = INT_MIN;

  PolyEta() = default;
  explicit PolyEta(std::vector<T> ascending) : c_(std::move(ascending)) { trim(); }
  PolyEta(std::initializer_list<T> ascending) : c_(ascending) { trim(); }

  static PolyEta constant(const T& c) { return PolyEta(std::vector<T>{c}); }
  static PolyEta monomial(int n, const T& c = T(1)) {
    std::vector<T> v(static_cast<size_t>(n) + 1, T(0));
    v[static_cast<size_t>(n)] = c;
    return PolyEta(std::move(v));
  }

  int degree() const { return c_.empty() ? kZeroDegree : static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }

  /// Coefficient of η^k (zero outside the stored range).
  T operator[](int k) const {
    return (k >= 0 && k < static_cast<int>(c_.size())) ? c_[static_cast<size_t>(k)] : T(0);
  }
  const std::vector<T>& coefficients() const { return c_; }

  PolyEta& operator+=(const PolyEta& o) {
    if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), T(0));
    for (size_t i = 0; i < o.c_.size(); ++i) c_[i] += o.c_[i];
    trim();
    return *this;
  }
  PolyEta& operator-=(const PolyEta& o) {
    if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), T(0));
    for (size_t i = 0; i < o.c_.size(); ++i) c_[i] -= o.c_[i];
    trim();
    return *this;
  }
  PolyEta& operator*=(const T& s) {
    for (auto& x : c_) x *= s;
    trim();
    return *this;
  }

  friend PolyEta operator+(PolyEta a, const PolyEta& b) { return a += b; }
  friend PolyEta operator-(PolyEta a, const PolyEta& b) { return a -= b; }
  friend PolyEta operator*(PolyEta a, const T& s) { return a *= s; }
  friend PolyEta operator*(const T& s, PolyEta a) { return a *= s; }
  friend PolyEta operator*(const PolyEta& a, const PolyEta& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<T> r(a.c_.size() + b.c_.size() - 1, T(0));
    for (size_t i = 0; i < a.c_.size(); ++i)
      for (size_t j = 0; j < b.c_.size(); ++j) r[i + j] += a.c_[i] * b.c_[j];
    return PolyEta(std::move(r));
  }
  friend bool operator==(const PolyEta& a, const PolyEta& b) { return a.c_ == b.c_; }

  /// Multiplication by η^k.
  PolyEta shifted_up(int k) const {
    if (is_zero()) return {};
    std::vector<T> r(static_cast<size_t>(k), T(0));
    r.insert(r.end(), c_.begin(), c_.end());
    return PolyEta(std::move(r));
  }

  /// Horner evaluation in any field that accepts T coefficients.
  template <class F>
  F operator()(const F& eta) const {
    F acc = F(T(0));
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * eta + F(*it);
    return acc;
  }

  PolyEta monic() const {
    if (is_zero()) return {};
    return *this * (T(1) / c_.back());
  }

 private:
  void trim() {
    while (!c_.empty() && exactly_zero(c_.back())) c_.pop_back();
  }

  std::vector<T> c_;
};

}  // namespace solvkit
