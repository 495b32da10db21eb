#pragma once

// JSON model files and reports.
//
// Model file:
//   {"coordinate": {"kind": "D1", "q": 0.5, "d": 0, "eps_prime": 1, "N": 4, "gamma": 1},
//    "potential":  {"L": 2, "v": {"2,0": 1, "1,1": -1, "1,0": "-2", "0,1": "2/1"}},
//    "qes":        {"M": 3, "comp": {"e0": ..., "e1": ...}},
//    "lattice":    {"N": 4} or {"K_tr": 30},
//    "expected":   {"closure": {...}, "dual": {...}, "casimir": ..., "energies": [...]}}
// Coefficients are JSON numbers or strings ("p/q", decimals); decimals are
// read exactly in base ten.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "solvkit/error.hpp"
#include "solvkit/potential.hpp"
#include "solvkit/scalar.hpp"
#include "solvkit/sinusoid.hpp"
#include "solvkit/verify.hpp"

namespace solvkit {

using Json = nlohmann::ordered_json;

struct QesBlock {
  int M = 0;
  std::optional<Rational> e0, e1;
};

struct LatticeBlock {
  std::optional<int> N;
  std::optional<int> K_tr;
};

/// Reference values recorded from an unperturbed model.
struct ExpectedBlock {
  std::optional<ClosureCoeffs<Rational>> closure;
  std::optional<DualClosureCoeffs<Rational>> dual;
  std::optional<Rational> casimir;
  std::vector<Rational> energies;
};

struct ModelFile {
  SinusoidalCoordinate coord = SinusoidalCoordinate::example(CoordinateKind::C1);
  int L = 2;
  RawPotential<Rational> raw;  // as written, before canonicalization
  std::optional<QesBlock> qes;
  std::optional<LatticeBlock> lattice;
  std::optional<ExpectedBlock> expected;

  bool has_key(int k, int l) const { return raw.count({k, l}) > 0; }
  /// Canonical spec (l <= 1) in the requested scalar type.
  template <class T>
  PotentialSpec<T> spec() const;
};

/// Scalar from a JSON number or string.
Rational rational_from_json(const Json& j, const std::string& where);
/// Integers as numbers, everything else as "p/q".
Json rational_to_json(const Rational& x);

SinusoidalCoordinate coordinate_from_json(const Json& j);
Json coordinate_to_json(const SinusoidalCoordinate& coord);

Json potential_to_json(const PotentialSpec<Rational>& spec);
Json potential_to_json(const PotentialSpec<double>& spec);

/// Throws Error(Schema) on malformed input, unknown keys or cross-field
/// violations (lattice block on a continuous coordinate).
ModelFile model_from_json(const Json& j);
Json model_to_json(const ModelFile& m);
ModelFile load_model(const std::string& path);

/// Builds the expected block from the model as it stands.
ExpectedBlock record_expected(const ModelFile& m, int n_energies);

Json report_to_json(const CheckReport& r);
CheckReport report_from_json(const Json& j);

}  // namespace solvkit
