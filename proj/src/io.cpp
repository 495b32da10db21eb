#include "solvkit/io.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "solvkit/polyop.hpp"

namespace solvkit {

namespace {

[[noreturn]] void schema(const std::string& msg) { throw Error(ErrorKind::Schema, msg); }

void require_object(const Json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) schema(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!allowed.count(key)) schema("unknown key '" + key + "' in " + where);
  }
}

int int_field(const Json& j, const std::string& key, const std::string& where) {
  const auto& v = j.at(key);
  if (!v.is_number_integer()) schema(where + "." + key + " must be an integer");
  return v.get<int>();
}

double real_field(const Json& j, const std::string& key, const std::string& where) {
  const auto& v = j.at(key);
  if (!v.is_number()) schema(where + "." + key + " must be a number");
  return v.get<double>();
}

Rational shortest_decimal(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return parse_rational(std::string(buf, res.ptr));
}

std::pair<int, int> parse_key(const std::string& key) {
  const auto comma = key.find(',');
  if (comma == std::string::npos) schema("potential key '" + key + "' is not of the form \"k,l\"");
  try {
    size_t used1 = 0, used2 = 0;
    const int k = std::stoi(key.substr(0, comma), &used1);
    const int l = std::stoi(key.substr(comma + 1), &used2);
    if (used1 != comma || used2 != key.size() - comma - 1) throw std::invalid_argument(key);
    return {k, l};
  } catch (const std::logic_error&) {
    schema("potential key '" + key + "' is not of the form \"k,l\"");
  }
}

template <class T>
Json scalar_json(const T& x) {
  if constexpr (std::is_same_v<T, double>) {
    return Json(x);
  } else {
    return rational_to_json(x);
  }
}

Json poly_to_json(const PolyEta<Rational>& p) {
  Json arr = Json::array();
  for (int i = 0; i <= p.degree(); ++i) arr.push_back(rational_to_json(p[i]));
  return arr;
}

PolyEta<Rational> poly_from_json(const Json& j, const std::string& where) {
  if (!j.is_array()) schema(where + " must be an array of coefficients");
  std::vector<Rational> c;
  for (size_t i = 0; i < j.size(); ++i) c.push_back(rational_from_json(j[i], where + "[" + std::to_string(i) + "]"));
  return PolyEta<Rational>(c);
}

const std::vector<std::pair<const char*, Rational ClosureCoeffs<Rational>::*>>& closure_fields() {
  static const std::vector<std::pair<const char*, Rational ClosureCoeffs<Rational>::*>> f{
      {"r1_1", &ClosureCoeffs<Rational>::r1_1},   {"r1_0", &ClosureCoeffs<Rational>::r1_0},
      {"r0_2", &ClosureCoeffs<Rational>::r0_2},   {"r0_1", &ClosureCoeffs<Rational>::r0_1},
      {"r0_0", &ClosureCoeffs<Rational>::r0_0},   {"rm1_2", &ClosureCoeffs<Rational>::rm1_2},
      {"rm1_1", &ClosureCoeffs<Rational>::rm1_1}, {"rm1_0", &ClosureCoeffs<Rational>::rm1_0}};
  return f;
}

template <class T>
Rational to_rational(const T& x) {
  if constexpr (std::is_same_v<T, double>) {
    return shortest_decimal(x);
  } else {
    return x;
  }
}

template <class T>
PolyEta<Rational> poly_to_rational(const PolyEta<T>& p) {
  std::vector<Rational> c;
  for (int i = 0; i <= p.degree(); ++i) c.push_back(to_rational(p[i]));
  return PolyEta<Rational>(c);
}

template <class T>
ExpectedBlock record_with(const ModelFile& m, int n_energies) {
  ExpectedBlock e;
  const auto spec = m.spec<T>();
  e.dual = DualClosureCoeffs<Rational>{poly_to_rational(dual_closure_coeffs(spec, m.coord).R1d),
                                       poly_to_rational(dual_closure_coeffs(spec, m.coord).R0d),
                                       poly_to_rational(dual_closure_coeffs(spec, m.coord).Rm1d)};
  if (m.L == 2) {
    const auto c = closure_coeffs(spec, m.coord);
    e.closure = ClosureCoeffs<Rational>{to_rational(c.r1_1), to_rational(c.r1_0),  to_rational(c.r0_2),
                                        to_rational(c.r0_1), to_rational(c.r0_0),  to_rational(c.rm1_2),
                                        to_rational(c.rm1_1), to_rational(c.rm1_0)};
    e.casimir = to_rational(aw_casimir(spec, m.coord));
    for (int n = 0; n < n_energies; ++n) e.energies.push_back(to_rational(energy(spec, m.coord, n)));
  }
  return e;
}

}  // namespace

Rational rational_from_json(const Json& j, const std::string& where) {
  if (j.is_number_integer()) {
    if (j.is_number_unsigned()) return Rational(std::to_string(j.get<unsigned long long>()));
    return Rational(std::to_string(j.get<long long>()));
  }
  if (j.is_number_float()) {
    const double x = j.get<double>();
    if (!std::isfinite(x)) schema(where + " is not finite");
    return shortest_decimal(x);
  }
  if (j.is_string()) {
    try {
      return parse_rational(j.get<std::string>());
    } catch (const Error&) {
      schema(where + ": cannot parse '" + j.get<std::string>() + "' as a rational number");
    } catch (const std::exception&) {
      schema(where + ": cannot parse '" + j.get<std::string>() + "' as a rational number");
    }
  }
  schema(where + " must be a number or a string");
}

Json rational_to_json(const Rational& x) {
  using boost::multiprecision::denominator;
  using boost::multiprecision::numerator;
  if (denominator(x) == 1) {
    const auto num = numerator(x);
    if (boost::multiprecision::abs(num) < (boost::multiprecision::mpz_int(1) << 62)) return Json(num.convert_to<long long>());
  }
  return Json(format_scalar(x));
}

SinusoidalCoordinate coordinate_from_json(const Json& j) {
  require_object(j, "coordinate", {"kind", "gamma", "q", "d", "eps_prime", "N"});
  if (!j.contains("kind") || !j.at("kind").is_string()) schema("coordinate.kind must be a string");
  CoordinateKind kind;
  try {
    kind = parse_coordinate_kind(j.at("kind").get<std::string>());
  } catch (const Error& e) {
    schema(e.what());
  }
  const bool discrete = kind >= CoordinateKind::D1 && kind <= CoordinateKind::D5;
  if (kind == CoordinateKind::SinhPerturbed) {
    for (const char* k : {"gamma", "q", "d", "eps_prime", "N"})
      if (j.contains(k)) schema(std::string("coordinate.") + k + " does not apply to X1");
    return SinusoidalCoordinate::sinh_perturbed();
  }
  try {
    if (!discrete) {
      for (const char* k : {"q", "d", "eps_prime", "N"})
        if (j.contains(k)) schema(std::string("coordinate.") + k + " does not apply to a continuous coordinate");
      return SinusoidalCoordinate::continuous(kind, j.contains("gamma") ? real_field(j, "gamma", "coordinate") : 1.0);
    }
    if (j.contains("gamma")) schema("coordinate.gamma does not apply to a discrete coordinate");
    const double q = j.contains("q") ? real_field(j, "q", "coordinate") : 0.5;
    const double d = j.contains("d") ? real_field(j, "d", "coordinate") : 0.0;
    const int ep = j.contains("eps_prime") ? int_field(j, "eps_prime", "coordinate") : 1;
    std::optional<int> N;
    if (j.contains("N")) N = int_field(j, "N", "coordinate");
    return SinusoidalCoordinate::discrete(kind, q, d, ep, N);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Schema) throw;
    schema(std::string("coordinate: ") + e.what());
  }
}

Json coordinate_to_json(const SinusoidalCoordinate& c) {
  Json j;
  j["kind"] = to_string(c.kind());
  if (c.is_nonstandard()) return j;
  if (c.is_continuous()) {
    j["gamma"] = c.gamma();
    return j;
  }
  if (c.kind() >= CoordinateKind::D3) j["q"] = c.q();
  if (c.kind() == CoordinateKind::D2 || c.kind() == CoordinateKind::D5) {
    j["d"] = c.d();
    j["eps_prime"] = c.eps_prime();
  }
  if (c.N()) j["N"] = *c.N();
  return j;
}

template <class T>
static Json potential_json_impl(const PotentialSpec<T>& spec) {
  Json v = Json::object();
  for (auto [k, l] : spec.keys()) {
    if (exactly_zero(spec.v(k, l))) continue;
    v[std::to_string(k) + "," + std::to_string(l)] = scalar_json(spec.v(k, l));
  }
  Json j;
  j["L"] = spec.L();
  j["v"] = v;
  return j;
}

Json potential_to_json(const PotentialSpec<Rational>& spec) { return potential_json_impl(spec); }
Json potential_to_json(const PotentialSpec<double>& spec) { return potential_json_impl(spec); }

template <class T>
PotentialSpec<T> ModelFile::spec() const {
  RawPotential<T> r;
  for (const auto& [key, value] : raw) {
    if constexpr (std::is_same_v<T, double>) {
      r[key] = to_double(value);
    } else {
      r[key] = value;
    }
  }
  if constexpr (std::is_same_v<T, Rational>) require_backend<Rational>(coord);
  return canonicalize(r, L, coord);
}

template PotentialSpec<double> ModelFile::spec<double>() const;
template PotentialSpec<Rational> ModelFile::spec<Rational>() const;

ModelFile model_from_json(const Json& j) {
  require_object(j, "model", {"coordinate", "potential", "qes", "lattice", "expected"});
  if (!j.contains("coordinate")) schema("model needs a coordinate block");
  if (!j.contains("potential")) schema("model needs a potential block");
  ModelFile m;
  m.coord = coordinate_from_json(j.at("coordinate"));

  const auto& p = j.at("potential");
  require_object(p, "potential", {"L", "v"});
  if (!p.contains("L")) schema("potential.L is required");
  m.L = int_field(p, "L", "potential");
  if (m.L < 0) schema("potential.L must be >= 0");
  if (!p.contains("v") || !p.at("v").is_object()) schema("potential.v must be an object");
  for (const auto& [key, value] : p.at("v").items()) {
    const auto kl = parse_key(key);
    if (kl.first < 0 || kl.second < 0 || kl.first + kl.second > m.L) {
      schema("potential key \"" + key + "\" is outside k,l >= 0, k+l <= L=" + std::to_string(m.L));
    }
    if (m.raw.count(kl)) schema("duplicate potential key \"" + key + "\"");
    m.raw[kl] = rational_from_json(value, "potential.v[\"" + key + "\"]");
  }

  if (j.contains("qes")) {
    const auto& q = j.at("qes");
    require_object(q, "qes", {"M", "comp"});
    if (!q.contains("M")) schema("qes.M is required");
    QesBlock b;
    b.M = int_field(q, "M", "qes");
    if (b.M < 0) schema("qes.M must be >= 0");
    if (q.contains("comp")) {
      const auto& c = q.at("comp");
      require_object(c, "qes.comp", {"e0", "e1"});
      if (c.contains("e0")) b.e0 = rational_from_json(c.at("e0"), "qes.comp.e0");
      if (c.contains("e1")) b.e1 = rational_from_json(c.at("e1"), "qes.comp.e1");
    }
    m.qes = b;
  }

  if (j.contains("lattice")) {
    const auto& l = j.at("lattice");
    require_object(l, "lattice", {"N", "K_tr"});
    if (!m.coord.is_discrete()) {
      schema(std::string("lattice block needs a discrete (D-kind) coordinate, got ") + to_string(m.coord.kind()));
    }
    LatticeBlock b;
    if (l.contains("N")) b.N = int_field(l, "N", "lattice");
    if (l.contains("K_tr")) b.K_tr = int_field(l, "K_tr", "lattice");
    if (b.N.has_value() == b.K_tr.has_value()) schema("lattice block needs exactly one of N, K_tr");
    if (b.N && m.coord.N() && *b.N != *m.coord.N()) schema("lattice.N disagrees with coordinate.N");
    if (b.K_tr && m.coord.N()) schema("lattice.K_tr given for a finite coordinate");
    if ((b.N && *b.N < 1) || (b.K_tr && *b.K_tr < 1)) schema("lattice size must be >= 1");
    m.lattice = b;
  }

  if (j.contains("expected")) {
    const auto& e = j.at("expected");
    require_object(e, "expected", {"closure", "dual", "casimir", "energies"});
    ExpectedBlock b;
    if (e.contains("closure")) {
      const auto& c = e.at("closure");
      std::set<std::string> names;
      for (const auto& [name, ptr] : closure_fields()) names.insert(name);
      require_object(c, "expected.closure", names);
      ClosureCoeffs<Rational> cc{};
      for (const auto& [name, ptr] : closure_fields()) {
        if (!c.contains(name)) schema(std::string("expected.closure.") + name + " is missing");
        cc.*ptr = rational_from_json(c.at(name), std::string("expected.closure.") + name);
      }
      b.closure = cc;
    }
    if (e.contains("dual")) {
      const auto& d = e.at("dual");
      require_object(d, "expected.dual", {"R1d", "R0d", "Rm1d"});
      for (const char* k : {"R1d", "R0d", "Rm1d"})
        if (!d.contains(k)) schema(std::string("expected.dual.") + k + " is missing");
      b.dual = DualClosureCoeffs<Rational>{poly_from_json(d.at("R1d"), "expected.dual.R1d"),
                                           poly_from_json(d.at("R0d"), "expected.dual.R0d"),
                                           poly_from_json(d.at("Rm1d"), "expected.dual.Rm1d")};
    }
    if (e.contains("casimir")) b.casimir = rational_from_json(e.at("casimir"), "expected.casimir");
    if (e.contains("energies")) {
      const auto& en = e.at("energies");
      if (!en.is_array()) schema("expected.energies must be an array");
      for (size_t i = 0; i < en.size(); ++i)
        b.energies.push_back(rational_from_json(en[i], "expected.energies[" + std::to_string(i) + "]"));
    }
    m.expected = b;
  }
  return m;
}

Json model_to_json(const ModelFile& m) {
  Json j;
  j["coordinate"] = coordinate_to_json(m.coord);
  Json v = Json::object();
  for (const auto& [key, value] : m.raw) v[std::to_string(key.first) + "," + std::to_string(key.second)] = rational_to_json(value);
  j["potential"] = Json{{"L", m.L}, {"v", v}};
  if (m.qes) {
    Json q{{"M", m.qes->M}};
    if (m.qes->e0 || m.qes->e1) {
      Json c = Json::object();
      if (m.qes->e0) c["e0"] = rational_to_json(*m.qes->e0);
      if (m.qes->e1) c["e1"] = rational_to_json(*m.qes->e1);
      q["comp"] = c;
    }
    j["qes"] = q;
  }
  if (m.lattice) {
    j["lattice"] = m.lattice->N ? Json{{"N", *m.lattice->N}} : Json{{"K_tr", *m.lattice->K_tr}};
  }
  if (m.expected) {
    Json e = Json::object();
    if (m.expected->closure) {
      Json c = Json::object();
      for (const auto& [name, ptr] : closure_fields()) c[name] = rational_to_json((*m.expected->closure).*ptr);
      e["closure"] = c;
    }
    if (m.expected->dual) {
      e["dual"] = Json{{"R1d", poly_to_json(m.expected->dual->R1d)},
                       {"R0d", poly_to_json(m.expected->dual->R0d)},
                       {"Rm1d", poly_to_json(m.expected->dual->Rm1d)}};
    }
    if (m.expected->casimir) e["casimir"] = rational_to_json(*m.expected->casimir);
    if (!m.expected->energies.empty()) {
      Json arr = Json::array();
      for (const auto& x : m.expected->energies) arr.push_back(rational_to_json(x));
      e["energies"] = arr;
    }
    j["expected"] = e;
  }
  return j;
}

ModelFile load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) schema("cannot open model file '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    schema("model file '" + path + "' is not valid JSON: " + e.what());
  }
  return model_from_json(j);
}

ExpectedBlock record_expected(const ModelFile& m, int n_energies) {
  if (m.coord.is_linear_regime()) return record_with<Rational>(m, n_energies);
  return record_with<double>(m, n_energies);
}

Json report_to_json(const CheckReport& r) {
  Json j;
  j["check"] = r.check;
  j["status"] = r.status();
  j["max_residual"] = r.max_residual;
  j["tolerance"] = r.tolerance;
  j["samples_used"] = r.samples_used;
  j["skipped"] = r.skipped;
  Json comps = Json::object();
  for (const auto& [name, value] : r.components) comps[name] = value;
  j["components"] = comps;
  j["notes"] = r.notes;
  return j;
}

CheckReport report_from_json(const Json& j) {
  require_object(j, "report", {"check", "status", "max_residual", "tolerance", "samples_used", "skipped", "components", "notes"});
  for (const char* k : {"check", "status", "max_residual", "samples_used", "skipped"})
    if (!j.contains(k)) schema(std::string("report.") + k + " is missing");
  CheckReport r;
  if (!j.at("check").is_string() || !j.at("status").is_string()) schema("report.check and report.status must be strings");
  r.check = j.at("check").get<std::string>();
  const auto status = j.at("status").get<std::string>();
  if (status != "PASS" && status != "FAIL") schema("report.status must be PASS or FAIL");
  r.pass = status == "PASS";
  r.max_residual = real_field(j, "max_residual", "report");
  if (j.contains("tolerance")) r.tolerance = real_field(j, "tolerance", "report");
  r.samples_used = int_field(j, "samples_used", "report");
  r.skipped = int_field(j, "skipped", "report");
  if (j.contains("components")) {
    const auto& c = j.at("components");
    if (!c.is_object()) schema("report.components must be an object");
    for (const auto& [name, value] : c.items()) {
      if (!value.is_number()) schema("report.components." + name + " must be a number");
      r.components.emplace_back(name, value.get<double>());
    }
  }
  if (j.contains("notes")) {
    const auto& n = j.at("notes");
    if (!n.is_array()) schema("report.notes must be an array");
    for (const auto& s : n) {
      if (!s.is_string()) schema("report.notes must hold strings");
      r.notes.push_back(s.get<std::string>());
    }
  }
  return r;
}

}  // namespace solvkit
