#include "solvkit/cli.hpp"

#include <charconv>
#include <cstdlib>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "solvkit/io.hpp"
#include "solvkit/lattice.hpp"
#include "solvkit/polyop.hpp"
#include "solvkit/qes.hpp"
#include "solvkit/verify.hpp"

namespace solvkit {

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Schema:
    case ErrorKind::Domain:
      return kExitInput;
    case ErrorKind::Unsupported:
    case ErrorKind::NotExactlySolvable:
    case ErrorKind::Regime:
    case ErrorKind::Precondition:
      return kExitUnsupported;
    default:
      return kExitFail;
  }
}

namespace {

struct Exit {
  int code;
  std::string message;
};

std::string num(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string num(const Rational& x) { return format_scalar(x); }

Json jnum(double x) { return Json(x); }
Json jnum(const Rational& x) { return rational_to_json(x); }

std::string complex_text(std::complex<double> z, double scale) {
  if (std::abs(z.imag()) <= 1e-12 * std::max(1.0, scale)) return num(z.real());
  return num(z.real()) + (z.imag() < 0 ? "-" : "+") + num(std::abs(z.imag())) + "i";
}

enum class Backend { Rational, Float };

Backend choose_backend(const SinusoidalCoordinate& coord, std::ostream& err) {
  const char* env = std::getenv("SOLVKIT_BACKEND");
  const std::string want = env ? env : "";
  if (want == "float") return Backend::Float;
  if (!want.empty() && want != "rational") {
    throw Exit{kExitInput, "SOLVKIT_BACKEND must be 'rational' or 'float', got '" + want + "'"};
  }
  if (coord.is_linear_regime()) return Backend::Rational;
  if (want == "rational") {
    err << "warning: rational backend needs a linear-regime coordinate; using float for "
        << to_string(coord.kind()) << "\n";
  }
  return Backend::Float;
}

const char* backend_name(Backend b) { return b == Backend::Rational ? "rational" : "float"; }

std::vector<std::string> split_checks(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void require_L2(const ModelFile& m, const std::string& what) {
  if (m.L == 2) return;
  std::string hint = (m.L == 3 || m.L == 4) ? "; use `solvkit qes --M <M>` for the quasi-exactly solvable sector" : "";
  throw Exit{kExitUnsupported, what + " needs an exactly solvable model (L=2), got L=" + std::to_string(m.L) + hint};
}

template <class T>
PolyEta<T> poly_cast(const PolyEta<Rational>& p) {
  std::vector<T> c;
  for (int i = 0; i <= p.degree(); ++i) {
    if constexpr (std::is_same_v<T, double>) {
      c.push_back(to_double(p[i]));
    } else {
      c.push_back(p[i]);
    }
  }
  return PolyEta<T>(c);
}

template <class T>
T scalar_cast(const Rational& x) {
  if constexpr (std::is_same_v<T, double>) {
    return to_double(x);
  } else {
    return x;
  }
}

// ---------------------------------------------------------------- spectrum

template <class T>
int spectrum_impl(const ModelFile& m, int n_max, const std::string& format, Backend b, std::ostream& out) {
  const auto spec = m.spec<T>();
  std::vector<T> E;
  for (int n = 0; n <= n_max; ++n) E.push_back(energy(spec, m.coord, n));
  if (format == "csv") {
    for (size_t i = 0; i < E.size(); ++i) out << (i ? "," : "") << num(E[i]);
    out << "\n";
  } else {
    Json j;
    j["coordinate"] = coordinate_to_json(m.coord);
    j["backend"] = backend_name(b);
    Json arr = Json::array();
    for (const auto& e : E) arr.push_back(jnum(e));
    j["energies"] = arr;
    out << j.dump(2) << "\n";
  }
  return kExitPass;
}

int cmd_spectrum(const ModelFile& m, std::optional<int> n_max_opt, const std::string& format, std::ostream& out,
                 std::ostream& err) {
  require_L2(m, "spectrum");
  std::optional<int> N = m.coord.N();
  if (!N && m.lattice && m.lattice->N) N = m.lattice->N;
  const int n_max = n_max_opt ? *n_max_opt : (N ? *N : 10);
  if (n_max < 0) throw Exit{kExitInput, "--n-max must be >= 0"};
  if (N && n_max > *N) throw Exit{kExitInput, "--n-max exceeds N=" + std::to_string(*N)};
  const Backend b = choose_backend(m.coord, err);
  return b == Backend::Rational ? spectrum_impl<Rational>(m, n_max, format, b, out)
                                : spectrum_impl<double>(m, n_max, format, b, out);
}

// ---------------------------------------------------------------- eigenpoly

template <class T>
int eigenpoly_impl(const ModelFile& m, int n, const std::string& format, Backend b, std::ostream& out) {
  const auto spec = m.spec<T>();
  const auto P = eigenpoly(spec, m.coord, n);
  if (format == "csv") {
    for (int i = 0; i <= P.degree(); ++i) out << (i ? "," : "") << num(P[i]);
    out << "\n";
  } else {
    Json j;
    j["backend"] = backend_name(b);
    j["n"] = n;
    j["energy"] = jnum(energy(spec, m.coord, n));
    Json arr = Json::array();
    for (int i = 0; i <= P.degree(); ++i) arr.push_back(jnum(P[i]));
    j["coefficients"] = arr;
    out << j.dump(2) << "\n";
  }
  return kExitPass;
}

int cmd_eigenpoly(const ModelFile& m, int n, const std::string& format, std::ostream& out, std::ostream& err) {
  require_L2(m, "eigenpoly");
  if (n < 0) throw Exit{kExitInput, "--n must be >= 0"};
  const Backend b = choose_backend(m.coord, err);
  return b == Backend::Rational ? eigenpoly_impl<Rational>(m, n, format, b, out)
                                : eigenpoly_impl<double>(m, n, format, b, out);
}

// ---------------------------------------------------------------- verify

const std::vector<std::string> kAllChecks{"closure", "dual", "casimir", "shape", "crum", "alpha", "axioms"};

std::vector<std::string> default_checks(const ModelFile& m) {
  if (m.L != 2) return {"dual"};
  std::vector<std::string> c{"closure", "dual", "casimir", "shape"};
  if (m.coord.is_continuous()) c.push_back("crum");
  return c;
}

template <class T>
CheckReport run_check(const std::string& name, const ModelFile& m, unsigned long seed) {
  if (name == "axioms") return verify_coordinate_axioms<T>(m.coord, seed);
  if (name == "dual") {
    if (m.L < 2 || m.L > 4) throw Exit{kExitUnsupported, "dual closure is implemented for L = 2, 3, 4"};
    std::optional<DualClosureCoeffs<T>> ref;
    if (m.expected && m.expected->dual) {
      const auto& d = *m.expected->dual;
      ref = DualClosureCoeffs<T>{poly_cast<T>(d.R1d), poly_cast<T>(d.R0d), poly_cast<T>(d.Rm1d)};
    }
    return verify_dual_closure<T>(m.spec<T>(), m.coord, seed, ref);
  }
  require_L2(m, "check '" + name + "'");
  const auto spec = m.spec<T>();
  if (name == "closure") {
    std::optional<ClosureCoeffs<T>> ref;
    if (m.expected && m.expected->closure) {
      const auto& c = *m.expected->closure;
      ref = ClosureCoeffs<T>{scalar_cast<T>(c.r1_1),  scalar_cast<T>(c.r1_0),  scalar_cast<T>(c.r0_2),
                             scalar_cast<T>(c.r0_1),  scalar_cast<T>(c.r0_0),  scalar_cast<T>(c.rm1_2),
                             scalar_cast<T>(c.rm1_1), scalar_cast<T>(c.rm1_0)};
    }
    return verify_closure<T>(spec, m.coord, seed, ref);
  }
  if (name == "casimir") {
    std::optional<T> ref;
    if (m.expected && m.expected->casimir) ref = scalar_cast<T>(*m.expected->casimir);
    return verify_casimir<T>(spec, m.coord, seed, ref);
  }
  if (name == "shape" || name == "crum") {
    if (name == "crum" && !m.coord.is_continuous()) {
      throw Exit{kExitUnsupported, "the Crum check applies to continuous coordinates only"};
    }
    const PotentialSpec<T> base =
        m.coord.is_discrete() ? apply_discrete_boundary(spec, m.coord, m.coord.N()) : spec;
    const auto step = shape_step(base, m.coord);
    return name == "shape" ? verify_shape(base, m.coord, step, seed) : crum_step_check(base, m.coord, step, seed);
  }
  if (name == "alpha") return verify_alpha_pm(m.spec<double>(), m.coord);
  throw Exit{kExitInput, "unknown check '" + name + "'"};
}

int cmd_verify(const ModelFile& m, const std::optional<std::string>& checks_opt, unsigned long seed, bool record,
               const std::string& path, std::ostream& out, std::ostream& err) {
  if (record) {
    ModelFile copy = m;
    copy.expected = record_expected(m, m.coord.N() ? *m.coord.N() + 1 : 11);
    out << model_to_json(copy).dump(2) << "\n";
    return kExitPass;
  }
  std::vector<std::string> checks = checks_opt ? split_checks(*checks_opt) : default_checks(m);
  if (checks.empty()) throw Exit{kExitInput, "--checks needs at least one of " + [] {
                                   std::string s;
                                   for (const auto& c : kAllChecks) s += (s.empty() ? "" : ",") + c;
                                   return s;
                                 }()};
  for (const auto& c : checks) {
    if (std::find(kAllChecks.begin(), kAllChecks.end(), c) == kAllChecks.end()) {
      throw Exit{kExitInput, "unknown check '" + c + "'"};
    }
  }
  std::sort(checks.begin(), checks.end());
  checks.erase(std::unique(checks.begin(), checks.end()), checks.end());

  const Backend b = choose_backend(m.coord, err);
  Json reports = Json::array();
  bool all_pass = true;
  for (const auto& c : checks) {
    CheckReport r;
    try {
      r = b == Backend::Rational && c != "alpha" ? run_check<Rational>(c, m, seed) : run_check<double>(c, m, seed);
    } catch (const Error& e) {
      const int code = exit_code_for(e.kind());
      if (code != kExitFail) throw;
      r.check = c;
      r.pass = false;
      r.notes.push_back(e.what());
    }
    all_pass = all_pass && r.pass;
    reports.push_back(report_to_json(r));
  }
  Json j;
  j["model"] = path;
  j["backend"] = backend_name(b);
  j["seed"] = seed;
  j["status"] = all_pass ? "PASS" : "FAIL";
  j["checks"] = reports;
  out << j.dump(2) << "\n";
  return all_pass ? kExitPass : kExitFail;
}

// ---------------------------------------------------------------- qes

template <class T>
int qes_impl(const ModelFile& m, int M, bool report, Backend b, std::ostream& out, std::ostream& err) {
  const auto spec = m.spec<T>();
  V31Policy policy = V31Policy::Require;
  if (m.L == 4 && !m.has_key(3, 1)) {
    policy = V31Policy::Overwrite;
    err << "warning: v31 not given; setting v31 = -[M-1]/[M] v40\n";
  }
  const auto model = qes_build(spec, m.coord, M, policy);
  for (const auto& w : model.warnings) err << "warning: " << w << "\n";
  if (m.qes && m.qes->M == M) {
    auto mismatch = [&](const std::optional<Rational>& given, const T& computed, const char* name) {
      if (!given) return;
      const double g = to_double(*given), c = to_double(computed);
      if (std::abs(g - c) > 1e-10 * std::max({1.0, std::abs(g), std::abs(c)})) {
        throw Exit{kExitFail, std::string("qes.comp.") + name + " = " + num(g) + " but the model gives " + num(c)};
      }
    };
    mismatch(m.qes->e0, model.e0, "e0");
    if (model.e1) mismatch(m.qes->e1, *model.e1, "e1");
  }
  const auto mat = qes_matrix(model, m.coord);
  const auto eig = operator_eigenvalues(mat);
  double scale = 1.0;
  for (const auto& z : eig) scale = std::max(scale, std::abs(z));
  if (!report) {
    for (const auto& z : eig) out << complex_text(z, scale) << "\n";
    return kExitPass;
  }
  Json j;
  j["backend"] = backend_name(b);
  j["L"] = m.L;
  j["M"] = M;
  j["e0"] = jnum(model.e0);
  if (model.e1) j["e1"] = jnum(*model.e1);
  j["potential"] = potential_to_json(model.spec);
  Json rows = Json::array();
  for (int r = 0; r <= M; ++r) {
    Json row = Json::array();
    for (int c = 0; c <= M; ++c) row.push_back(jnum(mat.entries(r, c)));
    rows.push_back(row);
  }
  j["matrix"] = rows;
  Json ev = Json::array();
  for (const auto& z : eig) ev.push_back(Json{{"re", z.real()}, {"im", z.imag()}});
  j["eigenvalues"] = ev;
  j["warnings"] = model.warnings;
  out << j.dump(2) << "\n";
  return kExitPass;
}

int cmd_qes(const ModelFile& m, std::optional<int> M_opt, bool report, std::ostream& out, std::ostream& err) {
  if (m.L >= 5) {
    const auto ctx = bracket_context(m.coord);
    const int M = M_opt ? *M_opt : (m.qes ? m.qes->M : 6);
    std::string det;
    if (m.coord.is_linear_regime()) {
      det = format_scalar(*qes_feasible<Rational>(m.L, ctx, M).det);
    } else {
      det = num(*qes_feasible<double>(m.L, ctx, M).det);
    }
    out << "non-QES: det=[1/2]≠0 (L=" << m.L << ", M=" << M << ", det=" << det << ")\n";
    return kExitUnsupported;
  }
  if (m.L <= 2) {
    throw Exit{kExitUnsupported, "L=" + std::to_string(m.L) + " is exactly solvable; use `solvkit spectrum`"};
  }
  if (!M_opt && !m.qes) throw Exit{kExitInput, "qes needs --M or a qes block with M"};
  const int M = M_opt ? *M_opt : m.qes->M;
  if (M < 0) throw Exit{kExitInput, "--M must be >= 0"};
  const Backend b = choose_backend(m.coord, err);
  return b == Backend::Rational ? qes_impl<Rational>(m, M, report, b, out, err)
                                : qes_impl<double>(m, M, report, b, out, err);
}

// ---------------------------------------------------------------- lattice

Json vec_json(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(x);
  return a;
}

int cmd_lattice(const ModelFile& m, std::optional<int> M_opt, bool diag, const std::string& format,
                std::ostream& out) {
  if (!m.coord.is_discrete()) {
    throw Exit{kExitInput, std::string("lattice needs a discrete (D-kind) coordinate, got ") +
                               to_string(m.coord.kind())};
  }
  std::optional<int> N = m.coord.N(), K_tr;
  if (m.lattice) {
    if (m.lattice->N) N = m.lattice->N;
    K_tr = m.lattice->K_tr;
  }
  if (!N && !K_tr) throw Exit{kExitInput, "lattice needs N (coordinate or lattice block) or lattice.K_tr"};

  LatticeModel model = [&] {
    if (m.L == 2) return build_lattice(m.spec<double>(), m.coord, N, K_tr);
    if (m.L != 3 && m.L != 4) throw Exit{kExitUnsupported, "lattice models exist for L = 2, 3, 4"};
    if (!N) throw Exit{kExitUnsupported, "QES lattice models need a finite N"};
    return build_lattice(m.spec<double>(), m.coord, N, std::nullopt);
  }();

  CheckReport rep;
  Json j;
  j["report"] = nullptr;
  std::vector<double> eigenvalues;
  Eigen::MatrixXd vectors;
  if (m.L == 2) {
    auto s = spectrum_check(model);
    rep = s.report;
    eigenvalues = s.computed;
    vectors = s.eigenvectors;
    j["expected"] = vec_json(s.expected);
    j["min_eigenvalue"] = s.min_eigenvalue;
  } else {
    if (!M_opt && !m.qes) throw Exit{kExitInput, "a QES lattice needs --M or a qes block with M"};
    const int M = M_opt ? *M_opt : m.qes->M;
    const auto policy = m.L == 4 && !m.has_key(3, 1) ? V31Policy::Overwrite : V31Policy::Require;
    const auto q = qes_build(m.spec<double>(), m.coord.with_N(N), M, policy);
    if (!(q.spec == m.spec<double>())) model = build_lattice(q.spec, m.coord, N, std::nullopt);
    auto s = qes_lattice(model, q);
    rep = s.report;
    eigenvalues = s.h_prime_eigenvalues;
    Json ev = Json::array();
    for (const auto& z : s.qes_eigenvalues) ev.push_back(Json{{"re", z.real()}, {"im", z.imag()}});
    j["qes_eigenvalues"] = ev;
    j["matched"] = s.matched;
    j["min_eigenvalue"] = s.min_eigenvalue;
  }

  if (format == "csv") {
    out << "x,B,D,phi0";
    for (Eigen::Index c = 0; c < vectors.cols(); ++c) out << ",psi" << c;
    out << "\n";
    for (int x = 0; x < model.size(); ++x) {
      const auto ux = static_cast<size_t>(x);
      out << x << "," << num(model.B[ux]) << "," << num(model.D[ux]) << "," << num(model.phi0[ux]);
      for (Eigen::Index c = 0; c < vectors.cols(); ++c) out << "," << num(vectors(x, c));
      out << "\n";
    }
    return rep.pass ? kExitPass : kExitFail;
  }

  j["report"] = report_to_json(rep);
  j["approximate"] = model.approximate;
  j["computed"] = vec_json(eigenvalues);
  j["notes"] = model.notes;
  if (diag) {
    j["eta"] = vec_json(model.eta);
    j["B"] = vec_json(model.B);
    j["D"] = vec_json(model.D);
    j["phi0"] = vec_json(model.phi0);
    j["factor_residual"] = model.factor_residual;
    j["zero_mode_residual"] = model.zero_mode_residual;
    if (model.K_tr) j["tail"] = model.tail;
    Json H = Json::array();
    for (Eigen::Index r = 0; r < model.H.rows(); ++r) {
      Json row = Json::array();
      for (Eigen::Index c = 0; c < model.H.cols(); ++c) row.push_back(model.H(r, c));
      H.push_back(row);
    }
    j["H"] = H;
  }
  out << j.dump(2) << "\n";
  return rep.pass ? kExitPass : kExitFail;
}

// ---------------------------------------------------------------- catalog

int cmd_catalog(const std::string& format, std::ostream& out) {
  std::vector<SinusoidalCoordinate> coords;
  for (auto k : all_coordinate_kinds()) coords.push_back(SinusoidalCoordinate::example(k));
  coords.push_back(SinusoidalCoordinate::sinh_perturbed());
  Json arr = Json::array();
  for (const auto& c : coords) {
    const auto p = shift_params<double>(c);
    Json e;
    e["kind"] = to_string(c.kind());
    e["description"] = c.describe();
    e["shift"] = c.is_discrete() ? "real" : "imaginary";
    e["regime"] = to_string(bracket_context(c).regime());
    e["r11"] = p.r11;
    e["rm12"] = p.rm12;
    e["eta_mib_eta_pib"] = p.eta_product;
    arr.push_back(e);
  }
  if (format == "json") {
    out << arr.dump(2) << "\n";
    return kExitPass;
  }
  auto short_num = [](double x) {
    std::ostringstream os;
    os << std::setprecision(6) << (std::abs(x) < 1e-14 ? 0.0 : x);
    return os.str();
  };
  out << std::left << std::setw(5) << "kind" << std::setw(58) << "eta and example parameters" << std::setw(11)
      << "shift" << std::setw(15) << "regime" << std::setw(12) << "r11" << std::setw(12) << "r_-1^(2)"
      << "eta(-ib)eta(ib)\n";
  for (const auto& e : arr) {
    std::string desc = e["description"].get<std::string>();
    desc = desc.substr(desc.find(": ") + 2);
    out << std::left << std::setw(5) << e["kind"].get<std::string>() << std::setw(58) << desc << std::setw(11)
        << e["shift"].get<std::string>() << std::setw(15) << e["regime"].get<std::string>() << std::setw(12)
        << short_num(e["r11"].get<double>()) << std::setw(12) << short_num(e["rm12"].get<double>())
        << short_num(e["eta_mib_eta_pib"].get<double>()) << "\n";
  }
  return kExitPass;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"solvkit: exactly and quasi-exactly solvable discrete quantum mechanics"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  std::string model_path, list_format = "csv", lattice_format = "json", catalog_format = "text", checks_text;
  std::optional<int> n_max, M, level;
  unsigned long seed = 1;
  bool report = false, diag = false, record = false;

  auto* sp = app.add_subcommand("spectrum", "E(0..n_max) in closed form");
  sp->add_option("model", model_path, "model JSON file")->required();
  sp->add_option("--n-max", n_max, "highest level (default N, else 10)");
  sp->add_option("--format", list_format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  auto* ep = app.add_subcommand("eigenpoly", "coefficients of P_n in powers of eta");
  ep->add_option("model", model_path, "model JSON file")->required();
  ep->add_option("--n", level, "level")->required();
  ep->add_option("--format", list_format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  auto* vp = app.add_subcommand("verify", "pointwise identity checks; JSON report");
  vp->add_option("model", model_path, "model JSON file")->required();
  auto* checks_opt = vp->add_option("--checks", checks_text, "comma list of closure,dual,casimir,shape,crum,alpha,axioms");
  vp->add_option("--seed", seed, "sampling seed");
  vp->add_flag("--record", record, "print the model with an expected block of reference values");

  auto* qp = app.add_subcommand("qes", "quasi-exactly solvable sector V_M");
  qp->add_option("model", model_path, "model JSON file")->required();
  qp->add_option("--M", M, "degree of the invariant subspace");
  qp->add_flag("--report", report, "full JSON report");

  auto* lp = app.add_subcommand("lattice", "finite lattice Hamiltonian and its spectrum");
  lp->add_option("model", model_path, "model JSON file")->required();
  lp->add_option("--M", M, "QES degree for L = 3, 4");
  lp->add_flag("--diag", diag, "include B, D, phi0, H and residuals");
  lp->add_option("--format", lattice_format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  auto* cp = app.add_subcommand("catalog", "the sinusoidal coordinates and their shift data");
  cp->add_option("--format", catalog_format, "text or json")->check(CLI::IsMember({"text", "json"}));

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      if (auto subs = app.get_subcommands(); !subs.empty()) out << subs.front()->help();
      return kExitPass;
    }
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }

  try {
    if (cp->parsed()) return cmd_catalog(catalog_format, out);
    const ModelFile m = load_model(model_path);
    if (sp->parsed()) return cmd_spectrum(m, n_max, list_format, out, err);
    if (ep->parsed()) return cmd_eigenpoly(m, *level, list_format, out, err);
    if (vp->parsed()) {
      std::optional<std::string> checks;
      if (checks_opt->count() > 0) checks = checks_text;
      return cmd_verify(m, checks, seed, record, model_path, out, err);
    }
    if (qp->parsed()) return cmd_qes(m, M, report, out, err);
    if (lp->parsed()) return cmd_lattice(m, M, diag, lattice_format, out);
  } catch (const Exit& e) {
    err << "error: " << e.message << "\n";
    return e.code;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFail;
  }
  return kExitInput;
}

}  // namespace solvkit
