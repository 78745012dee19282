#include "hdg/study.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hdg/error.hpp"
#include "hdg/projections.hpp"
#include "hdg/solver.hpp"

namespace hdg {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

int parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long x = std::stol(v, &used);
    if (used == v.size() && x >= -1000000 && x <= 1000000) return static_cast<int>(x);
  } catch (const std::exception&) {
  }
  fail(ErrorKind::config, "invalid integer for " + key + ": '" + v + "'");
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used == v.size()) return x;
  } catch (const std::exception&) {
  }
  fail(ErrorKind::config, "invalid number for " + key + ": '" + v + "'");
}

bool is_file_mesh(const std::string& mesh) { return mesh.rfind("file:", 0) == 0; }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::config, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Mesh load_file_mesh(const std::string& spec) {
  const std::string base = spec.substr(5);
  return import_mesh(read_file(base + ".node"), read_file(base + ".ele"));
}

Mesh structured(const std::string& pattern, int n) {
  return build_structured_mesh(n, pattern == "criss-cross" ? MeshPattern::criss_cross : MeshPattern::right_split);
}

}  // namespace

std::vector<int> parse_refinements(const std::string& text) {
  std::string t = trim(text);
  if (!t.empty() && t.front() == '[' && t.back() == ']') t = t.substr(1, t.size() - 2);
  std::vector<int> out;
  std::stringstream ss(t);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) {
      if (!trim(t).empty()) fail(ErrorKind::config, "empty entry in refinement list '" + text + "'");
      continue;
    }
    out.push_back(parse_int("refine", item));
  }
  return out;
}

void StudyConfig::validate() const {
  method.validate();
  if (mesh != "right-split" && mesh != "criss-cross" && !is_file_mesh(mesh)) {
    fail(ErrorKind::config, "unknown mesh '" + mesh + "'");
  }
  for (std::size_t i = 0; i < refinements.size(); ++i) {
    if (refinements[i] < 1) fail(ErrorKind::config, "refinement levels must be positive");
    if (i > 0 && refinements[i] <= refinements[i - 1]) {
      fail(ErrorKind::config, "refinement list must be strictly increasing");
    }
  }
  manufactured_solution(solution);
}

void apply_setting(StudyConfig& c, const std::string& raw_key, const std::string& raw_value) {
  std::string key = trim(raw_key);
  std::replace(key.begin(), key.end(), '_', '-');
  std::string v = trim(raw_value);
  if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front()) v = v.substr(1, v.size() - 2);
  auto bad = [&]() { fail(ErrorKind::config, "invalid value for " + key + ": '" + v + "'"); };
  if (key == "method") {
    if (v == "dirichlet") c.method.method = Method::dirichlet;
    else if (v == "neumann") c.method.method = Method::neumann;
    else if (v == "mixed") c.method.method = Method::mixed;
    else bad();
  } else if (key == "k") {
    const bool plus_one = c.method.k_w == c.method.k + 1;
    c.method.k = parse_int(key, v);
    c.method.k_w = c.method.k + (plus_one ? 1 : 0);
  } else if (key == "w-degree") {
    if (v == "same") c.method.k_w = c.method.k;
    else if (v == "plus-one") c.method.k_w = c.method.k + 1;
    else bad();
  } else if (key == "stab") {
    if (v == "standard") c.method.stabilization = Stabilization::standard;
    else if (v == "ls") c.method.stabilization = Stabilization::ls;
    else bad();
  } else if (key == "tau") {
    c.method.tau = parse_double(key, v);
  } else if (key == "tau-rule") {
    if (v == "const") c.method.tau_rule = TauRule::constant;
    else if (v == "inv-h") c.method.tau_rule = TauRule::inverse_h;
    else bad();
  } else if (key == "mesh") {
    if (v != "right-split" && v != "criss-cross" && !(is_file_mesh(v) && v.size() > 5)) bad();
    c.mesh = v;
  } else if (key == "refine") {
    c.refinements = parse_refinements(v);
  } else if (key == "solution") {
    c.solution = v;
  } else if (key == "labeling") {
    if (v == "parity") c.method.labeling = LabelingRule::parity;
    else if (v == "all-d") c.method.labeling = LabelingRule::all_d;
    else if (v == "all-n") c.method.labeling = LabelingRule::all_n;
    else if (v.rfind("seed:", 0) == 0) {
      const std::string s = v.substr(5);
      try {
        std::size_t used = 0;
        c.method.seed = std::stoull(s, &used);
        if (used != s.size()) bad();
      } catch (const std::exception&) {
        bad();
      }
      c.method.labeling = LabelingRule::seeded;
    } else bad();
  } else if (key == "format") {
    if (v == "csv") c.format = OutputFormat::csv;
    else if (v == "md") c.format = OutputFormat::markdown;
    else bad();
  } else if (key == "out") {
    c.out_path = v;
  } else if (key == "json") {
    c.json_path = v;
  } else if (key == "checks") {
    if (v == "on") c.checks = true;
    else if (v == "off") c.checks = false;
    else bad();
  } else if (key == "jobs") {
    c.method.jobs = parse_int(key, v);
  } else {
    fail(ErrorKind::config, "unknown setting '" + key + "'");
  }
}

void apply_config_text(StudyConfig& config, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(ErrorKind::config, "line " + std::to_string(lineno) + ": expected key = value");
    }
    apply_setting(config, line.substr(0, eq), line.substr(eq + 1));
  }
}

ConvergenceReport run_study(const StudyConfig& config) {
  config.validate();
  const ManufacturedSolution exact = manufactured_solution(config.solution);
  ConvergenceReport report;
  report.config = config;

  auto run_level = [&](const Mesh& mesh, int n) {
    StudyRow row;
    row.n = n;
    row.h = mesh_stats(mesh).h;
    row.inv_h = n > 0 ? n : 1.0 / row.h;
    const Discretization disc(mesh, config.method);
    const HDGSolution sol = solve_condensed(disc, exact.f);
    row.errors = evaluate(disc, sol, exact);
    report.rows.push_back(std::move(row));
  };
  if (is_file_mesh(config.mesh)) {
    run_level(load_file_mesh(config.mesh), 0);
  } else {
    for (int n : config.refinements) run_level(structured(config.mesh, n), n);
  }

  std::vector<double> h, eq, eu, ep;
  for (const auto& r : report.rows) {
    h.push_back(1.0 / r.inv_h);
    eq.push_back(r.errors.err_q);
    eu.push_back(r.errors.err_u);
    ep.push_back(r.errors.err_piwu.value_or(0.0));
  }
  const auto oq = eoc(eq, h), ou = eoc(eu, h), op = eoc(ep, h);
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    report.rows[i].ord_q = oq[i];
    report.rows[i].ord_u = ou[i];
    report.rows[i].ord_piwu = op[i];
  }

  if (config.checks) {
    for (const auto& r : report.rows) {
      char buf[48];
      std::snprintf(buf, sizeof buf, " at 1/h=%.6g", r.inv_h);
      const std::string at = buf;
      if (!(r.errors.energy_resid <= identity_tolerance)) report.failed_checks.push_back("energy-identity" + at);
      if (!(r.errors.flux_resid <= identity_tolerance)) report.failed_checks.push_back("flux-identity" + at);
      if (!(r.errors.transmission_resid <= identity_tolerance)) report.failed_checks.push_back("transmission" + at);
      if (r.errors.err_pivq && !(r.errors.err_q <= 2.0 * *r.errors.err_pivq + 1e-12)) {
        report.failed_checks.push_back("projection-corollary" + at);
      }
    }
  }
  return report;
}

namespace {

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

std::string sci(double x) { return fmt("%.5e", x); }
std::string sci(const std::optional<double>& x) { return x ? sci(*x) : "--"; }
std::string num(double x) { return fmt("%.6g", x); }
std::string order(const std::optional<double>& x) { return x ? fmt("%.6g", *x) : "--"; }

std::string tau_label(const MethodConfig& m) {
  return m.tau_rule == TauRule::constant ? num(m.tau) : num(m.tau) + "/h";
}

}  // namespace

std::string emit(const ConvergenceReport& report, OutputFormat format) {
  const MethodConfig& m = report.config.method;
  std::ostringstream out;
  if (format == OutputFormat::csv) {
    out << "method,k,kW,stab,tau,inv_h,err_q,ord_q,err_u,ord_u,err_piwu,ord_piwu,energy_resid,flux_resid\n";
    for (const auto& r : report.rows) {
      out << to_string(m.method) << ',' << m.k << ',' << m.k_w << ',' << to_string(m.stabilization) << ','
          << tau_label(m) << ',' << num(r.inv_h) << ',' << sci(r.errors.err_q) << ',' << order(r.ord_q) << ','
          << sci(r.errors.err_u) << ',' << order(r.ord_u) << ',' << sci(r.errors.err_piwu) << ','
          << order(r.ord_piwu) << ',' << sci(r.errors.energy_resid) << ',' << sci(r.errors.flux_resid) << '\n';
    }
    return out.str();
  }
  out << "Convergence history: " << to_string(m.method) << "-type, k = " << m.k << ", k_W = " << m.k_w << ", "
      << to_string(m.stabilization) << " stabilization, tau = " << tau_label(m) << ", mesh " << report.config.mesh
      << "\n\n";
  out << "| k | 1/h | ||q-q_h|| | Order | ||u-u_h|| | Order | ||Pi_W u-u_h|| | Order |\n";
  out << "|---|---|---|---|---|---|---|---|\n";
  for (const auto& r : report.rows) {
    out << "| " << m.k << " | " << num(r.inv_h) << " | " << sci(r.errors.err_q) << " | " << order(r.ord_q) << " | "
        << sci(r.errors.err_u) << " | " << order(r.ord_u) << " | " << sci(r.errors.err_piwu) << " | "
        << order(r.ord_piwu) << " |\n";
  }
  return out.str();
}

std::string emit_json(const ConvergenceReport& report) {
  using nlohmann::json;
  const MethodConfig& m = report.config.method;
  auto opt = [](const std::optional<double>& x) { return x ? json(*x) : json(nullptr); };
  json j;
  j["method"] = to_string(m.method);
  j["k"] = m.k;
  j["kW"] = m.k_w;
  j["stab"] = to_string(m.stabilization);
  j["tau"] = m.tau;
  j["tau_rule"] = m.tau_rule == TauRule::constant ? "const" : "inv-h";
  j["mesh"] = report.config.mesh;
  j["solution"] = report.config.solution;
  j["rows"] = json::array();
  for (const auto& r : report.rows) {
    j["rows"].push_back({{"n", r.n},
                         {"inv_h", r.inv_h},
                         {"h", r.h},
                         {"err_q", r.errors.err_q},
                         {"ord_q", opt(r.ord_q)},
                         {"err_u", r.errors.err_u},
                         {"ord_u", opt(r.ord_u)},
                         {"err_piwu", opt(r.errors.err_piwu)},
                         {"ord_piwu", opt(r.ord_piwu)},
                         {"err_pivq", opt(r.errors.err_pivq)},
                         {"energy_resid", r.errors.energy_resid},
                         {"flux_resid", r.errors.flux_resid},
                         {"transmission_resid", r.errors.transmission_resid}});
  }
  j["failed_checks"] = report.failed_checks;
  return j.dump(2, ' ', false, json::error_handler_t::replace) + "\n";
}

bool VerificationSummary::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::string VerificationSummary::to_json() const {
  nlohmann::json j;
  j["passed"] = ok();
  j["checks"] = nlohmann::json::array();
  for (const auto& c : checks) {
    j["checks"].push_back({{"name", c.name},
                           {"passed", c.passed},
                           {"value", c.value},
                           {"tolerance", c.tolerance},
                           {"detail", c.detail}});
  }
  return j.dump(2) + "\n";
}

std::string VerificationSummary::to_text() const {
  std::ostringstream out;
  for (const auto& c : checks) {
    out << (c.passed ? "PASS " : "FAIL ") << c.name << "  value=" << sci(c.value) << " tol=" << sci(c.tolerance);
    if (!c.detail.empty()) out << "  (" << c.detail << ")";
    out << '\n';
  }
  return out.str();
}

VerificationSummary run_verification_suite(const StudyConfig& config) {
  config.validate();
  const ManufacturedSolution exact = manufactured_solution(config.solution);
  const ScalarField zero = [](const Point&) { return 0.0; };
  const bool from_file = is_file_mesh(config.mesh);
  auto mesh_at = [&](int n) { return from_file ? load_file_mesh(config.mesh) : structured(config.mesh, n); };
  VerificationSummary summary;

  // Runs `body`, turning hdg::Error into a failed check named `name`.
  auto guarded = [&](const std::string& name, double tol, const auto& body) {
    CheckResult c;
    c.name = name;
    c.tolerance = tol;
    try {
      body(c);
    } catch (const Error& e) {
      c.passed = false;
      c.value = std::nan("");
      c.detail = e.what();
    }
    summary.checks.push_back(std::move(c));
  };

  const std::vector<int> levels = from_file ? std::vector<int>{0} : std::vector<int>{1, 2, 4};
  guarded("oracle-equivalence", 1e-9, [&](CheckResult& c) {
    for (int n : levels) {
      const Mesh mesh = mesh_at(n);
      const Discretization disc(mesh, config.method);
      c.value = std::max(c.value, relative_difference(solve_condensed(disc, exact.f), solve_monolithic(disc, exact.f)));
    }
    c.passed = c.value <= c.tolerance;
    c.detail = "condensed vs monolithic";
  });

  const Mesh mesh4 = mesh_at(4);
  std::optional<ErrorReport> errors;
  std::string solve_error;
  try {
    const Discretization disc(mesh4, config.method);
    errors = evaluate(disc, solve_condensed(disc, exact.f), exact);
  } catch (const Error& e) {
    solve_error = e.what();
  }
  auto from_report = [&](const std::string& name, double tol, auto pick) {
    guarded(name, tol, [&](CheckResult& c) {
      if (!errors) fail(ErrorKind::numerical, solve_error);
      c.value = pick(*errors);
      c.passed = c.value <= tol;
    });
  };
  from_report("energy-identity", identity_tolerance, [](const ErrorReport& r) { return r.energy_resid; });
  from_report("flux-residual", identity_tolerance, [](const ErrorReport& r) { return r.flux_resid; });
  from_report("transmission", identity_tolerance, [](const ErrorReport& r) { return r.transmission_resid; });
  guarded("projection-corollary", 1e-12, [&](CheckResult& c) {
    if (!errors) fail(ErrorKind::numerical, solve_error);
    if (!errors->err_pivq) {
      c.passed = true;
      c.detail = "not applicable: needs standard stabilization with tau constant per element";
      return;
    }
    c.value = std::max(0.0, errors->err_q - 2.0 * *errors->err_pivq);
    c.passed = c.value <= c.tolerance;
    c.detail = "||q-q_h|| - 2 ||q-Pi_V q||";
  });

  guarded("zero-data", 1e-11, [&](CheckResult& c) {
    const Discretization disc(mesh4, config.method);
    c.value = max_coefficient(solve_condensed(disc, zero));
    c.passed = c.value <= c.tolerance;
  });

  guarded("m-index", 0.0, [&](CheckResult& c) {
    const FiniteElement fe(config.method.k, config.method.k, default_quadrature_degree(config.method.k, config.method.k));
    const ElementSpaces sp = make_element_spaces(mesh4, 0, fe, {1.0, 1.0, 1.0});
    c.value = std::abs(m_index(sp));
    c.passed = c.value == 0.0;
  });

  guarded("inf-sup", 1e-8, [&](CheckResult& c) {
    double lo = 1.0, hi = 0.0;
    for (int n : from_file ? std::vector<int>{0} : std::vector<int>{2, 4}) {
      const double beta = infsup_estimate(mesh_at(n), config.method.k);
      lo = std::min(lo, beta);
      hi = std::max(hi, beta);
    }
    c.value = lo;
    c.passed = lo >= 1.0 / std::sqrt(2.0) - c.tolerance && hi <= 1.0 + c.tolerance;
    c.detail = "min " + num(lo) + ", max " + num(hi) + ", expected in [1/sqrt(2), 1]";
  });
  return summary;
}

}  // namespace hdg
