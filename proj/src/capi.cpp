#include "hdg/hdg.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <new>
#include <optional>
#include <string>

#include "hdg/error.hpp"
#include "hdg/mesh.hpp"
#include "hdg/solver.hpp"
#include "hdg/study.hpp"

struct hdg_study {
  hdg::StudyConfig config;
  std::optional<hdg::ConvergenceReport> report;
};

struct hdg_mesh {
  hdg::Mesh mesh;
};

namespace {

thread_local std::string last_error;

hdg_status status_of(hdg::ErrorKind kind) {
  switch (kind) {
    case hdg::ErrorKind::config: return HDG_ERR_CONFIG;
    case hdg::ErrorKind::parse: return HDG_ERR_PARSE;
    case hdg::ErrorKind::topology: return HDG_ERR_TOPOLOGY;
    case hdg::ErrorKind::numerical: return HDG_ERR_NUMERICAL;
    case hdg::ErrorKind::contract: return HDG_ERR_CONTRACT;
  }
  return HDG_ERR_INTERNAL;
}

hdg_status set_error(hdg_status s, const std::string& what) {
  last_error = what;
  return s;
}

template <class F>
hdg_status guard(F&& body) {
  try {
    last_error.clear();
    return body();
  } catch (const hdg::Error& e) {
    return set_error(status_of(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(HDG_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(HDG_ERR_INTERNAL, e.what());
  }
}

char* duplicate(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

double value_or_nan(const std::optional<double>& x) {
  return x ? *x : std::numeric_limits<double>::quiet_NaN();
}

std::string setting(const hdg::StudyConfig& c, const std::string& key) {
  const auto& m = c.method;
  if (key == "method") return hdg::to_string(m.method);
  if (key == "k") return std::to_string(m.k);
  if (key == "w-degree") return m.k_w == m.k ? "same" : "plus-one";
  if (key == "stab") return hdg::to_string(m.stabilization);
  if (key == "tau") {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", m.tau);
    return buf;
  }
  if (key == "tau-rule") return m.tau_rule == hdg::TauRule::constant ? "const" : "inv-h";
  if (key == "mesh") return c.mesh;
  if (key == "refine") {
    std::string s;
    for (std::size_t i = 0; i < c.refinements.size(); ++i) s += (i ? "," : "") + std::to_string(c.refinements[i]);
    return s;
  }
  if (key == "solution") return c.solution;
  if (key == "labeling") {
    switch (m.labeling) {
      case hdg::LabelingRule::parity: return "parity";
      case hdg::LabelingRule::all_d: return "all-d";
      case hdg::LabelingRule::all_n: return "all-n";
      case hdg::LabelingRule::seeded: return "seed:" + std::to_string(m.seed);
    }
  }
  if (key == "format") return c.format == hdg::OutputFormat::csv ? "csv" : "md";
  if (key == "out") return c.out_path;
  if (key == "json") return c.json_path;
  if (key == "checks") return c.checks ? "on" : "off";
  if (key == "jobs") return std::to_string(m.jobs);
  hdg::fail(hdg::ErrorKind::config, "unknown setting '" + key + "'");
}

}  // namespace

extern "C" {

const char* hdg_version(void) { return "1.0.0"; }

const char* hdg_last_error(void) { return last_error.c_str(); }

const char* hdg_status_name(hdg_status status) {
  switch (status) {
    case HDG_OK: return "ok";
    case HDG_ERR_CONFIG: return "configuration error";
    case HDG_ERR_PARSE: return "parse error";
    case HDG_ERR_TOPOLOGY: return "topology error";
    case HDG_ERR_NUMERICAL: return "numerical failure";
    case HDG_ERR_CONTRACT: return "contract violation";
    case HDG_ERR_INVALID_ARGUMENT: return "invalid argument";
    case HDG_ERR_CHECK_FAILED: return "check failed";
    case HDG_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void hdg_free(char* text) { std::free(text); }

hdg_status hdg_study_create(hdg_study** out) {
  if (!out) return set_error(HDG_ERR_INVALID_ARGUMENT, "null output pointer");
  return guard([&] {
    *out = new hdg_study();
    return HDG_OK;
  });
}

void hdg_study_destroy(hdg_study* study) { delete study; }

hdg_status hdg_study_set(hdg_study* study, const char* key, const char* value) {
  if (!study || !key || !value) return set_error(HDG_ERR_INVALID_ARGUMENT, "null argument");
  return guard([&] {
    hdg::StudyConfig c = study->config;
    hdg::apply_setting(c, key, value);
    study->config = std::move(c);
    return HDG_OK;
  });
}

hdg_status hdg_study_get(const hdg_study* study, const char* key, char** value) {
  if (!study || !key || !value) return set_error(HDG_ERR_INVALID_ARGUMENT, "null argument");
  return guard([&] {
    *value = duplicate(setting(study->config, key));
    return HDG_OK;
  });
}

hdg_status hdg_study_load_config(hdg_study* study, const char* text) {
  if (!study || !text) return set_error(HDG_ERR_INVALID_ARGUMENT, "null argument");
  return guard([&] {
    hdg::StudyConfig c = study->config;
    hdg::apply_config_text(c, text);
    study->config = std::move(c);
    return HDG_OK;
  });
}

hdg_status hdg_study_run(hdg_study* study) {
  if (!study) return set_error(HDG_ERR_INVALID_ARGUMENT, "null study");
  return guard([&] {
    study->report.reset();
    study->report = hdg::run_study(study->config);
    if (!study->report->ok()) {
      return set_error(HDG_ERR_CHECK_FAILED, study->report->failed_checks.front());
    }
    return HDG_OK;
  });
}

size_t hdg_study_row_count(const hdg_study* study) {
  return study && study->report ? study->report->rows.size() : 0;
}

hdg_status hdg_study_row(const hdg_study* study, size_t index, hdg_row* row) {
  if (!study || !row) return set_error(HDG_ERR_INVALID_ARGUMENT, "null argument");
  if (!study->report) return set_error(HDG_ERR_INVALID_ARGUMENT, "study has not been run");
  if (index >= study->report->rows.size()) return set_error(HDG_ERR_INVALID_ARGUMENT, "row index out of range");
  const hdg::StudyRow& r = study->report->rows[index];
  row->inv_h = r.inv_h;
  row->h = r.h;
  row->err_q = r.errors.err_q;
  row->ord_q = value_or_nan(r.ord_q);
  row->err_u = r.errors.err_u;
  row->ord_u = value_or_nan(r.ord_u);
  row->err_piwu = value_or_nan(r.errors.err_piwu);
  row->ord_piwu = value_or_nan(r.ord_piwu);
  row->err_pivq = value_or_nan(r.errors.err_pivq);
  row->energy_resid = r.errors.energy_resid;
  row->flux_resid = r.errors.flux_resid;
  row->transmission_resid = r.errors.transmission_resid;
  last_error.clear();
  return HDG_OK;
}

hdg_status hdg_study_emit(const hdg_study* study, const char* format, char** text) {
  if (!study || !format || !text) return set_error(HDG_ERR_INVALID_ARGUMENT, "null argument");
  if (!study->report) return set_error(HDG_ERR_INVALID_ARGUMENT, "study has not been run");
  return guard([&] {
    const std::string f = format;
    if (f == "csv") *text = duplicate(hdg::emit(*study->report, hdg::OutputFormat::csv));
    else if (f == "md") *text = duplicate(hdg::emit(*study->report, hdg::OutputFormat::markdown));
    else if (f == "json") *text = duplicate(hdg::emit_json(*study->report));
    else return set_error(HDG_ERR_INVALID_ARGUMENT, "unknown format '" + f + "'");
    return HDG_OK;
  });
}

hdg_status hdg_study_failed_checks(const hdg_study* study, char** text) {
  if (!study || !text) return set_error(HDG_ERR_INVALID_ARGUMENT, "null argument");
  if (!study->report) return set_error(HDG_ERR_INVALID_ARGUMENT, "study has not been run");
  return guard([&] {
    std::string s;
    for (const auto& c : study->report->failed_checks) s += c + "\n";
    *text = duplicate(s);
    return HDG_OK;
  });
}

hdg_status hdg_study_verify(const hdg_study* study, const char* format, char** report) {
  if (!study || !format || !report) return set_error(HDG_ERR_INVALID_ARGUMENT, "null argument");
  return guard([&] {
    const hdg::VerificationSummary summary = hdg::run_verification_suite(study->config);
    *report = duplicate(std::string(format) == "json" ? summary.to_json() : summary.to_text());
    if (!summary.ok()) {
      for (const auto& c : summary.checks) {
        if (!c.passed) return set_error(HDG_ERR_CHECK_FAILED, c.name);
      }
    }
    return HDG_OK;
  });
}

hdg_status hdg_mesh_structured(int n, const char* pattern, hdg_mesh** out) {
  if (!pattern || !out) return set_error(HDG_ERR_INVALID_ARGUMENT, "null argument");
  return guard([&] {
    const std::string p = pattern;
    hdg::MeshPattern mp;
    if (p == "right-split") mp = hdg::MeshPattern::right_split;
    else if (p == "criss-cross") mp = hdg::MeshPattern::criss_cross;
    else return set_error(HDG_ERR_CONFIG, "unknown mesh pattern '" + p + "'");
    *out = new hdg_mesh{hdg::build_structured_mesh(n, mp)};
    return HDG_OK;
  });
}

hdg_status hdg_mesh_import(const char* node_text, const char* ele_text, hdg_mesh** out) {
  if (!node_text || !ele_text || !out) return set_error(HDG_ERR_INVALID_ARGUMENT, "null argument");
  return guard([&] {
    *out = new hdg_mesh{hdg::import_mesh(node_text, ele_text)};
    return HDG_OK;
  });
}

void hdg_mesh_destroy(hdg_mesh* mesh) { delete mesh; }

hdg_status hdg_mesh_counts(const hdg_mesh* mesh, int* vertices, int* triangles, int* edges) {
  if (!mesh) return set_error(HDG_ERR_INVALID_ARGUMENT, "null mesh");
  if (vertices) *vertices = mesh->mesh.num_vertices();
  if (triangles) *triangles = mesh->mesh.num_triangles();
  if (edges) *edges = mesh->mesh.num_edges();
  last_error.clear();
  return HDG_OK;
}

hdg_status hdg_mesh_quality(const hdg_mesh* mesh, double* h, double* shape_ratio) {
  if (!mesh) return set_error(HDG_ERR_INVALID_ARGUMENT, "null mesh");
  return guard([&] {
    const hdg::MeshStats s = hdg::mesh_stats(mesh->mesh);
    if (h) *h = s.h;
    if (shape_ratio) *shape_ratio = s.shape_ratio;
    return HDG_OK;
  });
}

hdg_status hdg_mesh_infsup(const hdg_mesh* mesh, int k, double* value) {
  if (!mesh || !value) return set_error(HDG_ERR_INVALID_ARGUMENT, "null argument");
  if (k < 0) return set_error(HDG_ERR_INVALID_ARGUMENT, "k must be >= 0");
  return guard([&] {
    *value = hdg::infsup_estimate(mesh->mesh, k);
    return HDG_OK;
  });
}

}  // extern "C"
