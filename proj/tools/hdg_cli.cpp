// Command line driver: convergence studies and the verification suite.
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "hdg/hdg.h"

namespace {

enum Exit { exit_ok = 0, exit_check = 1, exit_config = 2, exit_numerical = 3 };

int exit_code(hdg_status s) {
  switch (s) {
    case HDG_OK: return exit_ok;
    case HDG_ERR_CHECK_FAILED: return exit_check;
    case HDG_ERR_CONFIG:
    case HDG_ERR_PARSE:
    case HDG_ERR_TOPOLOGY:
    case HDG_ERR_INVALID_ARGUMENT: return exit_config;
    default: return exit_numerical;
  }
}

int report(hdg_status s) {
  std::cerr << "hdg: " << hdg_status_name(s) << ": " << hdg_last_error() << '\n';
  return exit_code(s);
}

struct Text {
  char* p = nullptr;
  ~Text() { hdg_free(p); }
  std::string str() const { return p ? p : ""; }
};

bool write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text << std::flush;
    return true;
  }
  std::ofstream out(path, std::ios::binary);
  out << text;
  return static_cast<bool>(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybridized DG solver for the Poisson problem: convergence studies and verification"};
  app.set_version_flag("--version", hdg_version());

  // Option name -> value, forwarded verbatim to the library.
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  auto add = [&](const std::string& name, const std::string& help) {
    options[name] = app.add_option("--" + name, values[name], help);
  };
  add("method", "dirichlet | neumann | mixed");
  add("k", "polynomial degree of V, N and M");
  add("w-degree", "same | plus-one");
  add("stab", "standard | ls");
  add("tau", "stabilization constant");
  add("tau-rule", "const | inv-h (tau = c / h_e)");
  add("mesh", "right-split | criss-cross | file:PATH (reads PATH.node and PATH.ele)");
  add("refine", "comma-separated refinement levels, e.g. 4,8,16,32");
  add("solution", "manufactured solution: sine | patch | patch-P | zero");
  add("labeling", "mixed method edge labels: parity | seed:INT | all-d | all-n");
  add("format", "csv | md");
  add("out", "output file (default: standard output)");
  add("json", "full-precision JSON sidecar path");
  add("checks", "on | off");
  add("jobs", "worker threads");
  std::string config_path;
  app.add_option("--config", config_path, "key = value settings file; command line flags take precedence")
      ->check(CLI::ExistingFile);

  auto* verify = app.add_subcommand("verify", "run the verification suite on small meshes");
  verify->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_config;
  }

  hdg_study* raw = nullptr;
  if (hdg_status s = hdg_study_create(&raw); s != HDG_OK) return report(s);
  std::unique_ptr<hdg_study, decltype(&hdg_study_destroy)> study(raw, &hdg_study_destroy);

  if (!config_path.empty()) {
    std::ifstream in(config_path);
    std::stringstream ss;
    ss << in.rdbuf();
    if (hdg_status s = hdg_study_load_config(study.get(), ss.str().c_str()); s != HDG_OK) return report(s);
  }
  // w-degree after k so that "plus-one" refers to the final k
  for (const char* name : {"method", "k", "w-degree", "stab", "tau", "tau-rule", "mesh", "refine", "solution",
                           "labeling", "format", "out", "json", "checks", "jobs"}) {
    if (options[name]->count() == 0) continue;
    if (hdg_status s = hdg_study_set(study.get(), name, values[name].c_str()); s != HDG_OK) return report(s);
  }
  if (const char* seed = std::getenv("HDG_SEED")) {
    Text labeling;
    if (hdg_status s = hdg_study_get(study.get(), "labeling", &labeling.p); s != HDG_OK) return report(s);
    if (labeling.str().rfind("seed:", 0) == 0) {
      const std::string v = std::string("seed:") + seed;
      if (hdg_status s = hdg_study_set(study.get(), "labeling", v.c_str()); s != HDG_OK) return report(s);
    }
  }

  Text out_path, json_path;
  hdg_study_get(study.get(), "out", &out_path.p);
  hdg_study_get(study.get(), "json", &json_path.p);

  if (verify->parsed()) {
    Text text;
    const hdg_status s = hdg_study_verify(study.get(), "text", &text.p);
    if (text.p && !write_text(out_path.str(), text.str())) {
      std::cerr << "hdg: cannot write " << out_path.str() << '\n';
      return exit_config;
    }
    if (!json_path.str().empty()) {
      Text js;
      hdg_study_verify(study.get(), "json", &js.p);
      if (js.p && !write_text(json_path.str(), js.str())) {
        std::cerr << "hdg: cannot write " << json_path.str() << '\n';
        return exit_config;
      }
    }
    return s == HDG_OK ? exit_ok : report(s);
  }

  const hdg_status run = hdg_study_run(study.get());
  if (run != HDG_OK && run != HDG_ERR_CHECK_FAILED) return report(run);
  Text format, table;
  hdg_study_get(study.get(), "format", &format.p);
  if (hdg_status s = hdg_study_emit(study.get(), format.str().c_str(), &table.p); s != HDG_OK) return report(s);
  if (!write_text(out_path.str(), table.str())) {
    std::cerr << "hdg: cannot write " << out_path.str() << '\n';
    return exit_config;
  }
  if (!json_path.str().empty()) {
    Text js;
    if (hdg_status s = hdg_study_emit(study.get(), "json", &js.p); s != HDG_OK) return report(s);
    if (!write_text(json_path.str(), js.str())) {
      std::cerr << "hdg: cannot write " << json_path.str() << '\n';
      return exit_config;
    }
  }
  if (run == HDG_ERR_CHECK_FAILED) {
    Text failed;
    hdg_study_failed_checks(study.get(), &failed.p);
    std::cerr << "hdg: failed checks:\n" << failed.str();
    return exit_check;
  }
  return exit_ok;
}
