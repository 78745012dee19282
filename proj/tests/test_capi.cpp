// Exercises the shared library through its C interface only.
#include <doctest.h>

#include <cmath>
#include <string>

#include "hdg/hdg.h"

namespace {

struct Owned {
  char* p = nullptr;
  ~Owned() { hdg_free(p); }
  std::string str() const { return p ? p : ""; }
};

}  // namespace

TEST_SUITE("capi") {

TEST_CASE("study lifecycle") {
  hdg_study* s = nullptr;
  REQUIRE(hdg_study_create(&s) == HDG_OK);
  CHECK(hdg_study_set(s, "method", "neumann") == HDG_OK);
  CHECK(hdg_study_set(s, "k", "2") == HDG_OK);
  CHECK(hdg_study_set(s, "refine", "2,4") == HDG_OK);
  {
    Owned v;
    CHECK(hdg_study_get(s, "refine", &v.p) == HDG_OK);
    CHECK(v.str() == "2,4");
  }
  CHECK(hdg_study_row_count(s) == 0);
  CHECK(hdg_study_run(s) == HDG_OK);
  REQUIRE(hdg_study_row_count(s) == 2);
  hdg_row row;
  CHECK(hdg_study_row(s, 0, &row) == HDG_OK);
  CHECK(std::isnan(row.ord_q));
  CHECK(hdg_study_row(s, 1, &row) == HDG_OK);
  CHECK(row.inv_h == 4.0);
  CHECK(row.ord_q > 2.0);
  CHECK(row.energy_resid < 1e-10);
  CHECK(hdg_study_row(s, 2, &row) == HDG_ERR_INVALID_ARGUMENT);

  Owned csv, md, js, failed;
  CHECK(hdg_study_emit(s, "csv", &csv.p) == HDG_OK);
  CHECK(csv.str().rfind("method,k,kW", 0) == 0);
  CHECK(hdg_study_emit(s, "md", &md.p) == HDG_OK);
  CHECK(hdg_study_emit(s, "json", &js.p) == HDG_OK);
  CHECK(js.str().find("\"rows\"") != std::string::npos);
  CHECK(hdg_study_failed_checks(s, &failed.p) == HDG_OK);
  CHECK(failed.str().empty());
  char* bad = nullptr;
  CHECK(hdg_study_emit(s, "xml", &bad) == HDG_ERR_INVALID_ARGUMENT);
  hdg_study_destroy(s);
}

TEST_CASE("errors map to status codes") {
  hdg_study* s = nullptr;
  REQUIRE(hdg_study_create(&s) == HDG_OK);
  CHECK(hdg_study_set(s, "method", "spectral") == HDG_ERR_CONFIG);
  CHECK(std::string(hdg_last_error()).find("method") != std::string::npos);
  CHECK(hdg_study_set(s, nullptr, "x") == HDG_ERR_INVALID_ARGUMENT);
  CHECK(hdg_study_load_config(s, "k = 1\nno equals sign\n") == HDG_ERR_CONFIG);
  char* text = nullptr;
  CHECK(hdg_study_emit(s, "csv", &text) == HDG_ERR_INVALID_ARGUMENT);  // not run yet
  CHECK(hdg_study_set(s, "tau", "-1") == HDG_OK);
  CHECK(hdg_study_set(s, "refine", "2") == HDG_OK);
  CHECK(hdg_study_run(s) == HDG_ERR_NUMERICAL);
  Owned report;
  CHECK(hdg_study_verify(s, "text", &report.p) == HDG_ERR_CHECK_FAILED);
  CHECK(report.str().find("FAIL") != std::string::npos);
  hdg_study_destroy(s);
  CHECK(std::string(hdg_status_name(HDG_ERR_TOPOLOGY)) == "topology error");
}

TEST_CASE("verification suite through the C API") {
  hdg_study* s = nullptr;
  REQUIRE(hdg_study_create(&s) == HDG_OK);
  CHECK(hdg_study_set(s, "method", "mixed") == HDG_OK);
  Owned report;
  CHECK(hdg_study_verify(s, "json", &report.p) == HDG_OK);
  CHECK(report.str().find("\"passed\": true") != std::string::npos);
  hdg_study_destroy(s);
}

TEST_CASE("mesh handles") {
  hdg_mesh* m = nullptr;
  REQUIRE(hdg_mesh_structured(4, "criss-cross", &m) == HDG_OK);
  int nv = 0, nt = 0, ne = 0;
  CHECK(hdg_mesh_counts(m, &nv, &nt, &ne) == HDG_OK);
  CHECK(nt == 64);
  double h = 0.0, ratio = 0.0, beta = 0.0;
  CHECK(hdg_mesh_quality(m, &h, &ratio) == HDG_OK);
  CHECK(h > 0.0);
  CHECK(hdg_mesh_infsup(m, 1, &beta) == HDG_OK);
  CHECK(beta >= 1.0 / std::sqrt(2.0) - 1e-8);
  hdg_mesh_destroy(m);

  CHECK(hdg_mesh_structured(2, "hexagonal", &m) == HDG_ERR_CONFIG);
  CHECK(hdg_mesh_import("3 2 0 0\n0 0 0\n1 1 0\n2 2 0\n", "1 3 0\n0 0 1 2\n", &m) == HDG_ERR_TOPOLOGY);
  CHECK(hdg_mesh_import("garbage", "1 3 0\n0 0 1 2\n", &m) == HDG_ERR_PARSE);
}

}
