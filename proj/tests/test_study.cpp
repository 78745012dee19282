#include <doctest.h>

#include <sstream>
#include <string>

#include <json.hpp>

#include "hdg/error.hpp"
#include "hdg/study.hpp"

namespace {

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

const char* header = "method,k,kW,stab,tau,inv_h,err_q,ord_q,err_u,ord_u,err_piwu,ord_piwu,energy_resid,flux_resid";

}  // namespace

TEST_SUITE("study") {

TEST_CASE("settings") {
  hdg::StudyConfig c;
  hdg::apply_setting(c, "method", "neumann");
  hdg::apply_setting(c, "w_degree", "plus-one");
  hdg::apply_setting(c, "k", "2");
  CHECK(c.method.k_w == 3);
  hdg::apply_setting(c, "stab", "ls");
  hdg::apply_setting(c, "tau-rule", "inv-h");
  hdg::apply_setting(c, "tau", "0.5");
  hdg::apply_setting(c, "refine", "[2, 4, 8]");
  hdg::apply_setting(c, "labeling", "seed:17");
  hdg::apply_setting(c, "format", "md");
  hdg::apply_setting(c, "checks", "off");
  hdg::apply_setting(c, "jobs", "2");
  hdg::apply_setting(c, "mesh", "\"criss-cross\"");
  CHECK(c.method.method == hdg::Method::neumann);
  CHECK(c.method.tau == 0.5);
  CHECK(c.refinements == std::vector<int>{2, 4, 8});
  CHECK(c.method.labeling == hdg::LabelingRule::seeded);
  CHECK(c.method.seed == 17);
  CHECK(c.format == hdg::OutputFormat::markdown);
  CHECK_FALSE(c.checks);
  CHECK(c.mesh == "criss-cross");
  CHECK_NOTHROW(c.validate());

  CHECK_THROWS_AS(hdg::apply_setting(c, "method", "bogus"), hdg::Error);
  CHECK_THROWS_AS(hdg::apply_setting(c, "k", "two"), hdg::Error);
  CHECK_THROWS_AS(hdg::apply_setting(c, "colour", "red"), hdg::Error);
  CHECK_THROWS_AS(hdg::apply_setting(c, "labeling", "seed:x"), hdg::Error);
  CHECK_THROWS_AS(hdg::apply_setting(c, "refine", "4,,8"), hdg::Error);
}

TEST_CASE("refinement list must increase") {
  hdg::StudyConfig c;
  c.refinements = {4, 4};
  CHECK_THROWS_AS(c.validate(), hdg::Error);
  c.refinements = {8, 4};
  CHECK_THROWS_AS(c.validate(), hdg::Error);
  c.refinements = {0};
  CHECK_THROWS_AS(c.validate(), hdg::Error);
  CHECK(hdg::parse_refinements("").empty());
}

TEST_CASE("config text") {
  hdg::StudyConfig c;
  hdg::apply_config_text(c,
                         "# sweep\n"
                         "method = mixed   # trailing comment\n"
                         "k=3\n"
                         "\n"
                         "refine = 2,4\n");
  CHECK(c.method.method == hdg::Method::mixed);
  CHECK(c.method.k == 3);
  CHECK(c.refinements == std::vector<int>{2, 4});
  CHECK_THROWS_AS(hdg::apply_config_text(c, "just words\n"), hdg::Error);
}

TEST_CASE("empty refinement list gives a header-only CSV") {
  hdg::StudyConfig c;
  c.refinements = {};
  const hdg::ConvergenceReport r = hdg::run_study(c);
  CHECK(r.rows.empty());
  CHECK(hdg::emit(r, hdg::OutputFormat::csv) == std::string(header) + "\n");
}

TEST_CASE("one row has no orders, two rows carry log2 orders") {
  hdg::StudyConfig c;
  c.refinements = {4};
  auto out = lines(hdg::emit(hdg::run_study(c), hdg::OutputFormat::csv));
  REQUIRE(out.size() == 2);
  CHECK(out[0] == header);
  CHECK(out[1].rfind("dirichlet,1,1,standard,1,4,", 0) == 0);
  CHECK(out[1].find(",--,") != std::string::npos);

  c.refinements = {4, 8};
  const hdg::ConvergenceReport r = hdg::run_study(c);
  REQUIRE(r.rows.size() == 2);
  REQUIRE(r.rows[1].ord_q);
  CHECK(*r.rows[1].ord_q == doctest::Approx(std::log2(r.rows[0].errors.err_q / r.rows[1].errors.err_q)));
  out = lines(hdg::emit(r, hdg::OutputFormat::csv));
  CHECK(out[2].find("--") == std::string::npos);
  CHECK(r.ok());
}

TEST_CASE("CSV is deterministic and independent of the thread count") {
  hdg::StudyConfig c;
  c.method.method = hdg::Method::mixed;
  c.method.k = 2;
  c.method.k_w = 2;
  c.refinements = {2, 4, 8};
  const std::string a = hdg::emit(hdg::run_study(c), hdg::OutputFormat::csv);
  CHECK(a == hdg::emit(hdg::run_study(c), hdg::OutputFormat::csv));
  c.method.jobs = 4;
  CHECK(a == hdg::emit(hdg::run_study(c), hdg::OutputFormat::csv));
}

TEST_CASE("markdown and JSON output") {
  hdg::StudyConfig c;
  c.refinements = {2, 4};
  c.method.stabilization = hdg::Stabilization::ls;
  c.method.k_w = 2;
  c.method.tau_rule = hdg::TauRule::inverse_h;
  const hdg::ConvergenceReport r = hdg::run_study(c);
  const std::string md = hdg::emit(r, hdg::OutputFormat::markdown);
  CHECK(md.find("| k | 1/h |") != std::string::npos);
  CHECK(lines(md).size() == 2 + 2 + 2);
  const auto j = nlohmann::json::parse(hdg::emit_json(r));
  CHECK(j["rows"].size() == 2);
  CHECK(j["rows"][0]["ord_q"].is_null());
  CHECK(j["rows"][1]["err_u"].get<double>() == r.rows[1].errors.err_u);
  CHECK(j["rows"][0]["err_piwu"].is_null());  // tau varies on each element
  const auto csv = lines(hdg::emit(r, hdg::OutputFormat::csv));
  CHECK(csv[1].rfind("dirichlet,1,2,ls,1/h,2,", 0) == 0);
}

TEST_CASE("zero solution study") {
  hdg::StudyConfig c;
  c.solution = "zero";
  c.refinements = {2, 4};
  const hdg::ConvergenceReport r = hdg::run_study(c);
  CHECK(r.ok());
  for (const auto& row : r.rows) {
    CHECK(row.errors.err_q == 0.0);
    CHECK(row.errors.err_u == 0.0);
    CHECK(row.errors.energy_resid <= 1e-10);
    CHECK_FALSE(row.ord_q);
  }
}

TEST_CASE("verification suite") {
  hdg::StudyConfig c;
  for (hdg::Method m : {hdg::Method::dirichlet, hdg::Method::neumann, hdg::Method::mixed}) {
    c.method.method = m;
    const hdg::VerificationSummary s = hdg::run_verification_suite(c);
    CHECK(s.ok());
    CHECK(s.checks.size() >= 8);
    CHECK(nlohmann::json::parse(s.to_json())["passed"].get<bool>());
  }
  SUBCASE("k = 0 smoke run") {
    c.method.k = 0;
    c.method.k_w = 0;
    CHECK(hdg::run_verification_suite(c).ok());
    c.refinements = {2, 4};
    const hdg::ConvergenceReport r = hdg::run_study(c);
    CHECK(std::isfinite(r.rows[1].errors.err_q));
  }
  SUBCASE("negative tau is reported, not thrown") {
    c.method.tau = -1.0;
    hdg::VerificationSummary s;
    CHECK_NOTHROW(s = hdg::run_verification_suite(c));
    CHECK_FALSE(s.ok());
    CHECK(s.to_text().find("FAIL") != std::string::npos);
  }
}

}
