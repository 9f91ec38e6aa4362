#include <doctest.h>

#include <set>

#include "lift5/error.hpp"
#include "lift5/lemma_suite.hpp"

using namespace lift5;

namespace {

SuiteConfig small() {
  SuiteConfig c;
  c.mc_profiles = 6;
  c.mc_samples = 50000;
  c.recenter_packets = 20;
  c.overlap_fields = 4;
  c.band_fields = 6;
  c.diffuse_fields = 5;
  c.divfree_fields = 1;
  c.frequency_fields = 1;
  c.frequency_nr = 128;
  c.trend_steps = 3;
  return c;
}

std::set<std::string> passing(const SuiteResult& r) {
  std::set<std::string> s;
  for (const auto& c : r.checks)
    if (c.status != CheckStatus::Fail) s.insert(c.id);
  return s;
}

}  // namespace

TEST_CASE("every lemma id runs exactly once") {
  const auto& ids = lemma_ids();
  CHECK(std::set<std::string>(ids.begin(), ids.end()).size() == ids.size());
  SuiteConfig c = small();
  c.only = {"partition", "bernstein"};
  const auto part = run_lemma_suite(c);
  CHECK(part.checks.size() == 2);
  CHECK_FALSE(part.complete);
  CHECK_THROWS_AS(run_lemma("no_such_check", c), Error);
}

TEST_CASE("reduced suite: pass set, scale covariance and fault injection") {
  SuiteConfig c = small();
  const SuiteResult base = run_lemma_suite(c);
  INFO(suite_table(base));
  CHECK(base.complete);
  CHECK(base.required_pass);
  CHECK(base.checks.size() == lemma_ids().size());
  for (const auto& r : base.checks) {
    CHECK_FALSE(r.measurements.empty());
    if (!r.required) CHECK(r.status == CheckStatus::ReportOnly);
  }

  c.k_shift = 2;
  const SuiteResult shifted = run_lemma_suite(c);
  INFO(suite_table(shifted));
  CHECK(passing(shifted) == passing(base));

  c.k_shift = 0;
  c.partition_gain = 3.0;
  c.only = {"partition", "dissipation_equivalence", "bernstein"};
  const SuiteResult broken = run_lemma_suite(c);
  REQUIRE(broken.checks.size() == 3);
  CHECK(broken.checks[0].status == CheckStatus::Fail);
  CHECK(broken.checks[1].status == CheckStatus::Fail);
  CHECK_FALSE(broken.required_pass);
}

TEST_CASE("report-only checks still record measurements") {
  SuiteConfig c = small();
  const auto r = run_lemma("starvation_monitor", c);
  CHECK(r.status == CheckStatus::ReportOnly);
  REQUIRE(r.find("zero_field_residual"));
  CHECK(r.find("zero_field_residual")->value == 0.0);
  const std::string js = check_json(r);
  CHECK(js.find("\"report-only\"") != std::string::npos);
}
