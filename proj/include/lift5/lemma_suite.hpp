#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace lift5 {

enum class CheckStatus { Pass, Fail, ReportOnly };
const char* status_name(CheckStatus s);

struct Measurement {
  std::string name;
  double value = 0.0;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool pass = true;
  std::string relation() const;  // "<= hi", ">= lo" or "in [lo, hi]"
};

struct LemmaCheckResult {
  std::string id;
  std::string statement;
  bool required = true;
  CheckStatus status = CheckStatus::Pass;
  std::vector<Measurement> measurements;
  std::map<std::string, double> fitted;
  std::vector<std::string> notes;
  double seconds = 0.0;

  const Measurement* find(const std::string& name) const;
  bool all_pass() const;
};

// Sizes default to the acceptance configuration.
struct SuiteConfig {
  int k_shift = 0;             // every level + k_shift, every length * 2^-k_shift
  double partition_gain = 1.0; // fault injection; 1 is the true partition
  std::uint64_t seed = 20261016;
  std::vector<std::string> only;  // empty: every check

  int mc_profiles = 20;
  int mc_samples = 200000;
  int recenter_packets = 100;
  int overlap_fields = 20;
  int band_fields = 20;
  int diffuse_fields = 10;
  int divfree_fields = 10;
  int frequency_fields = 2;
  int frequency_nr = 256;  // nz = 2 nr, R = L = 16
  int trend_steps = 5;
};

// Descriptive ids, in suite order.
const std::vector<std::string>& lemma_ids();
LemmaCheckResult run_lemma(const std::string& id, const SuiteConfig& cfg);

struct SuiteResult {
  std::vector<LemmaCheckResult> checks;
  bool required_pass = true;
  bool complete = false;  // every id exactly once
  double seconds = 0.0;
};

SuiteResult run_lemma_suite(const SuiteConfig& cfg);
std::string suite_table(const SuiteResult& r);
// JSON array of check objects for the shared report schema.
std::string suite_checks_json(const SuiteResult& r);
std::string check_json(const LemmaCheckResult& c);

}  // namespace lift5
