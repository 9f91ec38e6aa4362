#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lift5/error.hpp"
#include "lift5/paraproduct.hpp"
#include "lift5/recipes.hpp"
#include "lift5/report.hpp"

using namespace lift5;
using nlohmann::json;

namespace {

std::string doc(const std::string& command, const std::string& inputs, const std::string& data = "{}") {
  Envelope e;
  e.command = command;
  e.inputs = inputs;
  e.data = data;
  return envelope_json(e);
}

std::vector<std::string> csv_column(const std::string& csv, const std::string& name) {
  std::istringstream is(csv);
  std::string line, cell;
  std::getline(is, line);
  std::istringstream hs(line);
  int col = -1, n = 0;
  while (std::getline(hs, cell, ',')) {
    if (cell == name) col = n;
    ++n;
  }
  std::vector<std::string> out;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    for (int c = 0; std::getline(ls, cell, ','); ++c)
      if (c == col) out.push_back(cell);
  }
  return out;
}

}  // namespace

TEST_CASE("envelope carries the shared schema") {
  const json j = json::parse(doc("score", R"({"lambda": 0.5})"));
  CHECK(j["tool"] == "lift5");
  CHECK(j["schema_version"] == kSchemaVersion);
  CHECK(j["checks"].is_array());
  CHECK(j["run_id"] == make_run_id("score", json::parse(R"({"lambda": 0.5})").dump()));
  CHECK(make_run_id("score", "{}") != make_run_id("scan", "{}"));
  CHECK_NOTHROW(validate_report(j.dump()));
}

TEST_CASE("schema violations are rejected") {
  json j = json::parse(doc("score", "{}"));
  j["schema_version"] = kSchemaVersion + 1;
  CHECK_THROWS_AS(validate_report(j.dump()), Error);
  try {
    merge_reports({j.dump()});
    FAIL("merge accepted a foreign schema version");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Schema);
  }
  json k = json::parse(doc("score", "{}"));
  k.erase("checks");
  CHECK_THROWS_AS(validate_report(k.dump()), Error);
  CHECK_THROWS_AS(validate_report("not json"), Error);
  CHECK_THROWS_AS(validate_report(R"({"tool": "other", "schema_version": 1})"), Error);
}

TEST_CASE("empty merge gives an empty bundle") {
  const Bundle b = merge_reports({});
  const json j = json::parse(b.json);
  CHECK(j["data"]["runs"].empty());
  CHECK(j["checks"].empty());
  REQUIRE(b.csv.size() == 3);
  for (const auto& [name, text] : b.csv) CHECK(std::count(text.begin(), text.end(), '\n') == 1);
}

TEST_CASE("merged bundle keeps both run ids") {
  const std::string a = doc("evolve", R"({"seed": 1})", R"({"kind": "run_log", "snapshots": [{"time": 0, "Q_star": 1.5}]})");
  const std::string b = doc("evolve", R"({"seed": 2})", R"({"kind": "run_log", "snapshots": [{"time": 0, "Q_star": 2.5}]})");
  const Bundle m = merge_reports({a, b});
  const json j = json::parse(m.json);
  const auto ids = j["inputs"]["run_ids"];
  REQUIRE(ids.size() == 2);
  CHECK(ids[0] == json::parse(a)["run_id"]);
  CHECK(ids[1] == json::parse(b)["run_id"]);
  CHECK(ids[0] != ids[1]);
  CHECK(csv_column(m.csv[0].second, "Q_star").size() == 2);
}

TEST_CASE("diffuse sequence gives a decreasing |N|/D_crit column") {
  auto g = HalfPlaneGrid::create(64, 128, 8.0, 8.0);
  Rng rng(9);
  const auto base = diffuse_noise(g, 4, 0, 1.0, rng);
  ParaproductConfig cfg;
  cfg.partition = DyadicPartition(-3, 4);
  cfg.range = LevelRange{-2, 1};
  std::vector<std::string> docs;
  // Shuffled on purpose: the CSV orders by delta.
  for (int n : {2, 0, 3, 1}) {
    auto rep = decompose_nonlinearity(std::ldexp(1.0, -n) * base, cfg);
    audit_bound(rep, 1.0);
    docs.push_back(doc("paraproduct", "{\"n\": " + std::to_string(n) + "}", paraproduct_json(rep)));
  }
  const Bundle m = merge_reports(docs);
  const auto& csv = m.csv[2].second;
  REQUIRE(m.csv[2].first == "psi_vs_delta.csv");
  const auto ratio = csv_column(csv, "N_over_D_crit"), delta = csv_column(csv, "delta");
  REQUIRE(ratio.size() == 4);
  for (std::size_t n = 1; n < ratio.size(); ++n) {
    CHECK(std::stod(delta[n]) < std::stod(delta[n - 1]));
    CHECK(std::stod(ratio[n]) < std::stod(ratio[n - 1]));
  }
  CHECK(csv_column(m.csv[1].second, "D_k").size() == 4 * 4);  // one row per singular level
}

TEST_CASE("atomic write replaces the target") {
  const auto dir = std::filesystem::temp_directory_path() / "lift5_report_test";
  std::filesystem::remove_all(dir);
  const std::string path = (dir / "sub" / "x.json").string();
  write_atomic(path, "one");
  write_atomic(path, "two");
  std::ifstream is(path);
  std::string s;
  is >> s;
  CHECK(s == "two");
  CHECK_FALSE(std::filesystem::exists(path + ".tmp"));
  std::filesystem::remove_all(dir);
}
