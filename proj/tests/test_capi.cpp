#include <doctest.h>

#include <cstring>
#include <string>
#include <vector>

#include <json.hpp>

#include "lift5/lift5.h"

using nlohmann::json;

namespace {

struct Str {
  char* p = nullptr;
  ~Str() { lift5_string_free(p); }
  json parse() const { return json::parse(p); }
};

struct Handle {
  lift5_bundle* p = nullptr;
  ~Handle() { lift5_bundle_free(p); }
};

std::vector<double> field(const lift5_bundle* b, const char* name) {
  Str info;
  REQUIRE(lift5_bundle_info(b, &info.p) == LIFT5_OK);
  const json j = info.parse();
  std::vector<double> v(j["nr"].get<std::size_t>() * j["nz"].get<std::size_t>());
  REQUIRE(lift5_bundle_field(b, name, v.data(), v.size()) == LIFT5_OK);
  return v;
}

}  // namespace

TEST_CASE("version and status names") {
  CHECK(std::strlen(lift5_version()) > 0);
  CHECK(lift5_schema_version() >= 1);
  CHECK(std::string(lift5_status_name(LIFT5_ERR_SCHEMA)) == "schema mismatch");
}

TEST_CASE("gen is deterministic and validates parameters") {
  const char* p = R"({"recipe": "gaussian", "nr": 32, "nz": 64, "seed": 7})";
  Handle a, b;
  REQUIRE(lift5_gen(p, &a.p) == LIFT5_OK);
  REQUIRE(lift5_gen(p, &b.p) == LIFT5_OK);
  CHECK(field(a.p, "G") == field(b.p, "G"));
  CHECK(std::string(lift5_last_error()).empty());

  Handle c;
  CHECK(lift5_gen(R"({"recipe": "nope"})", &c.p) == LIFT5_ERR_INVALID_ARGUMENT);
  CHECK(std::string(lift5_last_error()).find("nope") != std::string::npos);
  CHECK(c.p == nullptr);
  CHECK(lift5_gen(R"({"bogus": 1})", &c.p) == LIFT5_ERR_INVALID_ARGUMENT);
  CHECK(lift5_gen(R"({"nr": 2})", &c.p) == LIFT5_ERR_RANGE);
  CHECK(lift5_gen("{not json", &c.p) == LIFT5_ERR_INVALID_ARGUMENT);
  CHECK(lift5_gen(nullptr, nullptr) == LIFT5_ERR_INVALID_ARGUMENT);
  double x;
  CHECK(lift5_bundle_field(a.p, "G", &x, 1) == LIFT5_ERR_INVALID_ARGUMENT);
  CHECK(lift5_bundle_field(a.p, "missing", &x, 1) == LIFT5_ERR_INVALID_ARGUMENT);
}

TEST_CASE("thin ring round-trips to the thin_ring label") {
  Handle b;
  REQUIRE(lift5_gen(R"({"recipe": "thinring", "ratio": 0.05, "seed": 3})", &b.p) == LIFT5_OK);
  Str rep;
  REQUIRE(lift5_classify(b.p, nullptr, &rep.p) == LIFT5_OK);
  const json j = rep.parse();
  REQUIRE(j["data"]["packets"].size() == 1);
  CHECK(j["data"]["packets"][0]["label"] == "thin_ring");
  CHECK(j["command"] == "classify");
}

TEST_CASE("diffuse recipe is less concentrated than one bump of equal mass") {
  Handle d, s;
  REQUIRE(lift5_gen(R"({"recipe": "diffuse", "shells": 8, "mass": 1.0, "seed": 5})", &d.p) == LIFT5_OK);
  REQUIRE(lift5_gen(R"({"recipe": "gaussian", "mass": 1.0})", &s.p) == LIFT5_OK);
  const char* q = R"({"lambda": 1.0, "k_lo": -2, "k_hi": 2})";
  Str a, b;
  REQUIRE(lift5_score(d.p, q, &a.p) == LIFT5_OK);
  REQUIRE(lift5_score(s.p, q, &b.p) == LIFT5_OK);
  CHECK(a.parse()["data"]["delta"]["delta"].get<double>() < b.parse()["data"]["delta"]["delta"].get<double>());
  Str bad;
  CHECK(lift5_score(d.p, R"({"z0": 0})", &bad.p) == LIFT5_ERR_INVALID_ARGUMENT);
  CHECK(lift5_score(d.p, R"({"lambda": 1e-4})", &bad.p) == LIFT5_ERR_RESOLUTION);
}

TEST_CASE("scan and paraproduct reports") {
  Handle b;
  REQUIRE(lift5_gen(R"({"recipe": "diffuse", "nr": 64, "nz": 128, "shells": 4, "seed": 2})", &b.p) == LIFT5_OK);
  Str rep, csv;
  REQUIRE(lift5_scan(b.p, nullptr, &rep.p, &csv.p) == LIFT5_OK);
  CHECK(rep.parse()["data"]["argmax"]["Q_star"].get<double>() > 0);
  CHECK(std::string(csv.p).rfind("lambda,z0,Q\n", 0) == 0);
  Str pr, pcsv;
  int pass = -1;
  REQUIRE(lift5_paraproduct(b.p, R"({"k_min": -3, "k_max": 4, "range_lo": -2, "range_hi": 1, "C": 1.0})", &pr.p,
                            &pcsv.p, &pass) == LIFT5_OK);
  const json j = pr.parse();
  CHECK(j["data"]["C"] == 1.0);
  CHECK(pass == (j["data"]["bound_pass"].get<bool>() ? 1 : 0));
  Str bad;
  CHECK(lift5_paraproduct(b.p, R"({"k_min": 3, "k_max": 1})", &bad.p, nullptr, nullptr) == LIFT5_ERR_RANGE);
}

TEST_CASE("evolve: normal run and truncation") {
  Str rep;
  REQUIRE(lift5_evolve("nr = 32\nnz = 64\ndt = 0.002\nT_end = 0.01\n", R"({"snapshot_every": 5})", &rep.p) == LIFT5_OK);
  const json j = rep.parse();
  CHECK(j["data"]["snapshots"].size() == 2);
  for (const auto& c : j["checks"]) CHECK(c["pass"].get<bool>());
  Str t;
  CHECK(lift5_evolve(nullptr, R"({"nr": 32, "nz": 64, "amplitude": 500, "dt": 0.05, "T_end": 0.2, "scan": false})", &t.p) ==
        LIFT5_ERR_NUMERIC);
  REQUIRE(t.p != nullptr);
  CHECK(t.parse()["data"]["truncated"] == true);
  CHECK(std::strlen(lift5_last_error()) > 0);
  Str u;
  CHECK(lift5_evolve("bogus = 1\n", nullptr, &u.p) == LIFT5_ERR_INVALID_ARGUMENT);
}

TEST_CASE("lemmas subset and report merge") {
  Str rep, table;
  int pass = -1;
  REQUIRE(lift5_lemmas(R"({"only": ["partition", "bernstein"]})", &rep.p, &table.p, &pass) == LIFT5_OK);
  CHECK(pass == 1);
  CHECK(rep.parse()["checks"].size() == 2);
  Str broken;
  REQUIRE(lift5_lemmas(R"({"only": ["partition"], "partition_gain": 3.0})", &broken.p, nullptr, &pass) == LIFT5_OK);
  CHECK(pass == 0);
  Str bad;
  CHECK(lift5_lemmas(R"({"only": ["L9.9"]})", &bad.p, nullptr, nullptr) == LIFT5_ERR_INVALID_ARGUMENT);

  const char* docs[] = {rep.p, broken.p};
  Str bundle, csv;
  REQUIRE(lift5_report(docs, 2, &bundle.p, &csv.p) == LIFT5_OK);
  CHECK(bundle.parse()["inputs"]["run_ids"].size() == 2);
  CHECK(csv.parse().contains("psi_vs_delta.csv"));
  Str empty, ecsv;
  CHECK(lift5_report(nullptr, 0, &empty.p, &ecsv.p) == LIFT5_OK);
  const std::string foreign = R"({"tool": "lift5", "schema_version": 99})";
  const char* fdocs[] = {foreign.c_str()};
  Str f;
  CHECK(lift5_report(fdocs, 1, &f.p, nullptr) == LIFT5_ERR_SCHEMA);
}
