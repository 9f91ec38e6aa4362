#include "lift5/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lift5/error.hpp"

namespace lift5 {

using nlohmann::json;

const char* tool_version() { return "0.1.0"; }

std::string make_run_id(const std::string& command, const std::string& inputs_json) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (unsigned char ch : command + '\n' + inputs_json) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s-%012llx", command.c_str(), static_cast<unsigned long long>(h & 0xffffffffffffull));
  return buf;
}

namespace {

json parse(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::Format, std::string("malformed ") + what + " JSON: " + e.what());
  }
}

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json level_map(const std::map<int, double>& m) {
  json o = json::object();
  for (const auto& [k, v] : m) o[std::to_string(k)] = num(v);
  return o;
}

double ratio(const ParaproductReport& r) { return r.D_crit > 0 ? std::abs(r.N_loc) / r.D_crit : 0.0; }

}  // namespace

std::string envelope_json(const Envelope& e) {
  json inputs = parse(e.inputs, "inputs");
  json j = {{"tool", "lift5"},
            {"version", tool_version()},
            {"schema_version", kSchemaVersion},
            {"run_id", e.run_id.empty() ? make_run_id(e.command, inputs.dump()) : e.run_id},
            {"command", e.command},
            {"inputs", inputs},
            {"checks", parse(e.checks, "checks")},
            {"data", parse(e.data, "data")}};
  return j.dump(2);
}

namespace {

void validate(const json& j) {
  require(j.is_object(), ErrorKind::Schema, "report is not a JSON object");
  require(j.value("tool", "") == "lift5", ErrorKind::Schema, "report was not written by lift5");
  require(j.contains("schema_version") && j["schema_version"].is_number_integer(), ErrorKind::Schema,
          "report has no schema_version");
  const int v = j["schema_version"].get<int>();
  require(v == kSchemaVersion, ErrorKind::Schema,
          "schema_version " + std::to_string(v) + " does not match " + std::to_string(kSchemaVersion));
  for (const char* key : {"version", "run_id", "command", "inputs", "checks", "data"})
    require(j.contains(key), ErrorKind::Schema, std::string("report lacks '") + key + "'");
  require(j["checks"].is_array(), ErrorKind::Schema, "'checks' is not an array");
  for (const auto& c : j["checks"])
    for (const char* key : {"name", "pass"})
      require(c.contains(key), ErrorKind::Schema, std::string("check lacks '") + key + "'");
}

}  // namespace

void validate_report(const std::string& text) { validate(parse(text, "report")); }

std::string paraproduct_json(const ParaproductReport& r) {
  json j = {{"kind", "paraproduct"},
            {"k_range", {r.k_range.lo, r.k_range.hi}},
            {"D", level_map(r.D)},
            {"I_LH", level_map(r.I_LH)},
            {"I_HL", level_map(r.I_HL)},
            {"I_HH", level_map(r.I_HH)},
            {"N_lift", num(r.N_lift)},
            {"N_loc", num(r.N_loc)},
            {"N_exterior", num(r.N_exterior)},
            {"N_naive", num(r.N_naive)},
            {"D_crit", num(r.D_crit)},
            {"R_shells", num(r.R_shells)},
            {"R_low", num(r.R_low)},
            {"delta", num(r.delta)},
            {"j_min", r.j_min},
            {"N0", r.N0},
            {"C0", r.C0},
            {"psi", {{"psi", num(r.psi.psi)}, {"psi_HL", num(r.psi.psi_HL)}, {"psi_HH", num(r.psi.psi_HH)}}},
            {"psi_total", num(r.psi_total)},
            {"C", num(r.C)},
            {"bound_pass", r.bound_pass},
            {"margin", num(r.margin)},
            {"strict_pass", r.strict_pass},
            {"strict_margin", num(r.strict_margin)},
            {"N_over_D_crit", num(ratio(r))}};
  return j.dump();
}

std::string paraproduct_checks_json(const ParaproductReport& r) {
  const double lhs = std::abs(r.N_loc);
  json a = json::array();
  a.push_back({{"name", "audit_bound"},
               {"value", num(lhs)},
               {"bound", num(r.psi_total * r.D_crit + r.C * r.R_low)},
               {"pass", r.bound_pass}});
  a.push_back({{"name", "audit_bound_strict"},
               {"value", num(lhs)},
               {"bound", num(r.psi_total * r.D_crit + r.C * r.R_shells)},
               {"pass", r.strict_pass}});
  return a.dump();
}

std::string paraproduct_csv(const ParaproductReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << "k,D_k,I_LH,I_HL,I_HH\n";
  auto at = [](const std::map<int, double>& m, int k) {
    const auto it = m.find(k);
    return it == m.end() ? 0.0 : it->second;
  };
  for (const auto& [k, d] : r.D) os << k << ',' << d << ',' << at(r.I_LH, k) << ',' << at(r.I_HL, k) << ',' << at(r.I_HH, k) << '\n';
  return os.str();
}

std::string scan_json(const ScoreScan& s) {
  json j = {{"kind", "score_scan"},
            {"lambdas", s.lambdas},
            {"argmax", {{"lambda", s.argmax.lambda}, {"z0", s.argmax.z0}, {"Q_star", num(s.argmax.q)}}},
            {"ratio", s.ratio},
            {"stride_factor", s.stride_factor},
            {"balls", 0}};
  std::size_t n = 0;
  for (const auto& c : s.centers) n += c.size();
  j["balls"] = n;
  return j.dump();
}

std::string scan_csv(const ScoreScan& s) {
  std::ostringstream os;
  os.precision(17);
  os << "lambda,z0,Q\n";
  for (std::size_t m = 0; m < s.lambdas.size(); ++m)
    for (std::size_t c = 0; c < s.centers[m].size(); ++c) os << s.lambdas[m] << ',' << s.centers[m][c] << ',' << s.scores[m][c] << '\n';
  return os.str();
}

std::string packets_json(const std::vector<LabeledPacket>& packets, const WindowCover* cover) {
  json a = json::array();
  for (const auto& lp : packets) {
    const Packet& p = lp.packet;
    a.push_back({{"center", {p.r_n, p.z_n}},
                 {"lambda", p.lambda_n},
                 {"mass", p.mass},
                 {"label", label_name(lp.label)},
                 {"eta_measured", p.eta_measured},
                 {"cells", p.cells.size()},
                 {"thickness", {p.thickness_r, p.thickness_z}},
                 {"touches_axis", p.touches_axis}});
  }
  json j = {{"kind", "packets"}, {"packets", a}};
  j["cover"] = cover ? json{{"k", cover->k}, {"J", cover->J}, {"N0", cover->N0}} : json(nullptr);
  return j.dump();
}

Bundle merge_reports(const std::vector<std::string>& documents) {
  json runs = json::array(), checks = json::array(), ids = json::array();
  std::ostringstream q, dk, pd;
  q.precision(17);
  dk.precision(17);
  pd.precision(17);
  q << "run_id,time,Q_star,lambda_star,z_star,energy,dissipation\n";
  dk << "run_id,k,D_k\n";
  pd << "run_id,delta,psi,psi_total,N_loc_abs,D_crit,N_over_D_crit,bound_pass\n";
  struct Row {
    double delta;
    std::string line;
  };
  std::vector<Row> trend;
  for (std::size_t n = 0; n < documents.size(); ++n) {
    json d = parse(documents[n], "report");
    try {
      validate(d);
    } catch (const Error& e) {
      fail(ErrorKind::Schema, "input " + std::to_string(n + 1) + ": " + e.what());
    }
    const std::string id = d["run_id"].get<std::string>();
    ids.push_back(id);
    for (auto c : d["checks"]) {
      c["run_id"] = id;
      checks.push_back(c);
    }
    const json& data = d["data"];
    const std::string kind = data.is_object() ? data.value("kind", "") : "";
    if (kind == "run_log") {
      for (const auto& s : data["snapshots"])
        q << id << ',' << s.value("time", 0.0) << ',' << s.value("Q_star", 0.0) << ',' << s.value("lambda_star", 0.0) << ','
          << s.value("z_star", 0.0) << ',' << s.value("energy", 0.0) << ',' << s.value("dissipation", 0.0) << '\n';
    } else if (kind == "paraproduct") {
      std::vector<std::pair<int, double>> D;
      for (const auto& [k, v] : data["D"].items()) D.emplace_back(std::stoi(k), v.is_null() ? NAN : v.get<double>());
      std::sort(D.begin(), D.end());
      for (const auto& [k, v] : D) dk << id << ',' << k << ',' << v << '\n';
      auto number = [](const json& v) { return v.is_number() ? v.get<double>() : NAN; };
      auto val = [&](const char* key) { return number(data.value(key, json())); };
      std::ostringstream row;
      row.precision(17);
      row << id << ',' << val("delta") << ',' << number(data["psi"].value("psi", json())) << ',' << val("psi_total") << ','
          << std::abs(val("N_loc")) << ',' << val("D_crit") << ',' << val("N_over_D_crit") << ','
          << (data.value("bound_pass", false) ? 1 : 0) << '\n';
      trend.push_back({val("delta"), row.str()});
    }
    runs.push_back({{"run_id", id}, {"command", d["command"]}, {"inputs", d["inputs"]}, {"data", data}});
  }
  std::stable_sort(trend.begin(), trend.end(), [](const Row& a, const Row& b) { return a.delta > b.delta; });
  for (const auto& r : trend) pd << r.line;

  json inputs = {{"documents", documents.size()}, {"run_ids", ids}};
  Envelope e;
  e.command = "report";
  e.inputs = inputs.dump();
  e.checks = checks.dump();
  e.data = json{{"kind", "bundle"}, {"runs", runs}}.dump();
  Bundle b;
  b.json = envelope_json(e);
  b.csv = {{"q_star_vs_t.csv", q.str()}, {"dk_spectra.csv", dk.str()}, {"psi_vs_delta.csv", pd.str()}};
  return b;
}

void write_atomic(const std::string& path, const std::string& contents) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) fail(ErrorKind::Io, "cannot open " + tmp + " for writing");
    os << contents;
    if (!os) fail(ErrorKind::Io, "write failed: " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(ErrorKind::Io, "cannot rename " + tmp + " to " + path + ": " + ec.message());
}

}  // namespace lift5
