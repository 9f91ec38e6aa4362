#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lift5/lift5.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kCheckFailed = 1, kUsage = 2, kNumeric = 3 };

struct Failure {
  int code;
  std::string message;
};

int exit_code(lift5_status s) {
  if (s == LIFT5_OK) return kOk;
  return s == LIFT5_ERR_NUMERIC ? kNumeric : kUsage;
}

[[noreturn]] void raise(lift5_status s, const std::string& what) {
  throw Failure{exit_code(s), what + ": " + lift5_status_name(s) + ": " + lift5_last_error()};
}

void ok(lift5_status s, const std::string& what) {
  if (s != LIFT5_OK) raise(s, what);
}

struct CString {
  char* p = nullptr;
  ~CString() { lift5_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

struct BundleHandle {
  lift5_bundle* p = nullptr;
  ~BundleHandle() { lift5_bundle_free(p); }
};

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Failure{kUsage, "cannot open " + path};
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_atomic(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    os << contents;
    if (!os) throw Failure{kUsage, "cannot write " + tmp.string()};
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Failure{kUsage, "cannot rename " + tmp.string() + ": " + ec.message()};
}

// key = value lines, '#' comments; numbers and booleans keep their type.
json config_params(const std::string& path) {
  json j = json::object();
  if (path.empty()) return j;
  std::istringstream is(read_file(path));
  std::string line;
  int n = 0;
  while (std::getline(is, line)) {
    ++n;
    if (const auto h = line.find('#'); h != std::string::npos) line.resize(h);
    const auto eq = line.find('=');
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r"), b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    if (trim(line).empty()) continue;
    if (eq == std::string::npos) throw Failure{kUsage, path + ":" + std::to_string(n) + ": expected key = value"};
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    json v = json::parse(value, nullptr, false);
    j[key] = v.is_discarded() || v.is_object() || v.is_array() ? json(value) : v;
  }
  return j;
}

struct Global {
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  int threads = 0;
  bool json_out = false;
};

// Config file values, then the seed flag, then subcommand flags.
json params_for(const Global& g, const std::map<std::string, json>& flags) {
  json p = config_params(g.config);
  if (g.seed) p["seed"] = *g.seed;
  for (const auto& [k, v] : flags) p[k] = v;
  return p;
}

template <class T>
void set_if(std::map<std::string, json>& m, const std::string& key, const std::optional<T>& v) {
  if (v) m[key] = *v;
}

void emit(const Global& g, const std::string& report, const std::string& summary) {
  if (g.json_out)
    std::cout << report << "\n";
  else
    std::cout << summary;
}

bool all_checks_pass(const std::string& report) {
  const json j = json::parse(report);
  for (const auto& c : j["checks"])
    if (!c.value("pass", false)) return false;
  return true;
}

BundleHandle load(const std::string& path) {
  BundleHandle b;
  ok(lift5_bundle_read(path.c_str(), &b.p), "reading " + path);
  return b;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lifted axisymmetric Navier-Stokes diagnostics"};
  app.require_subcommand(1);
  app.fallthrough();
  Global g;
  std::uint64_t seed_value = 0;
  app.add_option("--config", g.config, "key = value parameter file")->check(CLI::ExistingFile);
  app.add_option("--out", g.out, "output directory");
  auto* seed_opt = app.add_option("--seed", seed_value, "random seed");
  app.add_option("--threads", g.threads, "worker threads (0: all cores)")->check(CLI::Range(0, 1024));
  app.add_flag("--json", g.json_out, "print the JSON report instead of a summary");
  app.set_version_flag("--version", std::string(lift5_version()));

  // gen
  auto* gen = app.add_subcommand("gen", "write an initial-data recipe as a SWRL1 file");
  std::string recipe = "gaussian", gen_file;
  std::optional<int> g_nr, g_nz, g_shells;
  std::optional<double> g_R, g_L, g_amp, g_ratio, g_mass;
  gen->add_option("--recipe", recipe, "gaussian, rings, diffuse or thinring");
  gen->add_option("--nr", g_nr);
  gen->add_option("--nz", g_nz);
  gen->add_option("--R-max", g_R);
  gen->add_option("--L-z", g_L);
  gen->add_option("--amplitude", g_amp);
  gen->add_option("--ratio", g_ratio, "thinring cross-section over radius");
  gen->add_option("--shells", g_shells, "diffuse levels");
  gen->add_option("--mass", g_mass, "rescale G to this mu5 mass");
  gen->add_option("-o,--output", gen_file, "file name (default OUT/RECIPE.swrl)");

  // evolve
  auto* evolve = app.add_subcommand("evolve", "run the desk-scale solver");
  std::vector<std::string> settings;
  evolve->add_option("--set", settings, "key=value solver override")->take_all();

  // score
  auto* score = app.add_subcommand("score", "axis-ball score of one field");
  std::string score_file;
  std::optional<double> s_lambda, s_z0;
  std::optional<int> s_klo, s_khi;
  score->add_option("file", score_file)->required()->check(CLI::ExistingFile);
  score->add_option("--lambda", s_lambda)->required();
  score->add_option("--z0", s_z0);
  score->add_option("--k-lo", s_klo, "also report delta over k-lo..k-hi");
  score->add_option("--k-hi", s_khi);

  // scan
  auto* scan = app.add_subcommand("scan", "sup-scan Q_* over scales and centers");
  std::string scan_file;
  std::optional<double> sc_lo, sc_hi, sc_stride, sc_ratio;
  scan->add_option("file", scan_file)->required()->check(CLI::ExistingFile);
  scan->add_option("--lambda-min", sc_lo);
  scan->add_option("--lambda-max", sc_hi);
  scan->add_option("--stride", sc_stride, "center stride over lambda");
  scan->add_option("--ratio", sc_ratio, "scale ratio");

  // classify
  auto* classify = app.add_subcommand("classify", "detect and label packets");
  std::string cl_file;
  std::optional<double> cl_eta, cl_C0, cl_level, cl_fraction;
  std::optional<int> cl_k, cl_N0;
  classify->add_option("file", cl_file)->required()->check(CLI::ExistingFile);
  classify->add_option("--eta", cl_eta);
  classify->add_option("--C0", cl_C0);
  classify->add_option("--level", cl_level, "explicit level on |G|^2");
  classify->add_option("--mass-fraction", cl_fraction);
  classify->add_option("--k", cl_k, "dyadic level (default: from each packet's scale)");
  classify->add_option("--N0", cl_N0);

  // paraproduct
  auto* para = app.add_subcommand("paraproduct", "audit the localized paraproduct bound");
  std::string pp_file;
  std::optional<int> pp_kmin, pp_kmax, pp_lo, pp_hi, pp_N0, pp_cal;
  std::optional<double> pp_C;
  para->add_option("file", pp_file)->required()->check(CLI::ExistingFile);
  para->add_option("--k-min", pp_kmin);
  para->add_option("--k-max", pp_kmax);
  para->add_option("--range-lo", pp_lo);
  para->add_option("--range-hi", pp_hi);
  para->add_option("--N0", pp_N0);
  para->add_option("--C", pp_C, "remainder constant (default: fitted)");
  para->add_option("--calibration-fields", pp_cal);

  // lemmas
  auto* lemmas = app.add_subcommand("lemmas", "run the lemma-check suite");
  std::optional<int> lm_shift;
  std::optional<double> lm_gain;
  std::vector<std::string> lm_only;
  bool lm_quick = false;
  lemmas->add_option("--k-shift", lm_shift, "shift every level (lengths scale by 2^-shift)");
  lemmas->add_option("--partition-gain", lm_gain, "fault injection: scale the partition");
  lemmas->add_option("--only", lm_only, "run only these ids");
  lemmas->add_flag("--quick", lm_quick, "reduced sample sizes");

  // report
  auto* report = app.add_subcommand("report", "merge JSON reports into a bundle with CSVs");
  std::vector<std::string> inputs;
  report->add_option("inputs", inputs)->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }
  if (seed_opt->count()) g.seed = seed_value;

  try {
    ok(lift5_set_threads(g.threads), "--threads");
    const fs::path out(g.out);

    if (*gen) {
      std::map<std::string, json> f{{"recipe", recipe}};
      set_if(f, "nr", g_nr);
      set_if(f, "nz", g_nz);
      set_if(f, "R_max", g_R);
      set_if(f, "L_z", g_L);
      set_if(f, "amplitude", g_amp);
      set_if(f, "ratio", g_ratio);
      set_if(f, "shells", g_shells);
      set_if(f, "mass", g_mass);
      const json p = params_for(g, f);
      BundleHandle b;
      ok(lift5_gen(p.dump().c_str(), &b.p), "gen");
      const fs::path file = gen_file.empty() ? out / (p.value("recipe", recipe) + ".swrl") : fs::path(gen_file);
      if (file.has_parent_path()) fs::create_directories(file.parent_path());
      ok(lift5_bundle_write(b.p, file.string().c_str()), "writing " + file.string());
      CString info;
      ok(lift5_bundle_info(b.p, &info.p), "gen");
      json j = json::parse(info.str());
      j["path"] = file.string();
      j["params"] = p;
      emit(g, j.dump(2), "wrote " + file.string() + "\n");
      return kOk;
    }

    if (*evolve) {
      json p = json::object();
      if (g.seed) p["seed"] = *g.seed;
      for (const auto& s : settings) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw Failure{kUsage, "--set expects key=value, got '" + s + "'"};
        p[s.substr(0, eq)] = s.substr(eq + 1);
      }
      p["out"] = (out / "snapshots").string();
      const std::string text = g.config.empty() ? "" : read_file(g.config);
      CString rep;
      const lift5_status st = lift5_evolve(g.config.empty() ? nullptr : text.c_str(), p.dump().c_str(), &rep.p);
      if (rep.p) write_atomic(out / "run_log.json", rep.str());
      if (st != LIFT5_OK) {
        if (rep.p && !g.json_out) std::cerr << "run truncated; partial log in " << (out / "run_log.json").string() << "\n";
        raise(st, "evolve");
      }
      const json j = json::parse(rep.str());
      std::ostringstream s;
      s << "snapshots: " << j["data"]["snapshots"].size() << ", log " << (out / "run_log.json").string() << "\n";
      for (const auto& c : j["checks"]) s << "  " << c["name"].get<std::string>() << ": " << (c["pass"].get<bool>() ? "ok" : "VIOLATED") << "\n";
      emit(g, rep.str(), s.str());
      return all_checks_pass(rep.str()) ? kOk : kCheckFailed;
    }

    if (*score) {
      std::map<std::string, json> f;
      set_if(f, "lambda", s_lambda);
      set_if(f, "z0", s_z0);
      set_if(f, "k_lo", s_klo);
      set_if(f, "k_hi", s_khi);
      json p = params_for(g, f);
      p.erase("seed");
      BundleHandle b = load(score_file);
      CString rep;
      ok(lift5_score(b.p, p.dump().c_str(), &rep.p), "score");
      write_atomic(out / "score.json", rep.str());
      const json j = json::parse(rep.str());
      std::ostringstream s;
      s << "Q = " << j["data"]["Q"] << "\n";
      if (j["data"].contains("delta")) s << "delta = " << j["data"]["delta"]["delta"] << "\n";
      emit(g, rep.str(), s.str());
      return kOk;
    }

    if (*scan) {
      std::map<std::string, json> f;
      set_if(f, "lambda_min", sc_lo);
      set_if(f, "lambda_max", sc_hi);
      set_if(f, "stride_factor", sc_stride);
      set_if(f, "ratio", sc_ratio);
      json p = params_for(g, f);
      p.erase("seed");
      BundleHandle b = load(scan_file);
      CString rep, csv;
      ok(lift5_scan(b.p, p.dump().c_str(), &rep.p, &csv.p), "scan");
      write_atomic(out / "scan.json", rep.str());
      write_atomic(out / "scan.csv", csv.str());
      const json a = json::parse(rep.str())["data"]["argmax"];
      std::ostringstream s;
      s << "Q_* = " << a["Q_star"] << " at lambda = " << a["lambda"] << ", z0 = " << a["z0"] << "\n";
      emit(g, rep.str(), s.str());
      return kOk;
    }

    if (*classify) {
      std::map<std::string, json> f;
      set_if(f, "eta", cl_eta);
      set_if(f, "C0", cl_C0);
      set_if(f, "level", cl_level);
      set_if(f, "mass_fraction", cl_fraction);
      set_if(f, "k", cl_k);
      set_if(f, "N0", cl_N0);
      json p = params_for(g, f);
      p.erase("seed");
      BundleHandle b = load(cl_file);
      CString rep;
      ok(lift5_classify(b.p, p.dump().c_str(), &rep.p), "classify");
      write_atomic(out / "classify.json", rep.str());
      const json j = json::parse(rep.str());
      std::ostringstream s;
      for (const auto& pk : j["data"]["packets"])
        s << pk["label"].get<std::string>() << "  center (" << pk["center"][0] << ", " << pk["center"][1]
          << ")  lambda " << pk["lambda"] << "  mass " << pk["mass"] << "\n";
      if (j["data"]["packets"].empty()) s << "no packets\n";
      emit(g, rep.str(), s.str());
      return all_checks_pass(rep.str()) ? kOk : kCheckFailed;
    }

    if (*para) {
      std::map<std::string, json> f;
      set_if(f, "k_min", pp_kmin);
      set_if(f, "k_max", pp_kmax);
      set_if(f, "range_lo", pp_lo);
      set_if(f, "range_hi", pp_hi);
      set_if(f, "N0", pp_N0);
      set_if(f, "C", pp_C);
      set_if(f, "calibration_fields", pp_cal);
      const json p = params_for(g, f);
      BundleHandle b = load(pp_file);
      CString rep, csv;
      int pass = 0;
      ok(lift5_paraproduct(b.p, p.dump().c_str(), &rep.p, &csv.p, &pass), "paraproduct");
      write_atomic(out / "paraproduct.json", rep.str());
      write_atomic(out / "paraproduct.csv", csv.str());
      const json d = json::parse(rep.str())["data"];
      std::ostringstream s;
      s << "|N_loc| = " << std::abs(d["N_loc"].get<double>()) << ", D_crit = " << d["D_crit"] << ", R_low = " << d["R_low"]
        << "\nPsi_total = " << d["psi_total"] << ", C = " << d["C"] << ", delta = " << d["delta"] << "\naudit "
        << (pass ? "holds" : "VIOLATED") << "\n";
      emit(g, rep.str(), s.str());
      return pass ? kOk : kCheckFailed;
    }

    if (*lemmas) {
      std::map<std::string, json> f;
      set_if(f, "k_shift", lm_shift);
      set_if(f, "partition_gain", lm_gain);
      if (!lm_only.empty()) f["only"] = lm_only;
      if (lm_quick) {
        f["mc_profiles"] = 6;
        f["mc_samples"] = 50000;
        f["recenter_packets"] = 20;
        f["overlap_fields"] = 4;
        f["band_fields"] = 6;
        f["diffuse_fields"] = 5;
        f["divfree_fields"] = 1;
        f["frequency_fields"] = 1;
        f["frequency_nr"] = 128;
        f["trend_steps"] = 3;
      }
      const json p = params_for(g, f);
      CString rep, table;
      int pass = 0;
      ok(lift5_lemmas(p.dump().c_str(), &rep.p, &table.p, &pass), "lemmas");
      write_atomic(out / "lemmas.json", rep.str());
      emit(g, rep.str(), table.str());
      return pass ? kOk : kCheckFailed;
    }

    if (*report) {
      std::vector<std::string> docs;
      for (const auto& path : inputs) docs.push_back(read_file(path));
      std::vector<const char*> ptrs;
      for (const auto& d : docs) ptrs.push_back(d.c_str());
      CString bundle, csv;
      ok(lift5_report(ptrs.data(), ptrs.size(), &bundle.p, &csv.p), "report");
      write_atomic(out / "bundle.json", bundle.str());
      std::ostringstream s;
      s << "merged " << docs.size() << " report(s) into " << (out / "bundle.json").string() << "\n";
      const json files = json::parse(csv.str());
      for (const auto& [name, text] : files.items()) {
        write_atomic(out / name, text.get<std::string>());
        s << "  " << (out / name).string() << "\n";
      }
      emit(g, bundle.str(), s.str());
      return kOk;
    }
  } catch (const Failure& f) {
    std::cerr << "lift5: " << f.message << "\n";
    return f.code;
  } catch (const json::exception& e) {
    std::cerr << "lift5: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "lift5: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
