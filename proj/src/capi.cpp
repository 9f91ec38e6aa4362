#include "lift5/lift5.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <new>
#include <set>
#include <thread>

#include <json.hpp>

#include "lift5/error.hpp"
#include "lift5/extraction.hpp"
#include "lift5/lemma_suite.hpp"
#include "lift5/packets.hpp"
#include "lift5/parallel.hpp"
#include "lift5/paraproduct.hpp"
#include "lift5/recipes.hpp"
#include "lift5/report.hpp"
#include "lift5/solver.hpp"
#include "lift5/swrl_io.hpp"

struct lift5_bundle {
  lift5::FieldBundle b;
};

namespace {

using nlohmann::json;
using lift5::ErrorKind;

thread_local std::string t_error;

lift5_status status_of(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidArgument: return LIFT5_ERR_INVALID_ARGUMENT;
    case ErrorKind::Range: return LIFT5_ERR_RANGE;
    case ErrorKind::Format: return LIFT5_ERR_FORMAT;
    case ErrorKind::Truncated: return LIFT5_ERR_TRUNCATED;
    case ErrorKind::GridMismatch: return LIFT5_ERR_GRID_MISMATCH;
    case ErrorKind::Io: return LIFT5_ERR_IO;
    case ErrorKind::Numeric: return LIFT5_ERR_NUMERIC;
    case ErrorKind::Regime: return LIFT5_ERR_REGIME;
    case ErrorKind::Resolution: return LIFT5_ERR_RESOLUTION;
    case ErrorKind::UnsupportedGrid: return LIFT5_ERR_UNSUPPORTED_GRID;
    case ErrorKind::Schema: return LIFT5_ERR_SCHEMA;
  }
  return LIFT5_ERR_INTERNAL;
}

template <class F>
lift5_status guarded(F&& f) {
  t_error.clear();
  try {
    return f();
  } catch (const lift5::Error& e) {
    t_error = e.what();
    return status_of(e.kind());
  } catch (const json::exception& e) {
    t_error = std::string("parameter error: ") + e.what();
    return LIFT5_ERR_INVALID_ARGUMENT;
  } catch (const std::bad_alloc&) {
    t_error = "out of memory";
    return LIFT5_ERR_INTERNAL;
  } catch (const std::exception& e) {
    t_error = e.what();
    return LIFT5_ERR_INTERNAL;
  }
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

void put(char** out, const std::string& s) {
  if (out) *out = dup(s);
}

// JSON parameter object with range checks and unknown-key rejection.
class Params {
 public:
  Params(const char* text, std::set<std::string> allowed) : allowed_(std::move(allowed)) {
    if (text && *text) {
      try {
        j_ = json::parse(text);
      } catch (const json::exception& e) {
        lift5::fail(ErrorKind::InvalidArgument, std::string("params are not valid JSON: ") + e.what());
      }
    }
    if (j_.is_null()) j_ = json::object();
    lift5::require(j_.is_object(), ErrorKind::InvalidArgument, "params must be a JSON object");
    for (const auto& [k, v] : j_.items())
      lift5::require(allowed_.count(k) > 0, ErrorKind::InvalidArgument, "unknown parameter '" + k + "'");
  }
  bool has(const std::string& k) const { return j_.contains(k) && !j_[k].is_null(); }
  double num(const std::string& k, double def, double lo, double hi) const {
    if (!has(k)) return def;
    lift5::require(j_[k].is_number(), ErrorKind::InvalidArgument, "parameter '" + k + "' must be a number");
    const double v = j_[k].get<double>();
    check(k, v, lo, hi);
    return v;
  }
  int integer(const std::string& k, int def, int lo, int hi) const {
    if (!has(k)) return def;
    lift5::require(j_[k].is_number_integer(), ErrorKind::InvalidArgument, "parameter '" + k + "' must be an integer");
    const long long v = j_[k].get<long long>();
    check(k, static_cast<double>(v), lo, hi);
    return static_cast<int>(v);
  }
  std::uint64_t seed(const std::string& k, std::uint64_t def) const {
    if (!has(k)) return def;
    lift5::require(j_[k].is_number_unsigned(), ErrorKind::InvalidArgument, "parameter '" + k + "' must be a non-negative integer");
    return j_[k].get<std::uint64_t>();
  }
  std::string str(const std::string& k, const std::string& def) const {
    if (!has(k)) return def;
    lift5::require(j_[k].is_string(), ErrorKind::InvalidArgument, "parameter '" + k + "' must be a string");
    return j_[k].get<std::string>();
  }
  bool flag(const std::string& k, bool def) const {
    if (!has(k)) return def;
    lift5::require(j_[k].is_boolean(), ErrorKind::InvalidArgument, "parameter '" + k + "' must be true or false");
    return j_[k].get<bool>();
  }
  const json& raw() const { return j_; }

 private:
  static void check(const std::string& k, double v, double lo, double hi) {
    lift5::require(std::isfinite(v) && v >= lo && v <= hi, ErrorKind::Range,
                   "parameter '" + k + "' = " + std::to_string(v) + " outside [" + std::to_string(lo) + ", " +
                       std::to_string(hi) + "]");
  }
  json j_;
  std::set<std::string> allowed_;
};

const lift5::ScalarFieldRZ& field_of(const lift5_bundle* b, const Params& p) {
  lift5::require(b != nullptr, ErrorKind::InvalidArgument, "null bundle");
  const std::string name = p.str("field", "G");
  lift5::require(b->b.has(name), ErrorKind::InvalidArgument, "bundle has no field '" + name + "'");
  return b->b.get(name);
}

std::string envelope(const std::string& command, const json& inputs, const std::string& checks, const std::string& data,
                     const std::string& run_id = "") {
  lift5::Envelope e;
  e.command = command;
  e.run_id = run_id;
  e.inputs = inputs.dump();
  e.checks = checks;
  e.data = data;
  return lift5::envelope_json(e);
}

json grid_json(const lift5::HalfPlaneGrid& g, double time) {
  return {{"nr", g.nr()}, {"nz", g.nz()}, {"R_max", g.r_max()}, {"L_z", g.z_half()}, {"time", time}};
}

json check(const std::string& name, double value, double bound, bool pass) {
  return {{"name", name}, {"value", value}, {"bound", bound}, {"pass", pass}};
}

}  // namespace

extern "C" {

const char* lift5_version(void) { return lift5::tool_version(); }
int lift5_schema_version(void) { return lift5::kSchemaVersion; }

const char* lift5_status_name(lift5_status s) {
  switch (s) {
    case LIFT5_OK: return "ok";
    case LIFT5_ERR_INVALID_ARGUMENT: return "invalid argument";
    case LIFT5_ERR_RANGE: return "out of range";
    case LIFT5_ERR_FORMAT: return "format error";
    case LIFT5_ERR_TRUNCATED: return "truncated input";
    case LIFT5_ERR_GRID_MISMATCH: return "grid mismatch";
    case LIFT5_ERR_IO: return "i/o error";
    case LIFT5_ERR_NUMERIC: return "numeric fault";
    case LIFT5_ERR_REGIME: return "regime violation";
    case LIFT5_ERR_RESOLUTION: return "below grid resolution";
    case LIFT5_ERR_UNSUPPORTED_GRID: return "unsupported grid";
    case LIFT5_ERR_SCHEMA: return "schema mismatch";
    case LIFT5_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* lift5_last_error(void) { return t_error.c_str(); }

void lift5_string_free(char* s) { std::free(s); }

lift5_status lift5_set_threads(int n) {
  return guarded([&] {
    lift5::require(n >= 0 && n <= 1024, ErrorKind::Range, "thread count must lie in [0, 1024]");
    const int hw = static_cast<int>(std::thread::hardware_concurrency());
    lift5::set_thread_count(n == 0 ? std::max(1, hw) : n);
    return LIFT5_OK;
  });
}

lift5_status lift5_bundle_read(const char* path, lift5_bundle** out) {
  return guarded([&] {
    lift5::require(path && out, ErrorKind::InvalidArgument, "null argument");
    *out = new lift5_bundle{lift5::read_swrl(path)};
    return LIFT5_OK;
  });
}

lift5_status lift5_bundle_write(const lift5_bundle* b, const char* path) {
  return guarded([&] {
    lift5::require(b && path, ErrorKind::InvalidArgument, "null argument");
    lift5::write_swrl(path, b->b);
    return LIFT5_OK;
  });
}

void lift5_bundle_free(lift5_bundle* b) { delete b; }

lift5_status lift5_bundle_info(const lift5_bundle* b, char** out) {
  return guarded([&] {
    lift5::require(b && out, ErrorKind::InvalidArgument, "null argument");
    json j = grid_json(*b->b.grid, b->b.time);
    j["fields"] = json::array();
    for (const auto& [name, f] : b->b.fields) j["fields"].push_back(name);
    put(out, j.dump());
    return LIFT5_OK;
  });
}

lift5_status lift5_bundle_field(const lift5_bundle* b, const char* name, double* out, size_t count) {
  return guarded([&] {
    lift5::require(b && name && out, ErrorKind::InvalidArgument, "null argument");
    lift5::require(b->b.has(name), ErrorKind::InvalidArgument, std::string("bundle has no field '") + name + "'");
    const auto& v = b->b.get(name).values();
    lift5::require(count == v.size(), ErrorKind::InvalidArgument,
                   "buffer holds " + std::to_string(count) + " values, field has " + std::to_string(v.size()));
    std::copy(v.begin(), v.end(), out);
    return LIFT5_OK;
  });
}

lift5_status lift5_gen(const char* params, lift5_bundle** out) {
  return guarded([&] {
    lift5::require(out != nullptr, ErrorKind::InvalidArgument, "null output");
    const Params p(params, {"recipe", "nr", "nz", "R_max", "L_z", "seed", "amplitude", "ratio", "shells", "mass"});
    lift5::RecipeParams r;
    r.recipe = p.str("recipe", r.recipe);
    r.nr = p.integer("nr", r.nr, 4, 4096);
    r.nz = p.integer("nz", r.nz, 4, 8192);
    r.r_max = p.num("R_max", r.r_max, 1e-6, 1e6);
    r.z_half = p.num("L_z", r.z_half, 1e-6, 1e6);
    r.seed = p.seed("seed", r.seed);
    r.amplitude = p.num("amplitude", r.amplitude, -1e6, 1e6);
    r.ratio = p.num("ratio", r.ratio, 1e-6, 0.1);
    r.shells = p.integer("shells", r.shells, 1, 16);
    r.mass = p.num("mass", r.mass, 0.0, 1e12);
    *out = new lift5_bundle{lift5::make_recipe(r)};
    return LIFT5_OK;
  });
}

lift5_status lift5_evolve(const char* config_text, const char* params, char** report) {
  return guarded([&] {
    const Params p(params, {"nr", "nz", "R_max", "L_z", "dt", "T_end", "snapshot_every", "initial", "seed", "amplitude",
                            "ratio", "shells", "mass", "out", "scan"});
    lift5::SolverConfig c = config_text ? lift5::parse_solver_config(config_text) : lift5::SolverConfig{};
    for (const auto& [k, v] : p.raw().items())
      lift5::apply_solver_setting(c, k, v.is_string() ? v.get<std::string>() : v.dump());
    json inputs = {{"nr", c.nr},         {"nz", c.nz},     {"R_max", c.r_max},
                   {"L_z", c.z_half},    {"dt", c.dt},     {"T_end", c.t_end},
                   {"snapshot_every", c.snapshot_every},   {"initial", c.initial},
                   {"seed", c.seed},     {"amplitude", c.amplitude}, {"ratio", c.ratio},
                   {"shells", c.shells}, {"mass", c.mass}, {"scan", c.scan}};
    const std::string run_id = lift5::make_run_id("evolve", inputs.dump());
    const lift5::RunResult r = lift5::run(c);
    double div = 0, ldiv = 0, rise = 0, gmax = 0;
    for (std::size_t n = 0; n < r.snapshots.size(); ++n) {
      const auto& d = r.snapshots[n].diag;
      div = std::max(div, d.divergence);
      ldiv = std::max(ldiv, d.lifted_divergence);
      if (n > 0) rise = std::max(rise, d.gamma_max - gmax);
      gmax = n == 0 ? d.gamma_max : std::max(gmax, d.gamma_max);
    }
    json checks = json::array({check("divergence_residual", div, 1e-6, div < 1e-6),
                               check("lifted_divergence_residual", ldiv, 1e-6, ldiv < 1e-6),
                               check("gamma_max_increase", rise, 1e-6, rise <= 1e-6),
                               check("completed", r.truncated ? 0.0 : 1.0, 1.0, !r.truncated)});
    put(report, envelope("evolve", inputs, checks.dump(), lift5::run_log_json(c, r, run_id), run_id));
    if (r.truncated) {
      t_error = r.error;
      return LIFT5_ERR_NUMERIC;
    }
    return LIFT5_OK;
  });
}

lift5_status lift5_score(const lift5_bundle* b, const char* params, char** report) {
  return guarded([&] {
    const Params p(params, {"lambda", "z0", "field", "k_lo", "k_hi"});
    const auto& G = field_of(b, p);
    lift5::require(p.has("lambda"), ErrorKind::InvalidArgument, "score needs 'lambda'");
    const double lam = p.num("lambda", 0.0, 1e-12, 1e12);
    const double z0 = p.num("z0", 0.0, -1e12, 1e12);
    json inputs = {{"grid", grid_json(*G.grid(), b->b.time)}, {"params", p.raw()}};
    json data = {{"kind", "score"}, {"lambda", lam}, {"z0", z0}, {"Q", lift5::score(G, lift5::AxisBall{z0, lam})}};
    if (p.has("k_lo") || p.has("k_hi")) {
      const int lo = p.integer("k_lo", -2, -64, 64), hi = p.integer("k_hi", 2, -64, 64);
      lift5::require(lo <= hi, ErrorKind::Range, "k_lo must not exceed k_hi");
      const auto d = lift5::delta_sup(G, lift5::LevelRange{lo, hi});
      data["delta"] = {{"k_range", {lo, hi}}, {"delta", d.delta}, {"j_min", d.j_min}, {"k_at", d.k_at}, {"z_at", d.z_at}};
    }
    json checks = json::array({check("score_nonnegative", data["Q"].get<double>(), 0.0, data["Q"].get<double>() >= 0)});
    put(report, envelope("score", inputs, checks.dump(), data.dump()));
    return LIFT5_OK;
  });
}

lift5_status lift5_scan(const lift5_bundle* b, const char* params, char** report, char** csv) {
  return guarded([&] {
    const Params p(params, {"lambda_min", "lambda_max", "stride_factor", "ratio", "field"});
    const auto& G = field_of(b, p);
    const auto& g = *G.grid();
    const double lo = p.num("lambda_min", lift5::min_resolved_scale(g), 1e-12, 1e12);
    const double hi = p.num("lambda_max", 0.5 * std::min(g.r_max(), g.z_half()), lo, 1e12);
    const double stride = p.num("stride_factor", 0.25, 1e-3, 1.0);
    const double ratio = p.num("ratio", 1.189207115002721, 1.0 + 1e-9, 16.0);
    const auto s = lift5::sup_scan(G, lo, hi, stride, ratio);
    double qmin = 0;
    for (const auto& row : s.scores)
      for (double q : row) qmin = std::min(qmin, q);
    json inputs = {{"grid", grid_json(g, b->b.time)}, {"params", p.raw()}};
    json checks = json::array({check("scores_nonnegative", qmin, 0.0, qmin >= 0)});
    put(report, envelope("scan", inputs, checks.dump(), lift5::scan_json(s)));
    put(csv, lift5::scan_csv(s));
    return LIFT5_OK;
  });
}

lift5_status lift5_classify(const lift5_bundle* b, const char* params, char** report) {
  return guarded([&] {
    const Params p(params, {"eta", "C0", "aspect_max", "mass_fraction", "level", "k", "N0", "field", "scan"});
    const auto& G = field_of(b, p);
    lift5::ClassifyParams prm;
    prm.eta = p.num("eta", prm.eta, 1e-6, 1.0);
    prm.C0 = p.num("C0", prm.C0, 0.0, 1e3);
    prm.aspect_max = p.num("aspect_max", prm.aspect_max, 1.0, 1e6);
    const int N0 = p.integer("N0", 8, 1, 1024);
    const bool fixed_k = p.has("k");
    const int k = p.integer("k", 0, -64, 64);
    const auto packets = p.has("level") ? lift5::detect_packets_at_level(G, p.num("level", 0.0, 0.0, 1e300))
                                        : lift5::detect_packets(G, p.num("mass_fraction", 0.9, 1e-6, 1.0));
    const auto& g = *G.grid();
    if (p.flag("scan", true) && G.max_abs() > 0)
      prm.scan = lift5::sup_scan(G, lift5::min_resolved_scale(g), 0.5 * std::min(g.r_max(), g.z_half())).argmax;
    std::vector<lift5::LabeledPacket> out;
    const lift5::Packet* best = nullptr;
    int best_k = 0;
    for (const auto& pk : packets) {
      prm.k = fixed_k ? k : static_cast<int>(std::lround(-std::log2(pk.lambda_n)));
      const auto label = lift5::classify(pk, G, prm);
      out.push_back({pk, label});
      if (label == lift5::BranchLabel::AdmissibleProximal && (!best || pk.mass > best->mass)) {
        best = &pk;
        best_k = prm.k;
      }
    }
    std::optional<lift5::WindowCover> cover;
    if (best) {
      try {
        cover = lift5::window_cover(*best, best_k, N0);
      } catch (const lift5::Error&) {
      }
    }
    json checks = json::array({check("packets_labeled", static_cast<double>(out.size()), static_cast<double>(packets.size()),
                                     out.size() == packets.size())});
    if (cover)
      checks.push_back(check("cover_size", static_cast<double>(cover->J.size()), N0, static_cast<int>(cover->J.size()) <= N0));
    json inputs = {{"grid", grid_json(g, b->b.time)}, {"params", p.raw()}};
    put(report, envelope("classify", inputs, checks.dump(), lift5::packets_json(out, cover ? &*cover : nullptr)));
    return LIFT5_OK;
  });
}

lift5_status lift5_paraproduct(const lift5_bundle* b, const char* params, char** report, char** csv, int* pass) {
  return guarded([&] {
    const Params p(params, {"k_min", "k_max", "range_lo", "range_hi", "N0", "C", "calibration_fields", "seed", "field"});
    const auto& G = field_of(b, p);
    lift5::ParaproductConfig cfg;
    const int kmin = p.integer("k_min", cfg.partition.k_min(), -64, 64);
    const int kmax = p.integer("k_max", cfg.partition.k_max(), kmin, 64);
    cfg.partition = lift5::DyadicPartition(kmin, kmax);
    cfg.range.lo = p.integer("range_lo", cfg.range.lo, kmin, kmax);
    cfg.range.hi = p.integer("range_hi", cfg.range.hi, cfg.range.lo, kmax);
    cfg.N0 = p.integer("N0", cfg.N0, 1, 1024);
    double C = p.num("C", -1.0, 0.0, 1e12);
    int calibrated = 0;
    if (!p.has("C")) {
      const int n = p.integer("calibration_fields", 4, 1, 100);
      lift5::Rng rng(p.seed("seed", 1));
      std::vector<lift5::ScalarFieldRZ> fields;
      for (int t = 0; t < n; ++t) fields.push_back(lift5::diffuse_noise(G.grid(), 5, 0, 1.0, rng));
      C = lift5::fit_constants(fields, cfg).C_paraproduct;
      calibrated = n;
    }
    auto rep = lift5::decompose_nonlinearity(G, cfg);
    lift5::audit_bound(rep, C);
    json inputs = {{"grid", grid_json(*G.grid(), b->b.time)}, {"params", p.raw()}, {"calibration_fields", calibrated}};
    put(report, envelope("paraproduct", inputs, lift5::paraproduct_checks_json(rep), lift5::paraproduct_json(rep)));
    put(csv, lift5::paraproduct_csv(rep));
    if (pass) *pass = rep.bound_pass ? 1 : 0;
    return LIFT5_OK;
  });
}

lift5_status lift5_lemmas(const char* params, char** report, char** table, int* required_pass) {
  return guarded([&] {
    const Params p(params, {"k_shift", "partition_gain", "seed", "only", "mc_profiles", "mc_samples", "recenter_packets",
                            "overlap_fields", "band_fields", "diffuse_fields", "divfree_fields", "frequency_fields",
                            "frequency_nr", "trend_steps"});
    lift5::SuiteConfig c;
    c.k_shift = p.integer("k_shift", 0, -4, 4);
    c.partition_gain = p.num("partition_gain", 1.0, 0.0, 100.0);
    c.seed = p.seed("seed", c.seed);
    if (p.has("only")) {
      for (const auto& v : p.raw()["only"]) {
        const std::string id = v.get<std::string>();
        const auto& ids = lift5::lemma_ids();
        lift5::require(std::find(ids.begin(), ids.end(), id) != ids.end(), ErrorKind::InvalidArgument,
                       "unknown lemma id '" + id + "'");
        c.only.push_back(id);
      }
    }
    c.mc_profiles = p.integer("mc_profiles", c.mc_profiles, 1, 1000);
    c.mc_samples = p.integer("mc_samples", c.mc_samples, 100, 100000000);
    c.recenter_packets = p.integer("recenter_packets", c.recenter_packets, 1, 10000);
    c.overlap_fields = p.integer("overlap_fields", c.overlap_fields, 1, 1000);
    c.band_fields = p.integer("band_fields", c.band_fields, 1, 1000);
    c.diffuse_fields = p.integer("diffuse_fields", c.diffuse_fields, 2, 1000);
    c.divfree_fields = p.integer("divfree_fields", c.divfree_fields, 1, 1000);
    c.frequency_fields = p.integer("frequency_fields", c.frequency_fields, 1, 1000);
    c.frequency_nr = p.integer("frequency_nr", c.frequency_nr, 64, 2048);
    lift5::require((c.frequency_nr & (c.frequency_nr - 1)) == 0, ErrorKind::Range, "frequency_nr must be a power of two");
    c.trend_steps = p.integer("trend_steps", c.trend_steps, 2, 20);
    const auto r = lift5::run_lemma_suite(c);
    json inputs = p.raw();
    inputs["seed"] = c.seed;
    json data = {{"kind", "lemma_suite"},
                 {"required_pass", r.required_pass},
                 {"complete", r.complete},
                 {"seconds", r.seconds},
                 {"ids", lift5::lemma_ids()}};
    put(report, envelope("lemmas", inputs, lift5::suite_checks_json(r), data.dump()));
    put(table, lift5::suite_table(r));
    if (required_pass) *required_pass = r.required_pass ? 1 : 0;
    return LIFT5_OK;
  });
}

lift5_status lift5_report(const char* const* documents, size_t count, char** bundle, char** csv) {
  return guarded([&] {
    lift5::require(count == 0 || documents, ErrorKind::InvalidArgument, "null document list");
    std::vector<std::string> docs;
    for (size_t n = 0; n < count; ++n) {
      lift5::require(documents[n] != nullptr, ErrorKind::InvalidArgument, "null document");
      docs.emplace_back(documents[n]);
    }
    const auto m = lift5::merge_reports(docs);
    json files = json::object();
    for (const auto& [name, text] : m.csv) files[name] = text;
    put(bundle, m.json);
    put(csv, files.dump());
    return LIFT5_OK;
  });
}

}  // extern "C"
