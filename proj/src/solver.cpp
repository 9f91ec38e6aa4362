#include "lift5/solver.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>

#include <json.hpp>

#include "lift5/biot_savart.hpp"
#include "lift5/error.hpp"
#include "lift5/extraction.hpp"
#include "lift5/sum.hpp"
#include "lift5/swrl_io.hpp"

namespace lift5 {

namespace {

const cplx I(0.0, 1.0);
using Coeffs = std::vector<cplx>;

struct Rhs {
  Coeffs g, psi;
  double u_max = 0.0;
};

class Stepper {
 public:
  explicit Stepper(const GridPtr& grid) : grid_(grid), P_(SpectralPlan::for_grid(grid)) {}

  const SpectralPlan& plan() const { return *P_; }

  Coeffs forward(const ScalarFieldRZ& f) const {
    Coeffs c(P_->coeff_size());
    P_->forward(f.data(), Basis::Scalar, c.data());
    return c;
  }

  ScalarFieldRZ inverse(const Coeffs& c, Basis b = Basis::Scalar) const {
    ScalarFieldRZ f(grid_);
    P_->inverse(c.data(), b, f.data());
    return f;
  }

  template <class F>
  Coeffs map(const Coeffs& c, F&& f) const {
    Coeffs out(c.size());
    for (int m = 0; m < P_->nr(); ++m)
      for (int n = 0; n < P_->nzh(); ++n) {
        const std::size_t at = static_cast<std::size_t>(m) * P_->nzh() + n;
        out[at] = f(m, n) * c[at];
      }
    return out;
  }

  Coeffs d_z(const Coeffs& c) const {
    return map(c, [&](int, int n) { return I * P_->zeta_deriv(n); });
  }
  Coeffs d_r(const Coeffs& c) const {
    return map(c, [&](int m, int) { return cplx(-P_->rho(m)); });
  }

  // Zeroes the upper third of the radial and vertical mode ranges.
  void dealias(Coeffs& c) const {
    const int mcut = (2 * P_->nr()) / 3, ncut = P_->nz() / 3;
    for (int m = 0; m < P_->nr(); ++m)
      for (int n = 0; n < P_->nzh(); ++n)
        if (m >= mcut || n > ncut) c[static_cast<std::size_t>(m) * P_->nzh() + n] = 0.0;
  }

  Coeffs decay(const Coeffs& c, double dt) const {
    return map(c, [&](int m, int n) {
      const double x = P_->xi(m, n);
      return cplx(std::exp(-x * x * dt));
    });
  }

  Rhs rhs(const Coeffs& G, const Coeffs& psi) const {
    const auto& g = *grid_;
    const Coeffs phi = map(G, [&](int m, int n) { return cplx(1.0 / (P_->xi(m, n) * P_->xi(m, n))); });
    const ScalarFieldRZ phz = inverse(d_z(phi));
    const ScalarFieldRZ uz = inverse(map(phi, [&](int m, int) { return cplx(P_->rho(m)); }), Basis::Axial);
    const ScalarFieldRZ gr = inverse(d_r(G), Basis::Vector), gz = inverse(d_z(G));
    const ScalarFieldRZ ps = inverse(psi), psr = inverse(d_r(psi), Basis::Vector), psz = inverse(d_z(psi));
    ScalarFieldRZ ng(grid_), np(grid_);
    double umax = 0.0;
    for (int i = 0; i < g.nr(); ++i) {
      const double r = g.r(i);
      for (int j = 0; j < g.nz(); ++j) {
        const double ur = -r * phz(i, j), w = uz(i, j);
        umax = std::max(umax, std::hypot(ur, w));
        ng(i, j) = -(ur * gr(i, j) + w * gz(i, j)) + 2.0 * ps(i, j) * psz(i, j);
        np(i, j) = -(ur * psr(i, j) + w * psz(i, j)) + 2.0 * phz(i, j) * ps(i, j);
      }
    }
    Rhs out{forward(ng), forward(np), umax};
    dealias(out.g);
    dealias(out.psi);
    return out;
  }

 private:
  GridPtr grid_;
  std::shared_ptr<const SpectralPlan> P_;
};

ScalarFieldRZ psi_from_gamma(const ScalarFieldRZ& gamma) {
  const auto& g = *gamma.grid();
  ScalarFieldRZ psi(gamma.grid());
  for (int i = 0; i < g.nr(); ++i)
    for (int j = 0; j < g.nz(); ++j) psi(i, j) = gamma(i, j) / (g.r(i) * g.r(i));
  return psi;
}

ScalarFieldRZ gamma_from_psi(const ScalarFieldRZ& psi) {
  const auto& g = *psi.grid();
  ScalarFieldRZ gamma(psi.grid(), Role::Gamma);
  for (int i = 0; i < g.nr(); ++i)
    for (int j = 0; j < g.nz(); ++j) gamma(i, j) = psi(i, j) * g.r(i) * g.r(i);
  return gamma;
}

void axpy(Coeffs& y, double a, const Coeffs& x) {
  for (std::size_t n = 0; n < y.size(); ++n) y[n] += a * x[n];
}

// int f^2 r dr dz through the r^3 weights.
double r1_mass(const ScalarFieldRZ& f) {
  const auto& g = *f.grid();
  CompensatedSum s;
  for (int i = 0; i < g.nr(); ++i) {
    CompensatedSum row;
    for (int j = 0; j < g.nz(); ++j) row.add(f(i, j) * f(i, j));
    s.add(row.value() * g.cell_weight(i) / (g.r(i) * g.r(i)));
  }
  return s.value();
}

void check_finite(const FlowState& s) {
  require(s.g.all_finite() && s.gamma.all_finite(), ErrorKind::Numeric,
          "non-finite state at t = " + std::to_string(s.time));
}

}  // namespace

FlowState make_state(const ScalarFieldRZ& gamma, const ScalarFieldRZ& G, double time) {
  check_same_grid(gamma, G);
  FlowState s;
  s.gamma = gamma;
  s.gamma.set_role(Role::Gamma);
  s.g = G;
  s.g.set_role(Role::G);
  s.time = time;
  const Diagnostics d = diagnose(s);
  s.energy = d.energy;
  s.dissipation = d.dissipation;
  return s;
}

Diagnostics diagnose(const FlowState& s) {
  Diagnostics d;
  d.gamma_max = s.gamma.max_abs();
  const ScalarFieldRZ psi = psi_from_gamma(s.gamma);
  const ScalarFieldRZ phi = stream_solve(s.g);
  const VelocityRZ u = velocity_from_phi(phi, &s.gamma);
  // int |u_mer|^2 dx = 2 pi int G phi dmu5 and u_theta^2 r dr = psi^2 dmu5.
  d.energy = M_PI * (integrate_mu5(pointwise_product(s.g, phi)) + mass_mu5(psi));
  // omega_theta^2 r dr = G^2 dmu5; the swirl enstrophy integrates by parts to
  // int |grad5 psi|^2 dmu5 (psi = 0 at R).
  d.dissipation = 2.0 * M_PI * (mass_mu5(s.g) + gradient_mass(psi));
  const double gnorm = std::sqrt(mass_mu5(s.g));
  if (gnorm > 0) {
    d.divergence = std::sqrt(r1_mass(meridional_divergence(u))) / gnorm;
    d.vorticity_mismatch = std::sqrt(mass_mu5(vorticity_over_r(u) - s.g)) / gnorm;
    d.lifted_divergence = lift_and_project(u).divfree_residual;
  }
  return d;
}

double cfl_limit(const FlowState& s) {
  const auto& g = *s.g.grid();
  const VelocityRZ u = velocity_from_G(s.g);
  double umax = 0.0;
  for (std::size_t n = 0; n < g.size(); ++n)
    umax = std::max(umax, std::hypot(u.u_r.values()[n], u.u_z.values()[n]));
  return umax > 0 ? 0.5 * g.min_spacing() / umax : INFINITY;
}

FlowState step(const FlowState& s, double dt) {
  require(dt > 0 && std::isfinite(dt), ErrorKind::InvalidArgument, "time step must be positive");
  check_finite(s);
  check_same_grid(s.g, s.gamma);
  const GridPtr& grid = s.g.grid();
  const double h = grid->min_spacing();
  Stepper st(grid);
  const Coeffs G0 = st.forward(s.g), P0 = st.forward(psi_from_gamma(s.gamma));

  const Rhs k1 = st.rhs(G0, P0);
  require(k1.u_max * dt <= 0.5 * h, ErrorKind::Regime,
          "CFL violation: max|u| dt = " + std::to_string(k1.u_max * dt) + " > 0.5 min cell");
  Coeffs G1 = G0, P1 = P0;
  axpy(G1, dt, k1.g);
  axpy(P1, dt, k1.psi);
  G1 = st.decay(G1, dt);
  P1 = st.decay(P1, dt);
  const Rhs k2 = st.rhs(G1, P1);
  require(k2.u_max * dt <= 0.5 * h, ErrorKind::Regime, "CFL violation in the corrector stage");

  // y1 = E y0 + dt/2 (E k1 + k2)
  Coeffs Gn = G0, Pn = P0;
  axpy(Gn, 0.5 * dt, k1.g);
  axpy(Pn, 0.5 * dt, k1.psi);
  Gn = st.decay(Gn, dt);
  Pn = st.decay(Pn, dt);
  axpy(Gn, 0.5 * dt, k2.g);
  axpy(Pn, 0.5 * dt, k2.psi);

  FlowState out;
  out.g = st.inverse(Gn);
  out.g.set_role(Role::G);
  out.gamma = gamma_from_psi(st.inverse(Pn));
  out.time = s.time + dt;
  out.nu = s.nu;
  check_finite(out);
  const Diagnostics d = diagnose(out);
  out.energy = d.energy;
  out.dissipation = d.dissipation;
  return out;
}

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  require(used == v.size() && std::isfinite(x), ErrorKind::InvalidArgument, key + ": not a number: '" + v + "'");
  return x;
}

long to_long(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long x = 0;
  try {
    x = std::stol(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  require(used == v.size(), ErrorKind::InvalidArgument, key + ": not an integer: '" + v + "'");
  return x;
}

void validate(const SolverConfig& c) {
  require(c.nr >= 8 && c.nr <= 4096 && c.nz >= 8 && c.nz <= 8192 && (c.nz & (c.nz - 1)) == 0,
          ErrorKind::InvalidArgument, "grid sizes must satisfy 8 <= nr <= 4096 and nz a power of two in [8, 8192]");
  require(c.r_max > 0 && c.z_half > 0, ErrorKind::InvalidArgument, "R_max and L_z must be positive");
  require(c.dt > 0, ErrorKind::InvalidArgument, "dt must be positive");
  require(c.t_end >= 0, ErrorKind::InvalidArgument, "T_end must be nonnegative");
  require(c.snapshot_every >= 1, ErrorKind::InvalidArgument, "snapshot_every must be >= 1");
}

}  // namespace

void apply_solver_setting(SolverConfig& c, const std::string& key, const std::string& value) {
  const std::string& v = value;
  if (key == "nr") c.nr = static_cast<int>(to_long(key, v));
  else if (key == "nz") c.nz = static_cast<int>(to_long(key, v));
  else if (key == "R_max") c.r_max = to_double(key, v);
  else if (key == "L_z") c.z_half = to_double(key, v);
  else if (key == "dt") c.dt = to_double(key, v);
  else if (key == "T_end") c.t_end = to_double(key, v);
  else if (key == "snapshot_every") c.snapshot_every = static_cast<int>(to_long(key, v));
  else if (key == "initial") c.initial = v;
  else if (key == "seed") c.seed = static_cast<std::uint64_t>(to_long(key, v));
  else if (key == "amplitude") c.amplitude = to_double(key, v);
  else if (key == "ratio") c.ratio = to_double(key, v);
  else if (key == "shells") c.shells = static_cast<int>(to_long(key, v));
  else if (key == "mass") c.mass = to_double(key, v);
  else if (key == "out") c.out_dir = v;
  else if (key == "scan") {
    require(v == "1" || v == "true" || v == "0" || v == "false", ErrorKind::InvalidArgument,
            "scan must be true, false, 1 or 0");
    c.scan = v == "1" || v == "true";
  }
  else fail(ErrorKind::InvalidArgument, "unknown solver key '" + key + "'");
}

SolverConfig parse_solver_config(const std::string& text) {
  SolverConfig c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, ErrorKind::InvalidArgument,
            "config line " + std::to_string(lineno) + ": expected key = value");
    apply_solver_setting(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  validate(c);
  return c;
}

SolverConfig load_solver_config(const std::string& path) {
  std::ifstream is(path);
  require(static_cast<bool>(is), ErrorKind::Io, "cannot open config " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_solver_config(ss.str());
}

RecipeParams recipe_params(const SolverConfig& c) {
  RecipeParams p;
  p.recipe = c.initial;
  p.seed = c.seed;
  p.nr = c.nr;
  p.nz = c.nz;
  p.r_max = c.r_max;
  p.z_half = c.z_half;
  p.amplitude = c.amplitude;
  p.ratio = c.ratio;
  p.shells = c.shells;
  p.mass = c.mass;
  return p;
}

RunResult run(const SolverConfig& c) {
  validate(c);
  const FieldBundle init = make_recipe(recipe_params(c));
  FlowState s = make_state(init.get("gamma"), init.get("G"));
  const long steps = std::lround(std::ceil(c.t_end / c.dt - 1e-9));
  if (!c.out_dir.empty()) std::filesystem::create_directories(c.out_dir);

  RunResult out;
  std::vector<std::future<void>> writes;
  auto snapshot = [&](long n) {
    SnapshotRecord rec;
    rec.index = static_cast<int>(out.snapshots.size());
    rec.step = n;
    rec.time = s.time;
    rec.diag = diagnose(s);
    if (c.scan) {
      const auto& g = *s.g.grid();
      const double lo = min_resolved_scale(g), hi = 0.5 * std::min(g.r_max(), g.z_half());
      if (lo <= hi) {
        const ScoreScan scan = sup_scan(s.g, lo, hi);
        rec.q_star = scan.argmax.q;
        rec.q_lambda = scan.argmax.lambda;
        rec.q_z = scan.argmax.z0;
      }
    }
    if (!c.out_dir.empty()) {
      char name[32];
      std::snprintf(name, sizeof name, "snap_%05d.swrl", rec.index);
      rec.path = (std::filesystem::path(c.out_dir) / name).string();
      FieldBundle b;
      b.grid = s.g.grid();
      b.time = s.time;
      b.fields = {{"gamma", s.gamma}, {"G", s.g}};
      writes.push_back(std::async(std::launch::async, [b = std::move(b), p = rec.path] { write_swrl(p, b); }));
    } else {
      out.states.push_back(s);
    }
    out.snapshots.push_back(rec);
  };

  snapshot(0);
  for (long n = 1; n <= steps; ++n) {
    const double dt = std::min(c.dt, c.t_end - s.time);
    if (dt <= 0) break;
    try {
      s = step(s, dt);
    } catch (const Error& e) {
      out.truncated = true;
      out.error = e.what();
      break;
    }
    if (n % c.snapshot_every == 0 || n == steps) snapshot(n);
  }
  for (auto& w : writes) w.get();
  return out;
}

std::string run_log_json(const SolverConfig& c, const RunResult& r, const std::string& run_id) {
  using nlohmann::json;
  json snaps = json::array();
  for (const auto& s : r.snapshots)
    snaps.push_back({{"index", s.index},
                     {"step", s.step},
                     {"time", s.time},
                     {"path", s.path},
                     {"energy", s.diag.energy},
                     {"dissipation", s.diag.dissipation},
                     {"gamma_max", s.diag.gamma_max},
                     {"divergence", s.diag.divergence},
                     {"lifted_divergence", s.diag.lifted_divergence},
                     {"vorticity_mismatch", s.diag.vorticity_mismatch},
                     {"Q_star", s.q_star},
                     {"lambda_star", s.q_lambda},
                     {"z_star", s.q_z}});
  json cfg = {{"nr", c.nr},       {"nz", c.nz},           {"R_max", c.r_max},
              {"L_z", c.z_half},  {"dt", c.dt},           {"T_end", c.t_end},
              {"snapshot_every", c.snapshot_every},       {"initial", c.initial},
              {"seed", c.seed},   {"amplitude", c.amplitude}};
  json j = {{"kind", "run_log"},
            {"run_id", run_id},
            {"config", cfg},
            {"snapshots", snaps},
            {"truncated", r.truncated},
            {"error", r.error.empty() ? json(nullptr) : json(r.error)}};
  return j.dump(2);
}

}  // namespace lift5
