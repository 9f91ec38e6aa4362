#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lift5/field.hpp"
#include "lift5/recipes.hpp"
#include "lift5/spectral.hpp"

namespace lift5 {

// Axisymmetric flow with swirl in (Gamma, G) form, nu = 1.  The swirl is
// evolved as psi = Gamma / r^2, an SO(4)-radial scalar obeying
//   d_t psi + u.grad psi + (2 u_r / r) psi = Delta5 psi,
// which is the Gamma equation with the operator d_rr - (1/r) d_r + d_zz.
// G obeys d_t G + u.grad G = Delta5 G + d_z(psi^2).
struct FlowState {
  ScalarFieldRZ gamma;
  ScalarFieldRZ g;
  double time = 0.0;
  double nu = 1.0;
  double energy = 0.0;
  double dissipation = 0.0;
};

struct Diagnostics {
  double energy = 0.0;          // (1/2) int |u|^2 dx
  double dissipation = 0.0;     // int |omega|^2 dx
  double gamma_max = 0.0;       // max |Gamma| over the nodes
  double divergence = 0.0;      // ||div u|| / ||grad u|| scale
  double lifted_divergence = 0.0;
  double vorticity_mismatch = 0.0;  // ||curl u / r - G|| / ||G||
};

FlowState make_state(const ScalarFieldRZ& gamma, const ScalarFieldRZ& G, double time = 0.0);
Diagnostics diagnose(const FlowState& s);

// Largest dt allowed by max|u| dt <= 0.5 min cell.
double cfl_limit(const FlowState& s);

// Integrating-factor Heun step: diffusion exact in coefficient space,
// advection and swirl source explicit, nonlinear terms 2/3-dealiased.
FlowState step(const FlowState& s, double dt);

struct SolverConfig {
  int nr = 64, nz = 128;
  double r_max = 8.0, z_half = 8.0;
  double dt = 1e-3;
  double t_end = 0.1;
  int snapshot_every = 10;  // steps between snapshots
  std::string initial = "gaussian";
  std::uint64_t seed = 1;
  double amplitude = 1.0;
  double ratio = 0.05;
  int shells = 6;
  double mass = 0.0;
  std::string out_dir;      // empty: keep snapshots in memory only
  bool scan = true;         // Q_* per snapshot
};

// key = value lines, '#' comments.  Unknown keys are rejected.
SolverConfig parse_solver_config(const std::string& text);
SolverConfig load_solver_config(const std::string& path);
void apply_solver_setting(SolverConfig& c, const std::string& key, const std::string& value);
RecipeParams recipe_params(const SolverConfig& c);

struct SnapshotRecord {
  int index = 0;
  long step = 0;
  double time = 0.0;
  std::string path;
  Diagnostics diag;
  double q_star = 0.0, q_lambda = 0.0, q_z = 0.0;  // Q_* and its argmax (lambda, z0)
};

struct RunResult {
  std::vector<SnapshotRecord> snapshots;
  std::vector<FlowState> states;  // filled when out_dir is empty
  bool truncated = false;
  std::string error;
  std::string log_path;
};

// Evolves the initial recipe to t_end.  A non-finite state ends the run with a
// truncated series and an error record instead of throwing.
RunResult run(const SolverConfig& c);
std::string run_log_json(const SolverConfig& c, const RunResult& r, const std::string& run_id);

}  // namespace lift5
