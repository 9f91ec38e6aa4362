#pragma once

#include <map>
#include <string>
#include <vector>

#include "lift5/biot_savart.hpp"
#include "lift5/spectral.hpp"
#include "lift5/swrl_io.hpp"

namespace lift5 {

struct ParaproductConfig {
  DyadicPartition partition{-3, 6};  // levels of the decomposition
  LevelRange range{-2, 2};           // singular range, inside the partition
  int N0 = 8;
  int C0 = DyadicPartition::overlap_constant();
  // Lattice indices of the packet window per level; a missing level means
  // the whole domain.
  std::map<int, std::vector<int>> cover;
};

struct PsiFactors {
  double psi = 0.0, psi_HL = 0.0, psi_HH = 0.0;
};

struct ParaproductReport {
  LevelRange k_range;
  std::map<int, double> D;  // 2^k ||Delta_k G||
  std::map<int, double> I_LH, I_HL, I_HH;
  double N_lift = 0.0;      // int (U . grad5 G) G dmu5
  double N_loc = 0.0;       // sum over the range of the cover-restricted terms
  double N_exterior = 0.0;  // same terms outside the cover
  double N_naive = 0.0;     // int (u_r d_r G + u_z d_z G) G dmu5 with the unprojected velocity
  double D_crit = 0.0;
  double R_shells = 0.0;    // sum over levels outside the range of 2^{2k} ||Delta_k G||^2
  double R_low = 0.0;       // R_shells + |N_lift - N_loc|
  double delta = 0.0;
  int j_min = 0;
  int N0 = 8, C0 = 4;
  // Filled by audit_bound.
  PsiFactors psi;
  double psi_total = 0.0;
  double C = 0.0;
  bool bound_pass = false;   // |N_loc| <= Psi D_crit + C R_low
  double margin = 0.0;
  bool strict_pass = false;  // |N_loc| <= Psi D_crit + C R_shells
  double strict_margin = 0.0;
};

ParaproductReport decompose_nonlinearity(const ScalarFieldRZ& G, const LiftedVelocity& U, const ParaproductConfig& cfg);
ParaproductReport decompose_nonlinearity(const ScalarFieldRZ& G, const ParaproductConfig& cfg);

PsiFactors psi_factors(double delta, int j_min, int N0, double C);

enum class SchurDirection { Lower, Upper };
// Lower: sum_k sum_{l<k} 2^{-a(k-l)} D_l D_k.  Upper: sum_k sum_{j>=k-C0} 2^{-a(j-k)} D_j D_k.
double schur_sum(const std::map<int, double>& D, SchurDirection dir, double exponent = 1.5, int C0 = 4);
// Row sum of the kernel: sum_{m>=1} 2^{-am} or sum_{m>=-C0} 2^{-am}.
double schur_constant(SchurDirection dir, double exponent = 1.5, int C0 = 4);
// N0 psi + Schur_lower psi_HL + Schur_upper psi_HH.
double psi_total(const PsiFactors& f, int N0, int C0);

// Fills the Psi factors, margins and pass flags for the given constant C.
bool audit_bound(ParaproductReport& rep, double C);

struct HHPairing {
  int j = 0, k = 0;
  double transport = 0.0;        // int Delta_k(U_j . grad Gt_j) Delta_k G
  double divergence_form = 0.0;  // int Delta_k(U_j Gt_j) . grad Delta_k G
  double scale = 0.0;            // ||Delta_k(U_j Gt_j)|| ||grad Delta_k G||
  // |transport + divergence_form| / max(scale, floor); pairings far below the
  // dominant scale only carry rounding.
  double mismatch(double floor = 0.0) const;
};
double max_scale(const std::vector<HHPairing>& pairs);
std::vector<HHPairing> hh_pairings(const ScalarFieldRZ& G, const LiftedVelocity& U, const DyadicPartition& p,
                                   const LevelRange& range, int C0 = 4);

struct LocalBoundSample {
  int k = 0, i = 0;
  double measured = 0.0;
  double scale = 0.0;  // sqrt(delta) 2^{-2k} or sqrt(delta) 2^{-k/2}
  double ratio() const { return scale > 0 ? measured / scale : 0.0; }
};
// ||1_{B_i} Delta_k G|| against sqrt(delta) 2^{-2k} for every lattice ball.
std::vector<LocalBoundSample> local_dyadic_mass(const ScalarFieldRZ& G, const DyadicPartition& p,
                                                const LevelRange& range, double delta);
// max_{B_i} |U_k| against sqrt(delta) 2^{-k/2}.
std::vector<LocalBoundSample> local_velocity_block(const LiftedVelocity& U, const DyadicPartition& p,
                                                   const LevelRange& range, double delta);

struct DecayFit {
  double exponent = 0.0;  // M in (1 + |i - m|)^{-M}
  std::vector<std::pair<int, double>> samples;  // (|i - m|, normalized norm)
};
// ||1_{B_i} Delta_k (1_{A_m} f)|| / ||1_{A_m} f|| as a function of |i - m|,
// with A_m = {r <= (sqrt 3 / 2) 2^-k, |z - z_m| < 2^{-k-1}}.
DecayFit localized_decay(const ScalarFieldRZ& f, int k, int m, const DyadicPartition& p, int max_offset);
DecayFit localized_decay(const VectorFieldRZ& f, int k, int m, const DyadicPartition& p, int max_offset);
double fit_decay_exponent(const std::vector<std::pair<int, double>>& samples, int min_offset = 2);

struct FittedConstants {
  double C_paraproduct = 0.0;  // max |N_loc| / (Psi_total(C=1) D_crit)
  double C_mass = 0.0;         // max local dyadic mass ratio
  double C_velocity = 0.0;     // max velocity block ratio
  int fields = 0;
};
FittedConstants fit_constants(const std::vector<ScalarFieldRZ>& fields, const ParaproductConfig& cfg);

struct StarvationSample {
  double time = 0.0;
  bool skipped = true;
  std::string notice;
  double score = 0.0;
  double lhs = 0.0, rhs = 0.0, residual = 0.0;
};
// Per snapshot with an admissible packet scoring at least kappa: residual of
// |N_loc| <= (1 - c_starv) D_crit + C_starv R_low over the packet window.
std::vector<StarvationSample> starvation_monitor(const std::vector<FieldBundle>& snapshots, double kappa,
                                                 double c_starv, double C_starv, const ParaproductConfig& cfg);

}  // namespace lift5
