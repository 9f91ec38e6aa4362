#include "lift5/paraproduct.hpp"

#include <algorithm>
#include <cmath>

#include "lift5/error.hpp"
#include "lift5/extraction.hpp"
#include "lift5/packets.hpp"
#include "lift5/parallel.hpp"
#include "lift5/sum.hpp"

namespace lift5 {

namespace {

using Mask = std::vector<char>;

Mask full_mask(const HalfPlaneGrid& g) { return Mask(g.size(), 1); }

Mask cover_mask(const HalfPlaneGrid& g, int k, const std::vector<int>& J) {
  Mask m(g.size(), 0);
  for (int idx : J) {
    const AxisBall b = lattice_ball(k, idx);
    for (int i = 0; i < g.nr() && g.r(i) <= b.lambda; ++i)
      for (int j = 0; j < g.nz(); ++j)
        if (node_in_ball(g, i, j, b)) m[static_cast<std::size_t>(i) * g.nz() + j] = 1;
  }
  return m;
}


double masked_dot(const ScalarFieldRZ& a, const ScalarFieldRZ& b, const Mask* mask) {
  const auto& g = *a.grid();
  CompensatedSum s;
  for (int i = 0; i < g.nr(); ++i) {
    CompensatedSum row;
    for (int j = 0; j < g.nz(); ++j) {
      const std::size_t n = static_cast<std::size_t>(i) * g.nz() + j;
      if (mask && !(*mask)[n]) continue;
      row.add(a.values()[n] * b.values()[n]);
    }
    s.add(row.value() * g.cell_weight(i));
  }
  return s.value();
}

double masked_dot(const VectorFieldRZ& a, const VectorFieldRZ& b, const Mask* mask) {
  return masked_dot(a.radial, b.radial, mask) + masked_dot(a.axial, b.axial, mask);
}

VectorFieldRZ zero_vector(const GridPtr& g) { return {ScalarFieldRZ(g), ScalarFieldRZ(g)}; }

double norm(const ScalarFieldRZ& f) { return std::sqrt(mass_mu5(f)); }
double norm(const VectorFieldRZ& v) { return std::sqrt(mass_mu5(v)); }

struct Shells {
  std::map<int, ScalarFieldRZ> G;
  std::map<int, VectorFieldRZ> gradG, U;
};

Shells build_shells(const ScalarFieldRZ& G, const LiftedVelocity& U, const DyadicPartition& p) {
  Shells s;
  const int n = p.count();
  std::vector<ScalarFieldRZ> g(n, ScalarFieldRZ(G.grid()));
  std::vector<VectorFieldRZ> dg(n, zero_vector(G.grid())), u(n, zero_vector(G.grid()));
  const VectorFieldRZ Uv = U.vec();
  parallel_for(n, [&](int idx) {
    const int k = p.k_min() + idx;
    g[idx] = shell_project(G, k, p);
    dg[idx] = gradient5(g[idx]);
    u[idx] = shell_project(Uv, k, p);
  });
  for (int idx = 0; idx < n; ++idx) {
    const int k = p.k_min() + idx;
    s.G.emplace(k, std::move(g[idx]));
    s.gradG.emplace(k, std::move(dg[idx]));
    s.U.emplace(k, std::move(u[idx]));
  }
  return s;
}

// Gt_j = sum_{|m - j| <= 1} Delta_m G within the partition.
ScalarFieldRZ band3(const Shells& s, int j) {
  ScalarFieldRZ out(s.G.begin()->second.grid());
  for (int m = j - 1; m <= j + 1; ++m)
    if (auto it = s.G.find(m); it != s.G.end()) out += it->second;
  return out;
}

void check_config(const ParaproductConfig& cfg) {
  require(cfg.range.count() > 0, ErrorKind::InvalidArgument, "empty singular range");
  require(cfg.partition.contains(cfg.range.lo) && cfg.partition.contains(cfg.range.hi), ErrorKind::Range,
          "singular range outside the partition");
  require(cfg.N0 >= 1 && cfg.C0 >= 0, ErrorKind::InvalidArgument, "N0 must be positive and C0 nonnegative");
}

}  // namespace

PsiFactors psi_factors(double delta, int j_min, int N0, double C) {
  require(delta >= 0, ErrorKind::InvalidArgument, "delta must be nonnegative");
  PsiFactors f;
  const double sd = std::sqrt(delta);
  f.psi = C * sd * std::pow(2.0, -0.5 * j_min) / (1.0 - std::sqrt(0.5));
  f.psi_HL = C * N0 * sd * std::pow(2.0, -1.5 * j_min);
  f.psi_HH = f.psi_HL;
  return f;
}

double schur_constant(SchurDirection dir, double a, int C0) {
  const double q = std::pow(2.0, -a);
  return dir == SchurDirection::Lower ? q / (1.0 - q) : std::pow(2.0, a * C0) / (1.0 - q);
}

double schur_sum(const std::map<int, double>& D, SchurDirection dir, double a, int C0) {
  CompensatedSum s;
  for (const auto& [k, dk] : D)
    for (const auto& [l, dl] : D) {
      if (dir == SchurDirection::Lower && l < k) s.add(std::pow(2.0, -a * (k - l)) * dl * dk);
      if (dir == SchurDirection::Upper && l >= k - C0) s.add(std::pow(2.0, -a * (l - k)) * dl * dk);
    }
  return s.value();
}

double psi_total(const PsiFactors& f, int N0, int C0) {
  return N0 * f.psi + schur_constant(SchurDirection::Lower) * f.psi_HL +
         schur_constant(SchurDirection::Upper, 1.5, C0) * f.psi_HH;
}

ParaproductReport decompose_nonlinearity(const ScalarFieldRZ& G, const ParaproductConfig& cfg) {
  return decompose_nonlinearity(G, lifted_velocity(G), cfg);
}

ParaproductReport decompose_nonlinearity(const ScalarFieldRZ& G, const LiftedVelocity& U, const ParaproductConfig& cfg) {
  check_config(cfg);
  check_same_grid(G, U.v_radial);
  const auto& g = *G.grid();
  const auto& P = cfg.partition;
  const Shells s = build_shells(G, U, P);

  ParaproductReport rep;
  rep.k_range = cfg.range;
  rep.j_min = cfg.range.lo;
  rep.N0 = cfg.N0;
  rep.C0 = cfg.C0;

  const VectorFieldRZ Uv = U.vec();
  const VectorFieldRZ gradG = gradient5(G);
  rep.N_lift = masked_dot(dot(Uv, gradG), G, nullptr);
  {
    const VelocityRZ u = velocity_from_G(G);
    ScalarFieldRZ naive = pointwise_product(u.u_r, gradG.radial) + pointwise_product(u.u_z, gradG.axial);
    rep.N_naive = masked_dot(naive, G, nullptr);
  }

  CompensatedSum dcrit, rsh;
  for (const auto& [k, gk] : s.G) {
    const double e = std::ldexp(mass_mu5(gk), 2 * k);
    if (cfg.range.contains(k)) {
      rep.D[k] = std::sqrt(e);
      dcrit.add(e);
    } else {
      rsh.add(e);
    }
  }
  rep.D_crit = dcrit.value();
  rep.R_shells = rsh.value();

  const int nk = cfg.range.count();
  std::vector<double> lh(nk), hl(nk), hh(nk), lh_all(nk), hl_all(nk), hh_all(nk);
  parallel_for(nk, [&](int idx) {
    const int k = cfg.range.lo + idx;
    const auto it = cfg.cover.find(k);
    const Mask mask = it == cfg.cover.end() ? full_mask(g) : cover_mask(g, k, it->second);
    const ScalarFieldRZ& Gk = s.G.at(k);

    // LH: low singular velocity against the full gradient.
    VectorFieldRZ Slow = zero_vector(G.grid());
    ScalarFieldRZ Sg(G.grid());
    for (int l = cfg.range.lo; l < k; ++l) {
      Slow = Slow + s.U.at(l);
      Sg += s.G.at(l);
    }
    const ScalarFieldRZ f_lh = shell_project(dot(Slow, gradG), k, P);
    lh[idx] = masked_dot(f_lh, Gk, &mask);
    lh_all[idx] = masked_dot(f_lh, Gk, nullptr);

    // HL: shell-k velocity against the low singular gradient.
    const ScalarFieldRZ f_hl = shell_project(dot(s.U.at(k), gradient5(Sg)), k, P);
    hl[idx] = masked_dot(f_hl, Gk, &mask);
    hl_all[idx] = masked_dot(f_hl, Gk, nullptr);

    // HH in divergence form: -int Delta_k(U_j Gt_j) . grad Delta_k G.
    VectorFieldRZ flux = zero_vector(G.grid());
    for (int j = std::max(P.k_min(), k - cfg.C0); j <= P.k_max(); ++j) flux = flux + scale(s.U.at(j), band3(s, j));
    const VectorFieldRZ f_hh = shell_project(flux, k, P);
    hh[idx] = -masked_dot(f_hh, s.gradG.at(k), &mask);
    hh_all[idx] = -masked_dot(f_hh, s.gradG.at(k), nullptr);
  });

  CompensatedSum loc, all;
  for (int idx = 0; idx < nk; ++idx) {
    const int k = cfg.range.lo + idx;
    rep.I_LH[k] = lh[idx];
    rep.I_HL[k] = hl[idx];
    rep.I_HH[k] = hh[idx];
    loc.add(lh[idx] + hl[idx] + hh[idx]);
    all.add(lh_all[idx] + hl_all[idx] + hh_all[idx]);
  }
  rep.N_loc = loc.value();
  rep.N_exterior = all.value() - rep.N_loc;
  rep.R_low = rep.R_shells + std::abs(rep.N_lift - rep.N_loc);
  rep.delta = delta_sup(G, cfg.range).delta;
  return rep;
}

bool audit_bound(ParaproductReport& rep, double C) {
  require(C >= 0, ErrorKind::InvalidArgument, "audit constant must be nonnegative");
  rep.C = C;
  rep.psi = psi_factors(rep.delta, rep.j_min, rep.N0, C);
  rep.psi_total = psi_total(rep.psi, rep.N0, rep.C0);
  const double lhs = std::abs(rep.N_loc);
  rep.margin = rep.psi_total * rep.D_crit + C * rep.R_low - lhs;
  rep.strict_margin = rep.psi_total * rep.D_crit + C * rep.R_shells - lhs;
  rep.bound_pass = rep.margin >= 0;
  rep.strict_pass = rep.strict_margin >= 0;
  return rep.bound_pass;
}

double HHPairing::mismatch(double floor) const {
  const double s = std::max(scale, floor);
  return s > 0 ? std::abs(transport + divergence_form) / s : 0.0;
}

double max_scale(const std::vector<HHPairing>& pairs) {
  double m = 0.0;
  for (const auto& p : pairs) m = std::max(m, p.scale);
  return m;
}

std::vector<HHPairing> hh_pairings(const ScalarFieldRZ& G, const LiftedVelocity& U, const DyadicPartition& p,
                                   const LevelRange& range, int C0) {
  const Shells s = build_shells(G, U, p);
  std::vector<std::pair<int, int>> jk;
  for (int k = range.lo; k <= range.hi; ++k)
    for (int j = std::max(p.k_min(), k - C0); j <= p.k_max(); ++j) jk.emplace_back(j, k);
  std::vector<HHPairing> out(jk.size());
  parallel_for(jk.size(), [&](std::size_t n) {
    const auto [j, k] = jk[n];
    const ScalarFieldRZ Gt = band3(s, j);
    const VectorFieldRZ& Uj = s.U.at(j);
    HHPairing h;
    h.j = j;
    h.k = k;
    h.transport = masked_dot(shell_project(dot(Uj, gradient5(Gt)), k, p), s.G.at(k), nullptr);
    const VectorFieldRZ flux = shell_project(scale(Uj, Gt), k, p);
    h.divergence_form = masked_dot(flux, s.gradG.at(k), nullptr);
    h.scale = norm(flux) * norm(s.gradG.at(k));
    out[n] = h;
  });
  return out;
}

std::vector<LocalBoundSample> local_dyadic_mass(const ScalarFieldRZ& G, const DyadicPartition& p,
                                                const LevelRange& range, double delta) {
  std::vector<LocalBoundSample> out;
  const auto& g = *G.grid();
  for (int k = range.lo; k <= range.hi; ++k) {
    const ScalarFieldRZ Gk = shell_project(G, k, p);
    const auto lat = lattice_indices(g, k);
    std::vector<double> m(lat.size());
    parallel_for(lat.size(), [&](std::size_t n) { m[n] = std::sqrt(mass_mu5(Gk, lattice_ball(k, lat[n]))); });
    for (std::size_t n = 0; n < lat.size(); ++n)
      out.push_back({k, lat[n], m[n], std::sqrt(delta) * std::ldexp(1.0, -2 * k)});
  }
  return out;
}

std::vector<LocalBoundSample> local_velocity_block(const LiftedVelocity& U, const DyadicPartition& p,
                                                   const LevelRange& range, double delta) {
  std::vector<LocalBoundSample> out;
  const auto& g = *U.v_radial.grid();
  for (int k = range.lo; k <= range.hi; ++k) {
    const auto lat = lattice_indices(g, k);
    const auto sup = velocity_block_bound(U, k, p, lat);
    for (std::size_t n = 0; n < lat.size(); ++n)
      out.push_back({k, lat[n], sup[n], std::sqrt(delta) * std::pow(2.0, -0.5 * k)});
  }
  return out;
}

namespace {

Mask source_mask(const HalfPlaneGrid& g, int k, int m) {
  const double h = std::ldexp(1.0, -k);
  const double rmax = 0.5 * std::sqrt(3.0) * h;
  Mask mask(g.size(), 0);
  for (int i = 0; i < g.nr() && g.r(i) <= rmax; ++i)
    for (int j = 0; j < g.nz(); ++j) {
      const double dz = g.z_offset(g.z(j), m * h);
      if (dz >= -0.5 * h && dz < 0.5 * h) mask[static_cast<std::size_t>(i) * g.nz() + j] = 1;
    }
  return mask;
}

ScalarFieldRZ apply_mask(const ScalarFieldRZ& f, const Mask& m) {
  ScalarFieldRZ out(f.grid());
  for (std::size_t n = 0; n < m.size(); ++n)
    if (m[n]) out.values()[n] = f.values()[n];
  return out;
}

template <class F, class Norm>
DecayFit decay_samples(const HalfPlaneGrid& g, int k, int m, int max_offset, const F& projected, double source,
                       const Norm& ball_norm) {
  DecayFit fit;
  const double h = std::ldexp(1.0, -k);
  // Offsets beyond half the period wrap around.
  const int limit = std::min(max_offset, static_cast<int>(std::floor(g.z_half() / h)) - 1);
  for (int d = 0; d <= limit; ++d) {
    const double v = ball_norm(projected, lattice_ball(k, m + d));
    fit.samples.emplace_back(d, source > 0 ? v / source : 0.0);
  }
  fit.exponent = fit_decay_exponent(fit.samples);
  return fit;
}

AxisBall wrapped(const HalfPlaneGrid& g, AxisBall b) {
  b.z0 = g.z_offset(b.z0, 0.0);
  return b;
}

}  // namespace

double fit_decay_exponent(const std::vector<std::pair<int, double>>& samples, int min_offset) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& [d, v] : samples) {
    if (d < min_offset || !(v > 0)) continue;
    const double x = std::log(1.0 + d), y = std::log(v);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) return 0.0;
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return -slope;
}

DecayFit localized_decay(const ScalarFieldRZ& f, int k, int m, const DyadicPartition& p, int max_offset) {
  const auto& g = *f.grid();
  const ScalarFieldRZ src = apply_mask(f, source_mask(g, k, m));
  const ScalarFieldRZ out = shell_project(src, k, p);
  return decay_samples(g, k, m, max_offset, out, norm(src), [&](const ScalarFieldRZ& v, AxisBall b) {
    return std::sqrt(mass_mu5(v, wrapped(g, b)));
  });
}

DecayFit localized_decay(const VectorFieldRZ& f, int k, int m, const DyadicPartition& p, int max_offset) {
  const auto& g = *f.radial.grid();
  const Mask mask = source_mask(g, k, m);
  const VectorFieldRZ src{apply_mask(f.radial, mask), apply_mask(f.axial, mask)};
  const VectorFieldRZ out = shell_project(src, k, p);
  return decay_samples(g, k, m, max_offset, out, norm(src), [&](const VectorFieldRZ& v, AxisBall b) {
    const AxisBall w = wrapped(g, b);
    return std::sqrt(mass_mu5(v.radial, w) + mass_mu5(v.axial, w));
  });
}

FittedConstants fit_constants(const std::vector<ScalarFieldRZ>& fields, const ParaproductConfig& cfg) {
  FittedConstants c;
  for (const auto& G : fields) {
    const LiftedVelocity U = lifted_velocity(G);
    const ParaproductReport rep = decompose_nonlinearity(G, U, cfg);
    const double unit = psi_total(psi_factors(rep.delta, rep.j_min, rep.N0, 1.0), rep.N0, rep.C0) * rep.D_crit;
    if (unit > 0) c.C_paraproduct = std::max(c.C_paraproduct, std::abs(rep.N_loc) / unit);
    for (const auto& s : local_dyadic_mass(G, cfg.partition, cfg.range, rep.delta))
      c.C_mass = std::max(c.C_mass, s.ratio());
    for (const auto& s : local_velocity_block(U, cfg.partition, cfg.range, rep.delta))
      c.C_velocity = std::max(c.C_velocity, s.ratio());
    ++c.fields;
  }
  return c;
}

std::vector<StarvationSample> starvation_monitor(const std::vector<FieldBundle>& snapshots, double kappa,
                                                 double c_starv, double C_starv, const ParaproductConfig& cfg) {
  check_config(cfg);
  std::vector<StarvationSample> out;
  for (const auto& snap : snapshots) {
    StarvationSample s;
    s.time = snap.time;
    const ScalarFieldRZ& G = snap.get("G");
    const auto& g = *G.grid();
    if (G.max_abs() == 0.0) {
      s.skipped = false;
      s.notice = "zero field";
      out.push_back(s);
      continue;
    }
    const Packet* best = nullptr;
    const auto packets = detect_packets(G);
    ClassifyParams prm;
    for (const auto& p : packets) {
      prm.k = static_cast<int>(std::lround(-std::log2(p.lambda_n)));
      if (classify(p, G, prm) != BranchLabel::AdmissibleProximal) continue;
      if (!best || p.mass > best->mass) best = &p;
    }
    if (!best) {
      s.notice = "no admissible packet";
      out.push_back(s);
      continue;
    }
    const double lam = std::max(best->lambda_n, min_resolved_scale(g));
    s.score = score(G, AxisBall{best->z_n, lam});
    if (s.score < kappa) {
      s.notice = "packet score below kappa";
      out.push_back(s);
      continue;
    }
    ParaproductConfig local = cfg;
    local.cover.clear();
    std::string skipped;
    for (int k = cfg.range.lo; k <= cfg.range.hi; ++k) {
      try {
        local.cover[k] = window_cover(*best, k, cfg.N0).J;
      } catch (const Error&) {
        local.cover[k] = {};
        skipped += (skipped.empty() ? "" : ",") + std::to_string(k);
      }
    }
    if (!skipped.empty()) s.notice = "no window cover at levels " + skipped;
    const ParaproductReport rep = decompose_nonlinearity(G, local);
    s.skipped = false;
    s.lhs = std::abs(rep.N_loc);
    s.rhs = (1.0 - c_starv) * rep.D_crit + C_starv * rep.R_low;
    s.residual = s.rhs - s.lhs;
    out.push_back(s);
  }
  return out;
}

}  // namespace lift5
