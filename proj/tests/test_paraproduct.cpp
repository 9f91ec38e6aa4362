#include <cmath>

#include "doctest.h"
#include "lift5/extraction.hpp"
#include "lift5/paraproduct.hpp"
#include "lift5/recipes.hpp"

using namespace lift5;

namespace {

GridPtr base_grid() { return HalfPlaneGrid::create(128, 256, 8.0, 8.0); }

double brute_schur(const std::map<int, double>& D, bool lower, int C0) {
  double s = 0;
  for (auto [k, dk] : D)
    for (auto [l, dl] : D) {
      const int m = lower ? k - l : l - k;
      if ((lower && m >= 1) || (!lower && m >= -C0)) s += std::exp2(-1.5 * m) * dk * dl;
    }
  return s;
}

}  // namespace

TEST_CASE("psi factors") {
  auto z = psi_factors(0.0, 3, 8, 2.0);
  CHECK(z.psi == 0.0);
  CHECK(z.psi_HL == 0.0);
  CHECK(z.psi_HH == 0.0);
  auto f = psi_factors(0.04, 4, 8, 1.0);
  CHECK(f.psi == doctest::Approx(0.2 * 0.25 / (1 - std::sqrt(0.5))));
  CHECK(f.psi == doctest::Approx(0.1707).epsilon(1e-3));
  CHECK(f.psi_HL == doctest::Approx(8 * 0.2 * std::exp2(-6)));
  auto q = psi_factors(0.16, 4, 8, 1.0);
  CHECK(q.psi == doctest::Approx(2 * f.psi));
  CHECK(q.psi_HL == doctest::Approx(2 * f.psi_HL));
  CHECK(q.psi_HH == doctest::Approx(2 * f.psi_HH));
}

TEST_CASE("schur sums") {
  CHECK(schur_sum({{3, 2.0}}, SchurDirection::Lower) == 0.0);
  std::map<int, double> ones;
  for (int k = 0; k < 10; ++k) ones[k] = 1.0;
  const double lower_c = schur_constant(SchurDirection::Lower);
  CHECK(lower_c == doctest::Approx(std::exp2(-1.5) / (1 - std::exp2(-1.5))));
  CHECK(schur_sum(ones, SchurDirection::Lower) <= 10 * lower_c);
  CHECK(10 * lower_c == doctest::Approx(5.469).epsilon(1e-3));
  Rng rng(50);
  for (int t = 0; t < 50; ++t) {
    std::map<int, double> D;
    double sq = 0;
    for (int k = -3; k < 7; ++k) {
      D[k] = rng.uniform();
      sq += D[k] * D[k];
    }
    const double lo = schur_sum(D, SchurDirection::Lower), up = schur_sum(D, SchurDirection::Upper);
    CHECK(lo == doctest::Approx(brute_schur(D, true, 4)).epsilon(1e-12));
    CHECK(up == doctest::Approx(brute_schur(D, false, 4)).epsilon(1e-12));
    CHECK(lo <= lower_c * sq);
    CHECK(up <= schur_constant(SchurDirection::Upper) * sq);
  }
}

TEST_CASE("decomposition on trivial inputs") {
  auto g = base_grid();
  ParaproductConfig cfg;
  auto zero = decompose_nonlinearity(ScalarFieldRZ(g), cfg);
  CHECK(zero.N_loc == 0.0);
  CHECK(zero.R_low == 0.0);
  CHECK(audit_bound(zero, 1.0));
  CHECK(zero.margin == 0.0);

  // U = 0: every interaction term vanishes and so does the remainder.
  Rng rng(1);
  auto G = random_bumps(g, 6, 0.3, 1.0, 2.0, 6.0, rng);
  LiftedVelocity U{ScalarFieldRZ(g), ScalarFieldRZ(g)};
  auto rep = decompose_nonlinearity(G, U, cfg);
  for (const auto& [k, v] : rep.I_LH) {
    CHECK(v == 0.0);
    CHECK(rep.I_HL.at(k) == 0.0);
    CHECK(rep.I_HH.at(k) == 0.0);
  }
  CHECK(rep.N_lift == 0.0);
  CHECK(rep.R_low == rep.R_shells);
  CHECK(rep.D_crit > 0);
}

TEST_CASE("lifted transport and bookkeeping") {
  auto g = base_grid();
  Rng rng(2);
  ParaproductConfig cfg;
  for (int t = 0; t < 3; ++t) {
    auto G = random_bumps(g, 6, 0.3, 1.0, 2.0, 6.0, rng);
    auto U = lifted_velocity(G);
    auto rep = decompose_nonlinearity(G, U, cfg);
    // Divergence-free transport of G against G integrates to zero.
    double umax = 0;
    for (std::size_t n = 0; n < g->size(); ++n)
      umax = std::max(umax, std::hypot(U.v_radial.values()[n], U.v_z.values()[n]));
    const double scale = umax * std::sqrt(gradient_mass(G) * mass_mu5(G));
    CHECK(std::abs(rep.N_lift) < 1e-8 * scale);
    // The unprojected lift is not divergence-free.
    CHECK(std::abs(rep.N_naive) > 1e-4 * scale);
    CHECK(rep.N_exterior == 0.0);
    CHECK(rep.R_low == doctest::Approx(rep.R_shells + std::abs(rep.N_lift - rep.N_loc)));
    double dc = 0;
    for (auto [k, d] : rep.D) dc += d * d;
    CHECK(rep.D_crit == doctest::Approx(dc));
    CHECK(rep.delta == doctest::Approx(delta_sup(G, cfg.range).delta));
    // Dissipation equivalence upper bound.
    CHECK(rep.D_crit <= 4 * gradient_mass(G));
    // The R_low form of the audit holds whenever C >= 1: the remainder
    // contains |N_loc| itself.
    CHECK(audit_bound(rep, 1.0));
  }
}

TEST_CASE("cover restriction") {
  auto g = base_grid();
  Rng rng(3);
  auto G = random_bumps(g, 6, 0.3, 1.0, 1.0, 3.0, rng);
  ParaproductConfig cfg;
  auto full = decompose_nonlinearity(G, cfg);
  for (int k = cfg.range.lo; k <= cfg.range.hi; ++k) cfg.cover[k] = {-1, 0, 1};
  auto part = decompose_nonlinearity(G, cfg);
  CHECK(part.N_loc + part.N_exterior == doctest::Approx(full.N_loc).epsilon(1e-10));
}

TEST_CASE("single-shell input interacts only near its shell") {
  auto g = HalfPlaneGrid::create(256, 512, 8.0, 8.0);
  Rng rng(4);
  DyadicPartition p(-3, 6);
  const int k0 = 0;
  auto G = shell_project(random_bumps(g, 6, 0.2, 0.6, 2.0, 4.0, rng), k0, p);
  ParaproductConfig cfg;
  cfg.partition = p;
  cfg.range = LevelRange{-2, 3};
  auto rep = decompose_nonlinearity(G, cfg);
  double big = 0;
  for (int k = -2; k <= 3; ++k)
    big = std::max({big, std::abs(rep.I_LH[k]), std::abs(rep.I_HL[k]), std::abs(rep.I_HH[k])});
  REQUIRE(big > 0);
  // G and U live in [2^{k0-1}, 2^{k0+1}], so products stay below 2^{k0+2}.
  CHECK(std::abs(rep.I_LH[3]) < 1e-8 * big);
  CHECK(std::abs(rep.I_HL[3]) < 1e-8 * big);
  CHECK(std::abs(rep.I_HH[3]) < 1e-8 * big);
  // No velocity shell below k0 - 1.
  CHECK(std::abs(rep.I_LH[-2]) < 1e-8 * big);
  CHECK(std::abs(rep.I_HL[-2]) < 1e-8 * big);
}

TEST_CASE("divergence-free transfer on each HH pairing") {
  auto g = HalfPlaneGrid::create(256, 512, 16.0, 16.0);
  Rng rng(6);
  DyadicPartition p(-1, 4);  // shell 5 would pass the grid Nyquist
  for (int t = 0; t < 2; ++t) {
    auto G = random_bumps(g, 8, 0.3, 0.9, 2.0, 8.0, rng);
    auto U = lifted_velocity(G);
    auto pairs = hh_pairings(G, U, p, LevelRange{0, 3});
    const double floor = 1e-9 * max_scale(pairs);
    for (const auto& h : pairs) {
      INFO("j=", h.j, " k=", h.k, " scale=", h.scale / max_scale(pairs));
      CHECK(h.mismatch(floor) < 1e-6);
    }
  }
}

TEST_CASE("finite-band factor") {
  auto g = base_grid();
  Rng rng(8);
  DyadicPartition p(-3, 6);
  for (int t = 0; t < 5; ++t) {
    auto G = random_bumps(g, 6, 0.2, 1.0, 2.0, 6.0, rng);
    auto masses = shell_masses(G, p);
    for (int j = -2; j <= 5; ++j) {
      const double gt = std::sqrt(mass_mu5(band_project(G, j - 1, j + 1, p)));
      double dmax = 0;
      for (int m = j - 1; m <= j + 1; ++m) dmax = std::max(dmax, std::ldexp(std::sqrt(masses[m]), m));
      CHECK(gt <= 6.0 * std::ldexp(dmax, -j) * (1 + 1e-12));
    }
  }
}

TEST_CASE("localized product decay") {
  auto g = HalfPlaneGrid::create(128, 512, 8.0, 16.0);
  Rng rng(10);
  DyadicPartition p(-3, 6);
  auto G = random_bumps(g, 10, 0.3, 1.0, 1.0, 14.0, rng);
  auto U = lifted_velocity(G);
  auto lh = dot(low_pass(U.vec(), 1, p, LevelRange{-3, 6}), gradient5(G));
  auto fit = localized_decay(lh, 1, 0, p, 12);
  CHECK(fit.exponent >= 4.0);
  auto prod = scale(shell_project(U.vec(), 1, p), band_project(G, 0, 2, p));
  auto fv = localized_decay(prod, 1, 0, p, 12);
  CHECK(fv.exponent >= 4.0);
  CHECK(fit_decay_exponent({{2, 1.0}, {3, std::pow(4.0 / 3.0, -5)}, {5, std::pow(2.0, -5)}}) == doctest::Approx(5.0));
}

TEST_CASE("fitted constants and local bounds") {
  auto g = base_grid();
  Rng rng(12);
  ParaproductConfig cfg;
  std::vector<ScalarFieldRZ> fields;
  for (int t = 0; t < 3; ++t) fields.push_back(diffuse_noise(g, 5, 0, 1.0, rng));
  auto c = fit_constants(fields, cfg);
  CHECK(c.fields == 3);
  CHECK(c.C_mass > 0);
  CHECK(c.C_velocity > 0);
  for (const auto& G : fields) {
    auto rep = decompose_nonlinearity(G, cfg);
    audit_bound(rep, c.C_paraproduct);
    CHECK(rep.strict_pass);
    CHECK(rep.bound_pass);
    for (const auto& s : local_dyadic_mass(G, cfg.partition, cfg.range, rep.delta)) CHECK(s.ratio() <= c.C_mass);
  }
}

TEST_CASE("starvation monitor") {
  auto g = base_grid();
  ParaproductConfig cfg;
  FieldBundle zero{g, 0.0, {{"G", ScalarFieldRZ(g)}}};
  auto z = starvation_monitor({zero}, 0.1, 0.5, 1.0, cfg);
  REQUIRE(z.size() == 1);
  CHECK_FALSE(z[0].skipped);
  CHECK(z[0].residual == 0.0);

  auto G = gaussian_bump(g, 1.0, 0.5, 0.0) + gaussian_bump(g, 0.3, 0.4, 1.2);
  FieldBundle one{g, 0.5, {{"G", G}}};
  FieldBundle three{g, 1.0, {{"G", 3.0 * G}}};
  auto s = starvation_monitor({one, three}, 1e-6, 0.5, 1.0, cfg);
  REQUIRE(s.size() == 2);
  REQUIRE_FALSE(s[0].skipped);
  REQUIRE_FALSE(s[1].skipped);
  CHECK(s[1].lhs == doctest::Approx(27 * s[0].lhs).epsilon(1e-8));
  CHECK(s[0].residual == doctest::Approx(s[0].rhs - s[0].lhs));

  auto hi = starvation_monitor({one}, 1e9, 0.5, 1.0, cfg);
  CHECK(hi[0].skipped);
  auto ring = ring_bump(g, 1.0, 4.0, 0.0, 0.2);
  auto none = starvation_monitor({FieldBundle{g, 0.0, {{"G", ring}}}}, 0.0, 0.5, 1.0, cfg);
  CHECK(none[0].skipped);
}
