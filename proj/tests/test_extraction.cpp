#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "lift5/biot_savart.hpp"
#include "lift5/error.hpp"
#include "lift5/extraction.hpp"
#include "lift5/packets.hpp"
#include "lift5/recipes.hpp"

using namespace lift5;

namespace {

GridPtr base_grid() { return HalfPlaneGrid::create(128, 256, 8.0, 8.0); }

double f0(double r, double z) { return std::exp(-(r * r + (z - 0.4) * (z - 0.4)) / 0.5) * (1.0 + 0.3 * z); }

// Periodic shift of G by `shift` cells in z.
ScalarFieldRZ roll(const ScalarFieldRZ& G, int shift) {
  const auto& g = *G.grid();
  ScalarFieldRZ out(G.grid());
  for (int i = 0; i < g.nr(); ++i)
    for (int j = 0; j < g.nz(); ++j) out(i, (j + shift) % g.nz()) = G(i, j);
  return out;
}

}  // namespace

TEST_CASE("score on simple fields") {
  auto g = base_grid();
  CHECK(score(ScalarFieldRZ(g), AxisBall{0.0, 1.0}) == 0.0);
  const double gc = 1.7, lam = 2.0;
  auto C = ScalarFieldRZ::from_function(g, [&](double, double) { return gc; });
  const double q = score(C, AxisBall{0.0, lam});
  CHECK(std::abs(q / (4.0 / 15.0 * gc * gc * lam) - 1.0) < 0.02);
  CHECK_THROWS_AS(score(C, AxisBall{0.0, 0.1}), Error);
  try {
    score(C, AxisBall{0.0, 0.1});
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Resolution);
  }
  auto G = ScalarFieldRZ::from_function(g, f0);
  CHECK(score(3.0 * G, AxisBall{0.5, 1.0}) == doctest::Approx(9.0 * score(G, AxisBall{0.5, 1.0})).epsilon(1e-13));
}

TEST_CASE("score under parabolic rescaling") {
  // G_s(r, z) = s^2 G(s r, s z) sampled on the grid shrunk by s hits the same
  // function values, so the identity holds to rounding: Q(G_s, lambda/s) = s^3 Q(G, lambda).
  const double s = 2.0;
  auto gA = base_grid();
  auto gB = HalfPlaneGrid::create(128, 256, 8.0 / s, 8.0 / s);
  auto GA = ScalarFieldRZ::from_function(gA, f0);
  auto GB = ScalarFieldRZ::from_function(gB, [&](double r, double z) { return s * s * f0(s * r, s * z); });
  for (double lam : {1.0, 1.5, 3.0})
    for (double z0 : {-1.0, 0.0, 0.5}) {
      const double qa = score(GA, AxisBall{z0, lam});
      const double qb = score(GB, AxisBall{z0 / s, lam / s});
      CHECK(qb / qa == doctest::Approx(s * s * s).epsilon(1e-10));
    }
}

TEST_CASE("sup scan") {
  auto g = base_grid();
  auto zero = sup_scan(ScalarFieldRZ(g), 0.25, 4.0);
  CHECK(zero.argmax.q == 0.0);
  CHECK(zero.argmax.lambda == 0.25);

  auto G = gaussian_bump(g, 1.0, 0.6, 0.0);
  auto sc = sup_scan(G, 0.25, 4.0);
  CHECK(std::abs(sc.argmax.z0) <= sc.argmax.lambda / 2);
  double mx = 0;
  for (std::size_t a = 0; a < sc.lambdas.size(); ++a) {
    CHECK(sc.centers[a].size() == sc.scores[a].size());
    for (double q : sc.scores[a]) {
      CHECK(q >= 0.0);
      mx = std::max(mx, q);
    }
    if (a > 0) CHECK(sc.lambdas[a] / sc.lambdas[a - 1] == doctest::Approx(std::pow(2.0, 0.25)));
  }
  CHECK(mx == sc.argmax.q);
  // Exhaustive fine scan as oracle: the net loses less than a factor 1.5.
  auto fine = sup_scan(G, 0.25, 4.0, 1.0 / 16, std::pow(2.0, 1.0 / 16));
  CHECK(sc.argmax.q <= fine.argmax.q * (1 + 1e-12));
  CHECK(sc.argmax.q >= fine.argmax.q / 1.5);

  CHECK_THROWS_AS(sup_scan(G, 2.0, 1.0), Error);
  CHECK_THROWS_AS(sup_scan(G, 0.05, 1.0), Error);
}

TEST_CASE("sup scan locality and translation") {
  auto g = HalfPlaneGrid::create(128, 512, 8.0, 16.0);
  auto one = gaussian_bump(g, 1.0, 0.6, -8.0);
  auto two = one + gaussian_bump(g, 1.0, 0.6, 8.0);
  const double q1 = sup_scan(one, 0.25, 4.0).argmax.q;
  const double q2 = sup_scan(two, 0.25, 4.0).argmax.q;
  CHECK(std::abs(q2 / q1 - 1.0) < 0.01);

  auto G = gaussian_bump(g, 1.0, 0.5, 1.3) + gaussian_bump(g, -0.5, 0.4, 2.2);
  auto base = sup_scan(G, 0.25, 4.0);
  for (int shift : {11, 37, 100}) {
    auto moved = sup_scan(roll(G, shift), 0.25, 4.0);
    const double dz = shift * g->dz();
    CHECK(moved.argmax.lambda == base.argmax.lambda);
    const double err = std::abs(g->z_offset(moved.argmax.z0, base.argmax.z0 + dz));
    CHECK(err <= base.argmax.lambda * base.stride_factor + 1e-12);
  }
}

TEST_CASE("delta sup") {
  auto g = base_grid();
  const LevelRange range{-2, 2};
  auto d0 = delta_sup(ScalarFieldRZ(g), range);
  CHECK(d0.delta == 0.0);
  CHECK(d0.j_min == -2);
  Rng rng(9);
  auto G = random_bumps(g, 6, 0.3, 1.0, 2.0, 6.0, rng);
  auto d = delta_sup(G, range);
  CHECK(d.delta > 0);
  CHECK(delta_sup(2.5 * G, range).delta == doctest::Approx(6.25 * d.delta).epsilon(1e-13));
  // Definitional agreement with the score on dyadic lattice balls.
  double mx = 0;
  for (int k = range.lo; k <= range.hi; ++k)
    for (int i : lattice_indices(*g, k)) mx = std::max(mx, score(G, lattice_ball(k, i)));
  CHECK(d.delta == doctest::Approx(mx).epsilon(1e-13));
  CHECK(score(G, AxisBall{d.z_at, std::ldexp(1.0, -d.k_at)}) == doctest::Approx(d.delta).epsilon(1e-13));
  CHECK_THROWS_AS(delta_sup(G, LevelRange{3, 4}), Error);
}

TEST_CASE("cap fraction") {
  CHECK(cap_fraction(0.1) == doctest::Approx(2.1178e-4).epsilon(1e-4));
  CHECK(cap_fraction(M_PI) == doctest::Approx(1.0));
  CHECK(cap_fraction(M_PI / 2) == doctest::Approx(0.5));
  // Monte Carlo on S^3.
  Rng rng(2024);
  for (double th : {0.1, 0.5}) {
    const long n = th < 0.2 ? 4000000 : 400000;
    long hits = 0;
    const double c = std::cos(th);
    for (long s = 0; s < n; ++s) {
      const double a = rng.normal(), b = rng.normal(), e = rng.normal(), f = rng.normal();
      if (a >= c * std::sqrt(a * a + b * b + e * e + f * f)) ++hits;
    }
    const double p = cap_fraction(th);
    const double sd = std::sqrt(p * (1 - p) / n);
    CHECK(std::abs(static_cast<double>(hits) / n - p) < 4 * sd);
  }
}

TEST_CASE("ring capture") {
  auto g = HalfPlaneGrid::create(256, 512, 16.0, 8.0);
  const double lam = 0.12;
  std::vector<double> ratio, measured;
  for (double t : {0.01, 0.0178, 0.0316, 0.0562, 0.1}) {
    // Center the ring cross-section on a node.
    int i = 0;
    while (g->r(i) < lam / t) ++i;
    const double rc = g->r(i);
    auto S = ring_bump(g, 1.0, rc, 0.0, 0.03);
    auto cap = ring_capture_fraction(S, lam, rc, 0.0);
    CHECK(cap.measured <= 1.2 * cap.closed_form);
    CHECK(cap.measured >= 0.8 * cap.closed_form);
    ratio.push_back(lam / rc);
    measured.push_back(cap.measured);
  }
  // Least-squares slope in log-log.
  double mx = 0, my = 0;
  for (std::size_t n = 0; n < ratio.size(); ++n) {
    mx += std::log(ratio[n]) / ratio.size();
    my += std::log(measured[n]) / ratio.size();
  }
  double sxy = 0, sxx = 0;
  for (std::size_t n = 0; n < ratio.size(); ++n) {
    sxy += (std::log(ratio[n]) - mx) * (std::log(measured[n]) - my);
    sxx += (std::log(ratio[n]) - mx) * (std::log(ratio[n]) - mx);
  }
  CHECK(std::abs(sxy / sxx - 3.0) < 0.2);
  for (std::size_t n = 1; n < measured.size(); ++n) CHECK(measured[n] > measured[n - 1]);

  auto S = ring_bump(g, 1.0, 2.0, 0.0, 0.03);
  try {
    ring_capture_fraction(S, 0.5, 2.0, 0.0);
    FAIL("expected regime error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Regime);
  }
}

TEST_CASE("recentering") {
  CHECK(kappa_rec(0.5, 4.0) == 8e-4);
  CHECK(kappa_rec(1.0, 0.0) == 1.0);
  CHECK(kappa_rec(0.6, 2.0) == doctest::Approx(0.6 / 81));

  auto g = base_grid();
  // Off-axis coherent bump with r_n of order 2 lambda_n.
  auto G = ring_bump(g, 1.0, 0.55, 0.7, 0.35);
  auto ps = detect_packets(G);
  REQUIRE(ps.size() == 1);
  const auto& p = ps[0];
  CHECK(p.r_n <= 2.0 * p.lambda_n);
  auto rc = recenter(p, G, 0.6, 2.0);
  CHECK(rc.holds);
  CHECK(rc.R == doctest::Approx(3.0 * p.lambda_n));
  CHECK(rc.required_score == doctest::Approx(0.6 / 81 * p.mass / std::pow(p.lambda_n, 4)));
  // Direct ball integral oracle.
  CHECK(rc.achieved_score == doctest::Approx(mass_mu5(G, AxisBall{rc.z_center, rc.R}) / std::pow(rc.R, 4)));
  CHECK(rc.achieved_score >= rc.required_score);

  auto ring = ring_bump(g, 1.0, 4.0, 0.0, 0.1);
  auto rp = detect_packets(ring);
  REQUIRE(rp.size() == 1);
  try {
    recenter(rp[0], ring, 0.4, 4.0);
    FAIL("expected regime error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Regime);
  }
}
