#include <cmath>
#include <set>

#include "doctest.h"
#include "lift5/error.hpp"
#include "lift5/packets.hpp"
#include "lift5/recipes.hpp"
#include "lift5/biot_savart.hpp"
#include "lift5/spectral.hpp"

using namespace lift5;

namespace {

GridPtr base_grid() { return HalfPlaneGrid::create(128, 256, 8.0, 8.0); }

// Two on-axis lobes joined by a faint one-row filament along the axis.
ScalarFieldRZ two_lobes(const GridPtr& g, double sep) {
  auto G = gaussian_bump(g, 1.0, 0.3, -sep / 2) + gaussian_bump(g, 1.0, 0.3, sep / 2);
  for (int j = 0; j < g->nz(); ++j)
    if (std::abs(g->z(j)) <= sep / 2) G(0, j) += std::exp(-3.0);
  return G;
}

}  // namespace

TEST_CASE("detection on constructed inputs") {
  auto g = base_grid();
  CHECK(detect_packets(ScalarFieldRZ(g)).empty());

  auto ring = ring_bump(g, 1.0, 3.0, 0.5, 0.3);
  auto ps = detect_packets(ring);
  REQUIRE(ps.size() == 1);
  CHECK(std::abs(ps[0].r_n - 3.0) < g->radial_spacing());
  CHECK(std::abs(ps[0].z_n - 0.5) < g->dz());
  CHECK(ps[0].mass > 0);
  CHECK(ps[0].eta_measured <= 1.0);

  // On-axis bump: the 90 % region of |G|^2 r^3 dr dz is the 5D ball of radius
  // sigma * sqrt(chi2_5(0.9) / 4) = 1.5195 sigma.
  const double sigma = 0.5;
  auto bump = gaussian_bump(g, 2.0, sigma, -1.0);
  auto pb = detect_packets(bump);
  REQUIRE(pb.size() == 1);
  CHECK(pb[0].touches_axis);
  CHECK(std::abs(pb[0].z_n + 1.0) < g->dz());
  CHECK(pb[0].lambda_n == doctest::Approx(1.5195 * sigma).epsilon(0.05));
  CHECK(pb[0].diameter == doctest::Approx(2 * 1.5195 * sigma).epsilon(0.1));
  CHECK(pb[0].eta_measured > 0.99);
  CHECK(coherence_test(pb[0], bump, 0.9).coherent);

  auto pair = gaussian_bump(g, 1.0, 0.3, -1.5) + gaussian_bump(g, 1.0, 0.3, 1.5);
  CHECK(detect_packets(pair).size() == 2);

  // Cells are 4-connected.
  for (const auto& p : detect_packets(pair)) {
    std::set<std::pair<int, int>> cells;
    for (const auto& c : p.cells) cells.insert({c.i, c.j});
    for (const auto& c : p.cells) {
      const int n = cells.count({c.i - 1, c.j}) + cells.count({c.i + 1, c.j}) +
                    cells.count({c.i, (c.j + 1) % g->nz()}) + cells.count({c.i, (c.j + g->nz() - 1) % g->nz()});
      CHECK(n >= 1);
    }
  }
}

TEST_CASE("packet crossing the periodic boundary") {
  auto g = base_grid();
  auto G = gaussian_bump(g, 1.0, 0.4, -8.0) + gaussian_bump(g, 1.0, 0.4, 8.0);
  auto ps = detect_packets(G);
  REQUIRE(ps.size() == 1);
  CHECK(std::abs(std::abs(ps[0].z_n) - 8.0) < 2 * g->dz());
  CHECK(ps[0].thickness_z < 3.0);
}

TEST_CASE("coherence") {
  auto g = base_grid();
  auto G = two_lobes(g, 6.0);
  auto ps = detect_packets_at_level(G, std::exp(-8.0));
  REQUIRE(ps.size() == 1);
  auto c = coherence_test(ps[0], G, 0.6);
  CHECK(c.fraction == doctest::Approx(0.5).epsilon(0.05));
  CHECK_FALSE(c.coherent);
  ClassifyParams strict;
  strict.eta = 0.6;
  CHECK(classify(ps[0], G, strict) == BranchLabel::Fragmentation);

  // Mass ratios do not see the amplitude.
  auto G2 = 2.0 * G;
  auto p2 = detect_packets_at_level(G2, 4 * std::exp(-8.0));
  REQUIRE(p2.size() == 1);
  CHECK(coherence_test(p2[0], G2, 0.6).fraction == doctest::Approx(c.fraction).epsilon(1e-12));
  CHECK(detect_packets(G2).size() == detect_packets(G).size());
}

TEST_CASE("classification") {
  auto g = base_grid();
  ClassifyParams prm;

  auto bump = gaussian_bump(g, 1.0, 0.35, 0.0);
  auto pb = detect_packets(bump);
  REQUIRE(pb.size() == 1);
  prm.k = static_cast<int>(std::lround(-std::log2(pb[0].lambda_n)));
  CHECK(classify(pb[0], bump, prm) == BranchLabel::AdmissibleProximal);
  // Thickness below the level floor.
  ClassifyParams fine = prm;
  fine.k = prm.k + 3;
  CHECK(classify(pb[0], bump, fine) == BranchLabel::AdmissibleProximal);
  ClassifyParams coarse = prm;
  coarse.k = prm.k - 3;
  CHECK(classify(pb[0], bump, coarse) == BranchLabel::ResidualNonconcentration);

  auto ring = ring_bump(g, 1.0, 4.0, 0.0, 0.15);
  auto pr = detect_packets(ring);
  REQUIRE(pr.size() == 1);
  CHECK(pr[0].r_n >= 20 * pr[0].lambda_n);
  CHECK(classify(pr[0], ring, prm) == BranchLabel::ThinRing);

  // Slab: thin in r around r = 3, long in z.
  auto slab = ScalarFieldRZ::from_function(g, [](double r, double z) {
    return std::exp(-std::pow((r - 3.0) / 0.06, 2) - std::pow(z / 3.0, 8));
  });
  auto ps = detect_packets(slab);
  REQUIRE(ps.size() == 1);
  CHECK(ps[0].thickness_z / ps[0].thickness_r > 20);
  CHECK(classify(ps[0], slab, prm) == BranchLabel::SlabCollapse);

  // Displaced: a weak coherent bump far from a dominant one.
  auto two = gaussian_bump(g, 1.0, 0.35, -4.0) + gaussian_bump(g, 0.2, 0.35, 4.0);
  auto pd = detect_packets_at_level(two, 1e-3);
  REQUIRE(pd.size() == 2);
  ClassifyParams dp = prm;
  dp.scan = sup_scan(two, 0.25, 2.0).argmax;
  int displaced = 0;
  for (const auto& p : pd) displaced += classify(p, two, dp) == BranchLabel::DisplacedOnly;
  CHECK(displaced == 1);

  // Exactly one label, deterministic.
  Rng rng(3);
  auto G = random_bumps(g, 8, 0.2, 0.8, 5.0, 6.0, rng);
  auto a = detect_packets(G), b = detect_packets(G);
  REQUIRE(a.size() == b.size());
  for (std::size_t n = 0; n < a.size(); ++n) {
    CHECK(a[n].cells.size() == b[n].cells.size());
    CHECK(classify(a[n], G, prm) == classify(b[n], G, prm));
  }
}

TEST_CASE("window cover") {
  auto g = HalfPlaneGrid::create(128, 256, 4.0, 4.0);
  const int k = 0;
  // Point-like packet between two lattice centers.
  std::vector<Cell> cells;
  auto G = gaussian_bump(g, 1.0, 0.3, 0.5);
  for (int j = 0; j < g->nz(); ++j)
    if (std::abs(g->z(j) - 0.5) < 0.1) cells.push_back(Cell{0, j, g->z(j)});
  auto w = window_cover(make_packet(G, cells), k);
  CHECK(w.J.size() == 1);

  // z-extent of one lattice spacing.
  cells.clear();
  for (int i = 0; g->r(i) < 0.3; ++i)
    for (int j = 0; j < g->nz(); ++j)
      if (g->z(j) >= 0.2 && g->z(j) <= 1.2) cells.push_back(Cell{i, j, g->z(j)});
  auto p = make_packet(G, cells);
  w = window_cover(p, k);
  CHECK(w.J.size() <= 3);
  for (const auto& c : p.cells) CHECK(w.overlap(c.r, c.z, 1.0, 2 * g->z_half()) >= 1);

  // Axis point at a lattice center lies in exactly three balls.
  WindowCover all;
  all.k = k;
  for (int i = -6; i <= 6; ++i) all.J.push_back(i);
  CHECK(all.overlap(0.0, 0.0, 1.0, 100.0) == 3);
  // Overlap bounds 3 / 7 / 11.
  Rng rng(1);
  for (int t = 0; t < 2000; ++t) {
    const double r = rng.uniform(0, 0.9), z = rng.uniform(-2, 2);
    CHECK(all.overlap(r, z, 1.0, 100.0) <= 3);
    CHECK(all.overlap(r, z, 3.0, 100.0) <= 7);
    CHECK(all.overlap(r, z, 5.0, 100.0) <= 11);
  }

  // Non-proximal packets and oversize covers are rejected.
  auto ring = ring_bump(g, 1.0, 2.0, 0.0, 0.2);
  auto pr = detect_packets(ring);
  REQUIRE(pr.size() == 1);
  CHECK_THROWS_AS(window_cover(pr[0], k), Error);
  cells.clear();
  for (int j = 0; j < g->nz(); ++j)
    if (std::abs(g->z(j)) < 3.5) cells.push_back(Cell{0, j, g->z(j)});
  CHECK_THROWS_AS(window_cover(make_packet(G, cells), 2, 8), Error);
}

TEST_CASE("finite overlap summation") {
  auto g = base_grid();
  DyadicPartition part(-2, 6);
  Rng rng(77);
  for (int t = 0; t < 5; ++t) {
    auto G = random_bumps(g, 10, 0.2, 1.0, 2.0, 7.0, rng);
    for (int k = -1; k <= 2; ++k) {
      auto D = shell_project(G, k, part);
      double s = 0;
      for (int i : lattice_indices(*g, k)) s += mass_mu5(D, lattice_ball(k, i));
      CHECK(s <= 3.0 * mass_mu5(D) * (1 + 1e-12));
    }
  }
}
