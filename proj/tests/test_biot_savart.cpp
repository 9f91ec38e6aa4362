#include <cmath>

#include "doctest.h"
#include "lift5/biot_savart.hpp"
#include "lift5/recipes.hpp"
#include "lift5/spectral.hpp"

using namespace lift5;

namespace {

double norm(const ScalarFieldRZ& f) { return std::sqrt(mass_mu5(f)); }

}  // namespace

TEST_CASE("stream solve") {
  auto g = HalfPlaneGrid::create(96, 128, 10.0, 8.0);
  CHECK(norm(stream_solve(ScalarFieldRZ(g))) == 0.0);
  Rng rng(4);
  for (int t = 0; t < 5; ++t) {
    auto G = random_band_limited(g, 0.0, 15.0, rng);
    auto phi = stream_solve(G);
    CHECK(norm(laplacian5(phi) + G) / norm(G) < 1e-8);
  }
  // A single mode with |xi|^2 = 4 is divided by 4.
  SpectralField F(g, Basis::Scalar);
  const auto& P = F.plan();
  int mm = 0;
  while (P.rho(mm + 1) < 2.0) ++mm;
  const double rho = P.rho(mm);
  // Choose the domain so that no vertical mode is needed: rho alone.
  F.at(mm, 0) = 1.0;
  auto mode = inverse_transform(F);
  auto phi = stream_solve(mode);
  CHECK(norm(phi - (1.0 / (rho * rho)) * mode) / norm(mode) < 1e-12);
}

TEST_CASE("velocity reconstruction identities") {
  auto g = HalfPlaneGrid::create(96, 128, 10.0, 8.0);
  auto zero = velocity_from_phi(ScalarFieldRZ(g));
  CHECK(zero.u_r.max_abs() == 0.0);
  CHECK(zero.u_z.max_abs() == 0.0);
  Rng rng(9);
  for (int t = 0; t < 20; ++t) {
    auto G = t % 2 ? random_band_limited(g, 0.0, 12.0, rng) : random_bumps(g, 5, 0.4, 1.2, 3.0, 4.0, rng);
    auto u = velocity_from_G(G);
    CHECK(norm(vorticity_over_r(u) - G) / norm(G) < 1e-6);
    const double scale = std::sqrt(mass_mu5(VectorFieldRZ{u.u_r, u.u_z}));
    CHECK(norm(meridional_divergence(u)) / scale < 1e-6);
  }
}

TEST_CASE("Leray projection of the naive lift") {
  auto g = HalfPlaneGrid::create(96, 128, 10.0, 8.0);
  auto zero = lift_and_project(velocity_from_phi(ScalarFieldRZ(g)));
  CHECK(zero.v_radial.max_abs() == 0.0);
  Rng rng(17);
  for (int t = 0; t < 10; ++t) {
    auto G = random_bumps(g, 4, 0.4, 1.2, 3.0, 4.0, rng);
    auto u = velocity_from_G(G);
    auto U = lift_and_project(u);
    CHECK(U.naive_residual > 1e-3);
    CHECK(U.divfree_residual < 1e-6);
    const VectorFieldRZ naive{u.u_r, u.u_z};
    CHECK(mass_mu5(U.vec()) <= mass_mu5(naive) * (1.0 + 1e-9));
    auto again = leray_project(U.vec());
    const double d = std::sqrt(mass_mu5(VectorFieldRZ{again.radial - U.v_radial, again.axial - U.v_z}));
    CHECK(d / std::sqrt(mass_mu5(U.vec())) < 1e-10);
  }
}

TEST_CASE("velocity blocks: linearity, decay and dilation") {
  auto g = HalfPlaneGrid::create(128, 256, 8.0, 8.0);
  DyadicPartition p(-3, 6);
  const int k = 1;
  auto lattice = lattice_indices(*g, k);
  auto G = gaussian_bump(g, 1.0, 0.3, 0.0);
  auto U = lifted_velocity(G);
  auto base = velocity_block_bound(U, k, p, lattice);
  auto U2 = lifted_velocity(2.0 * G);
  auto twice = velocity_block_bound(U2, k, p, lattice);
  for (std::size_t i = 0; i < base.size(); ++i) CHECK(twice[i] == doctest::Approx(2.0 * base[i]).epsilon(1e-10));
  auto none = velocity_block_bound(lifted_velocity(ScalarFieldRZ(g)), k, p, lattice);
  for (double v : none) CHECK(v == 0.0);

  // Decay away from the source ball (index 0): fit log sup vs log(1 + |j|).
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (std::size_t i = 0; i < lattice.size(); ++i) {
    const int d = std::abs(lattice[i]);
    if (d < 3 || d > 10) continue;
    const double x = std::log(1.0 + d), y = std::log(base[i]);
    sx += x, sy += y, sxx += x * x, sxy += x * y, ++cnt;
  }
  const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  MESSAGE("velocity block decay exponent " << -slope);
  CHECK(-slope >= 4.0);
}

TEST_CASE("velocity blocks under dilation at fixed normalized shell mass") {
  // G' = 2^{1/2} G(2x) on the half-size grid keeps the normalized ball mass
  // 2^{4k} ||1_B G||^2 at level k + 1 equal to that of G at level k.  The
  // lifted velocity carries the factor r, so U' = 2^{1/2 - 2} U(2x).
  auto ga = HalfPlaneGrid::create(128, 256, 8.0, 8.0);
  auto gb = HalfPlaneGrid::create(128, 256, 4.0, 4.0);
  DyadicPartition pa(-3, 6), pb(-2, 7);
  const int k = 1;
  auto Ga = shell_project(gaussian_bump(ga, 1.0, 0.4, 0.0), k, pa);
  ScalarFieldRZ Gb(gb, std::vector<double>(Ga.values()), Role::G);
  Gb *= std::sqrt(2.0);
  auto sa = velocity_block_bound(lifted_velocity(Ga), k, pa, {0, 1, 2});
  auto sb = velocity_block_bound(lifted_velocity(Gb), k + 1, pb, {0, 1, 2});
  for (int i = 0; i < 3; ++i) {
    const double ratio = sb[i] / sa[i];
    CHECK(ratio == doctest::Approx(std::pow(2.0, -1.5)).epsilon(1e-6));
    CHECK(ratio <= std::pow(2.0, -0.5));
  }
}
