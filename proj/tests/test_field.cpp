#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "lift5/error.hpp"
#include "lift5/field.hpp"
#include "lift5/recipes.hpp"
#include "lift5/swrl_io.hpp"

using namespace lift5;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Independent oracle: midpoint rule on the disk r^2 + z^2 <= 1 for r^3 dr dz.
double disk_volume_oracle(int n) {
  double s = 0.0;
  const double h = 1.0 / n;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < 2 * n; ++b) {
      const double r = (a + 0.5) * h, z = -1.0 + (b + 0.5) * h;
      if (r * r + z * z <= 1.0) s += r * r * r * h * h;
    }
  return s;
}

}  // namespace

TEST_CASE("grid nodes and weights") {
  auto g = HalfPlaneGrid::create(64, 64, 12.0, 8.0);
  for (int i = 0; i < g->nr(); ++i) {
    CHECK(g->r(i) > 0.0);
    if (i > 0) CHECK(g->r(i) > g->r(i - 1));
    CHECK(g->weights_r()[i] > 0.0);
  }
  CHECK(g->r(g->nr() - 1) < g->r_max());
  CHECK_THROWS_AS(HalfPlaneGrid::create(64, 100, 12.0, 8.0), Error);
  CHECK_THROWS_AS(HalfPlaneGrid::create(64, 64, -1.0, 8.0), Error);
  CHECK(HalfPlaneGrid::create(64, 64, 12.0, 8.0).get() == g.get());
}

TEST_CASE("radial rule integrates decaying moments exactly") {
  // int_0^inf r^{2m+3} e^{-r^2} dr = Gamma(m+2)/2
  auto g = HalfPlaneGrid::create(64, 8, 12.0, 1.0);
  for (int m = 0; m <= 3; ++m) {
    double s = 0.0;
    for (int i = 0; i < g->nr(); ++i) {
      const double r = g->r(i);
      s += g->weights_r()[i] * std::pow(r, 2 * m) * std::exp(-r * r);
    }
    CHECK(rel(s, std::tgamma(m + 2.0) / 2.0) < 1e-8);
  }
}

TEST_CASE("integrate_mu5 examples") {
  auto g = HalfPlaneGrid::create(96, 128, 8.0, 8.0);
  ScalarFieldRZ zero(g);
  CHECK(integrate_mu5(zero) == 0.0);
  auto gauss = ScalarFieldRZ::from_function(g, [](double r, double z) { return std::exp(-(r * r + z * z)); });
  CHECK(rel(integrate_mu5(gauss), std::sqrt(M_PI) / 2.0) < 1e-10);

  const double oracle = disk_volume_oracle(2000);
  CHECK(rel(oracle, 4.0 / 15.0) < 1e-4);
  auto fine = HalfPlaneGrid::create(256, 512, 4.0, 4.0);
  ScalarFieldRZ one(fine);
  for (double& v : one.values()) v = 1.0;
  const double vol = integrate_mu5(one, AxisBall{0.0, 1.0});
  CHECK(rel(vol, oracle) < 0.02);

  CHECK_THROWS_AS(integrate_mu5(one, AxisBall{0.0, 0.0}), Error);
  CHECK_THROWS_AS(integrate_mu5(one, AxisBall{0.0, -1.0}), Error);
  CHECK_THROWS_AS(integrate_mu5(one, AxisBall{100.0, 1.0}), Error);
}

TEST_CASE("lifted norm of the Gaussian") {
  auto g = HalfPlaneGrid::create(96, 128, 12.0, 10.0);
  auto f = ScalarFieldRZ::from_function(g, [](double r, double z) { return std::exp(-(r * r + z * z) / 2.0); });
  CHECK(rel(lifted_l2_norm_sq(f), std::pow(M_PI, 2.5)) < 1e-9);
  CHECK(lifted_l2_norm_sq(ScalarFieldRZ(g)) == 0.0);
}

TEST_CASE("ball integral is monotone and additive") {
  auto g = HalfPlaneGrid::create(64, 128, 6.0, 6.0);
  Rng rng(3);
  auto f = random_bumps(g, 6, 0.3, 0.8, 2.0, 3.0, rng);
  auto f2 = pointwise_product(f, f);
  double prev = 0.0;
  for (double lam = 0.3; lam < 4.0; lam *= 1.2) {
    const double m = integrate_mu5(f2, AxisBall{0.5, lam});
    CHECK(m >= prev);
    prev = m;
  }
  // Two disjoint balls against the same nodes summed directly.
  const AxisBall a{-2.0, 1.0}, b{2.0, 1.0};
  double direct = 0.0;
  for (int i = 0; i < g->nr(); ++i)
    for (int j = 0; j < g->nz(); ++j)
      if (node_in_ball(*g, i, j, a) || node_in_ball(*g, i, j, b)) direct += f2(i, j) * g->cell_weight(i);
  CHECK(rel(integrate_mu5(f2, a) + integrate_mu5(f2, b), direct) < 1e-12);
}

TEST_CASE("SWRL1 round trip and errors") {
  auto g = HalfPlaneGrid::create(16, 32, 3.0, 2.0);
  Rng rng(11);
  ScalarFieldRZ gamma(g, Role::Gamma);
  for (int i = 0; i < g->nr(); ++i)
    for (int j = 0; j < g->nz(); ++j) gamma(i, j) = g->r(i) * g->r(i) * rng.normal();
  FieldBundle b{g, 1.25, {{"gamma", gamma}, {"G", ScalarFieldRZ(g, Role::G)}}};
  const auto path = (std::filesystem::temp_directory_path() / "lift5_rt.swrl").string();
  write_swrl(path, b);
  auto back = read_swrl(path);
  CHECK(back.time == 1.25);
  REQUIRE(back.fields.size() == 2);
  CHECK(back.fields[0].first == "gamma");
  CHECK(back.get("gamma").values() == gamma.values());
  CHECK(back.get("gamma").role() == Role::Gamma);

  auto bytes = encode_swrl(b);
  auto bad = bytes;
  bad[0] = 'X';
  try {
    decode_swrl(bad);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Format);
  }
  auto cut = bytes;
  cut.resize(cut.size() - 8);
  try {
    decode_swrl(cut);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Truncated);
  }
  auto other = HalfPlaneGrid::create(16, 32, 3.0, 3.0);
  try {
    read_swrl(path, *other);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::GridMismatch);
  }
  std::filesystem::remove(path);
}

TEST_CASE("gamma role requires r^2 behaviour at the axis") {
  auto g = HalfPlaneGrid::create(32, 16, 4.0, 2.0);
  auto good = ScalarFieldRZ::from_function(g, [](double r, double z) { return r * r * std::exp(-r * r - z * z); },
                                           Role::Gamma);
  CHECK_NOTHROW(validate(good));
  auto bad = ScalarFieldRZ::from_function(g, [](double r, double z) { return std::exp(-r * r - z * z); }, Role::Gamma);
  CHECK_THROWS_AS(validate(bad), Error);
}
