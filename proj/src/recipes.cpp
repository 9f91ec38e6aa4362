#include "lift5/recipes.hpp"

#include <cmath>

#include "lift5/error.hpp"
#include "lift5/spectral.hpp"

namespace lift5 {

Rng::Rng(std::uint64_t seed) : eng_(seed) {}

std::uint64_t Rng::bits() { return eng_(); }

double Rng::uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

double Rng::uniform(double a, double b) { return a + (b - a) * uniform(); }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u = 0.0;
  while (u <= 0.0) u = uniform();
  const double v = uniform();
  const double rad = std::sqrt(-2.0 * std::log(u));
  spare_ = rad * std::sin(2.0 * M_PI * v);
  has_spare_ = true;
  return rad * std::cos(2.0 * M_PI * v);
}

int Rng::integer(int lo, int hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo + 1);
  return lo + static_cast<int>(eng_() % span);
}

ScalarFieldRZ gaussian_bump(const GridPtr& g, double amp, double sigma, double zc) {
  return ScalarFieldRZ::from_function(g, [&](double r, double z) {
    const double dz = g->z_offset(z, zc);
    return amp * std::exp(-(r * r + dz * dz) / (sigma * sigma));
  });
}

ScalarFieldRZ ring_bump(const GridPtr& g, double amp, double rc, double zc, double sigma) {
  return ScalarFieldRZ::from_function(g, [&](double r, double z) {
    const double dz = g->z_offset(z, zc);
    const double s2 = sigma * sigma;
    return amp * (std::exp(-((r - rc) * (r - rc) + dz * dz) / s2) + std::exp(-((r + rc) * (r + rc) + dz * dz) / s2));
  });
}

ScalarFieldRZ random_band_limited(const GridPtr& g, double xi_lo, double xi_hi, Rng& rng) {
  SpectralField F(g, Basis::Scalar);
  const auto& P = F.plan();
  for (int m = 0; m < P.nr(); ++m)
    for (int n = 0; n < P.nzh(); ++n) {
      const double xi = P.xi(m, n);
      if (xi < xi_lo || xi > xi_hi) continue;
      const bool real_only = (n == 0 || n == P.nz() / 2);
      F.at(m, n) = cplx(rng.normal(), real_only ? 0.0 : rng.normal());
    }
  return inverse_transform(F);
}

ScalarFieldRZ random_bumps(const GridPtr& g, int count, double w_lo, double w_hi, double r_span, double z_span,
                           Rng& rng) {
  ScalarFieldRZ out(g);
  for (int b = 0; b < count; ++b) {
    const double w = w_lo * std::pow(w_hi / w_lo, rng.uniform());
    const double rc = rng.uniform(0.0, r_span);
    const double zc = rng.uniform(-z_span, z_span);
    const double amp = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.5, 1.5);
    out += ring_bump(g, 0.5 * amp, rc, zc, w);
  }
  return out;
}

ScalarFieldRZ diffuse_noise(const GridPtr& g, int shells, int k0, double mass, Rng& rng) {
  require(shells >= 1, ErrorKind::InvalidArgument, "diffuse noise needs at least one level");
  ScalarFieldRZ out(g);
  const double r_span = 0.35 * g->r_max();
  const double z_span = 0.6 * g->z_half();
  for (int l = 0; l < shells; ++l) {
    const double w = std::ldexp(1.0, -(k0 + l));
    // Keep the number of bumps per level growing with the level so each
    // level spreads its mass over more, smaller structures.
    const int count = 4 << std::min(l, 5);
    ScalarFieldRZ level(g);
    for (int b = 0; b < count; ++b) {
      const double rc = r_span * std::sqrt(rng.uniform());
      const double zc = rng.uniform(-z_span, z_span);
      const double amp = rng.uniform() < 0.5 ? -1.0 : 1.0;
      level += ring_bump(g, 0.5 * amp, rc, zc, w);
    }
    const double m = mass_mu5(level);
    if (m > 0) level *= std::sqrt(mass / shells / m);
    out += level;
  }
  return out;
}

FieldBundle make_recipe(const RecipeParams& p) {
  auto g = HalfPlaneGrid::create(p.nr, p.nz, p.r_max, p.z_half);
  Rng rng(p.seed);
  FieldBundle b;
  b.grid = g;
  ScalarFieldRZ G(g, Role::G), psi(g);
  const double R = p.r_max, L = p.z_half;
  if (p.recipe == "gaussian") {
    const double s = 0.12 * std::min(R, L);
    G = gaussian_bump(g, p.amplitude, s, 0.0);
    psi = gaussian_bump(g, p.amplitude, s, 0.0);
  } else if (p.recipe == "rings") {
    const double rc = 0.2 * R, zc = 0.15 * L, s = 0.05 * std::min(R, L);
    G = ring_bump(g, p.amplitude, rc, -zc, s) - ring_bump(g, p.amplitude, rc, zc, s);
  } else if (p.recipe == "diffuse") {
    const int k0 = static_cast<int>(std::floor(-std::log2(0.1 * std::min(R, L))));
    G = diffuse_noise(g, p.shells, k0, p.mass > 0 ? p.mass : 1.0, rng);
  } else if (p.recipe == "thinring") {
    require(p.ratio > 0 && p.ratio < 0.1, ErrorKind::InvalidArgument, "thinring ratio must lie in (0, 0.1)");
    const double rc = 0.5 * R;
    // The detected core (90 % of the mass) has radius ~1.52 sigma.
    const double s = p.ratio * rc / 1.52;
    G = ring_bump(g, p.amplitude, rc, 0.0, s);
  } else {
    fail(ErrorKind::InvalidArgument, "unknown recipe '" + p.recipe + "'");
  }
  if (p.mass > 0 && p.recipe != "diffuse") {
    const double m = mass_mu5(G);
    if (m > 0) G *= std::sqrt(p.mass / m);
  }
  G.set_role(Role::G);
  ScalarFieldRZ gamma(g, Role::Gamma);
  for (int i = 0; i < g->nr(); ++i)
    for (int j = 0; j < g->nz(); ++j) gamma(i, j) = g->r(i) * g->r(i) * psi(i, j);
  b.fields.emplace_back("gamma", gamma);
  b.fields.emplace_back("G", G);
  return b;
}

}  // namespace lift5
