#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "lift5/field.hpp"
#include "lift5/swrl_io.hpp"

namespace lift5 {

// Portable deterministic generator (mt19937_64 bits, explicit conversions).
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  double uniform();                 // [0, 1)
  double uniform(double a, double b);
  double normal();
  int integer(int lo, int hi);      // inclusive
  std::uint64_t bits();

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// amp * exp(-(r^2 + (z - zc)^2) / sigma^2)
ScalarFieldRZ gaussian_bump(const GridPtr& g, double amp, double sigma, double zc);
// Off-axis ring of Gaussian cross-section, evenly extended across the axis.
ScalarFieldRZ ring_bump(const GridPtr& g, double amp, double rc, double zc, double sigma);
// Random coefficients on the scalar modes with lo <= |xi| <= hi.
ScalarFieldRZ random_band_limited(const GridPtr& g, double xi_lo, double xi_hi, Rng& rng);
// Sum of `count` random-sign ring/axis bumps with widths in [w_lo, w_hi]
// placed in r < r_span, |z| < z_span.
ScalarFieldRZ random_bumps(const GridPtr& g, int count, double w_lo, double w_hi, double r_span, double z_span,
                           Rng& rng);
// Multi-scale noise: `shells` levels starting at width 2^-k0, equal mu5 mass
// per level, total mass `mass`.
ScalarFieldRZ diffuse_noise(const GridPtr& g, int shells, int k0, double mass, Rng& rng);

struct RecipeParams {
  std::string recipe = "gaussian";
  std::uint64_t seed = 1;
  int nr = 128, nz = 256;
  double r_max = 8.0, z_half = 8.0;
  double amplitude = 1.0;
  double ratio = 0.05;  // thinring: cross-section scale over ring radius
  int shells = 6;       // diffuse: number of levels
  double mass = 0.0;    // if > 0, rescale G to this mu5 mass
};

// Initial-data library: gaussian, rings, diffuse, thinring.  Returns fields
// "gamma" and "G".
FieldBundle make_recipe(const RecipeParams& p);

}  // namespace lift5
