#include "lift5/grid.hpp"

#include <boost/math/special_functions/bessel.hpp>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include "lift5/error.hpp"

namespace lift5 {

namespace {

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

std::shared_ptr<const HalfPlaneGrid> HalfPlaneGrid::create(int nr, int nz, double r_max, double z_half) {
  require(nr >= 4, ErrorKind::InvalidArgument, "nr must be at least 4");
  require(is_pow2(nz) && nz >= 4, ErrorKind::InvalidArgument, "nz must be a power of two >= 4");
  require(std::isfinite(r_max) && r_max > 0, ErrorKind::InvalidArgument, "R_max must be positive");
  require(std::isfinite(z_half) && z_half > 0, ErrorKind::InvalidArgument, "L_z must be positive");

  // Grids are immutable and shared; equal parameters give the same object so
  // that spectral plans can be cached per grid.
  static std::mutex mu;
  static std::map<std::tuple<int, int, double, double>, std::weak_ptr<const HalfPlaneGrid>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_tuple(nr, nz, r_max, z_half);
  if (auto it = cache.find(key); it != cache.end()) {
    if (auto sp = it->second.lock()) return sp;
  }

  std::shared_ptr<HalfPlaneGrid> g(new HalfPlaneGrid());
  g->nr_ = nr;
  g->nz_ = nz;
  g->r_max_ = r_max;
  g->z_half_ = z_half;
  g->zeros_.resize(nr + 1);
  boost::math::cyl_bessel_j_zero(1.0, 1, nr + 1, g->zeros_.begin());
  const double tau = g->zeros_[nr] / r_max;
  g->r_.resize(nr);
  g->w_.resize(nr);
  for (int i = 0; i < nr; ++i) {
    const double ri = g->zeros_[i] / tau;
    const double j2 = boost::math::cyl_bessel_j(2, g->zeros_[i]);
    g->r_[i] = ri;
    g->w_[i] = 2.0 * ri * ri / (tau * tau * j2 * j2);
  }
  cache[key] = g;
  return g;
}

double HalfPlaneGrid::min_spacing() const {
  double h = dz();
  for (int i = 1; i < nr_; ++i) h = std::min(h, r_[i] - r_[i - 1]);
  return h;
}

double HalfPlaneGrid::z_offset(double z, double z0) const {
  const double period = 2.0 * z_half_;
  double d = std::fmod(z - z0 + z_half_, period);
  if (d < 0) d += period;
  return d - z_half_;
}

}  // namespace lift5
