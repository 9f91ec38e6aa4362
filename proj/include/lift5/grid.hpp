#pragma once

#include <memory>
#include <vector>

namespace lift5 {

// Half-plane {r > 0} x periodic [-L, L).  Radial nodes sit at the scaled zeros
// of J1, r_i = j_{1,i} R / j_{1,N+1}; the weights are the matching Gauss-type
// rule for r^3 dr, exact on products of the scalar Fourier-Bessel modes.
class HalfPlaneGrid {
 public:
  static std::shared_ptr<const HalfPlaneGrid> create(int nr, int nz, double r_max, double z_half);

  int nr() const { return nr_; }
  int nz() const { return nz_; }
  double r_max() const { return r_max_; }
  double z_half() const { return z_half_; }
  double dz() const { return 2.0 * z_half_ / nz_; }
  std::size_t size() const { return static_cast<std::size_t>(nr_) * nz_; }

  const std::vector<double>& r() const { return r_; }
  double r(int i) const { return r_[i]; }
  double z(int j) const { return -z_half_ + j * dz(); }
  // Weights for r^3 dr, one per radial node.
  const std::vector<double>& weights_r() const { return w_; }
  double cell_weight(int i) const { return w_[i] * dz(); }

  // j_{1,m} for m = 1..nr+1 (zero-based storage).
  const std::vector<double>& bessel_zeros() const { return zeros_; }
  // Radial spacing near the axis; used for resolution checks.
  double radial_spacing() const { return r_max_ / nr_; }
  double min_spacing() const;

  // Signed periodic distance z - z0 mapped into [-L, L).
  double z_offset(double z, double z0) const;

  bool same_as(const HalfPlaneGrid& o) const {
    return nr_ == o.nr_ && nz_ == o.nz_ && r_max_ == o.r_max_ && z_half_ == o.z_half_;
  }

 private:
  HalfPlaneGrid() = default;
  int nr_ = 0, nz_ = 0;
  double r_max_ = 0, z_half_ = 0;
  std::vector<double> r_, w_, zeros_;
};

using GridPtr = std::shared_ptr<const HalfPlaneGrid>;

struct AxisBall {
  double z0 = 0.0;
  double lambda = 1.0;
};

}  // namespace lift5
