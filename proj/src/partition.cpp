#include "lift5/partition.hpp"

#include <cmath>

#include "lift5/error.hpp"

namespace lift5 {

DyadicPartition::DyadicPartition(int k_min, int k_max) : k_min_(k_min), k_max_(k_max) {
  require(k_min <= k_max, ErrorKind::InvalidArgument, "partition needs k_min <= k_max");
  require(k_min >= -60 && k_max <= 60, ErrorKind::Range, "partition levels out of range");
}

double DyadicPartition::profile(double t) {
  if (t <= 1.0) return 1.0;
  if (t >= 2.0) return 0.0;
  const double u = t - 1.0;
  return 1.0 - u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

double DyadicPartition::psi(int k, double xi) const {
  return gain_ * (profile(std::ldexp(xi, -k)) - profile(std::ldexp(xi, 1 - k)));
}

double DyadicPartition::total(double xi) const {
  double s = 0.0;
  for (int k = k_min_; k <= k_max_; ++k) s += psi(k, xi);
  return s;
}

double DyadicPartition::total_sq(double xi) const {
  double s = 0.0;
  for (int k = k_min_; k <= k_max_; ++k) {
    const double p = psi(k, xi);
    s += p * p;
  }
  return s;
}

DyadicPartition DyadicPartition::with_gain(double g) const {
  DyadicPartition p = *this;
  p.gain_ = g;
  return p;
}

}  // namespace lift5
