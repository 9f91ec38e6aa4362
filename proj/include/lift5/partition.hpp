#pragma once

namespace lift5 {

// Smoothstep Littlewood-Paley partition:
//   Phi(t) = 1 (t <= 1), 1 - s(t - 1) (1 <= t <= 2), 0 (t >= 2),
//   s(t) = 6t^5 - 15t^4 + 10t^3,
//   psi_k(x) = Phi(2^-k x) - Phi(2^{-k+1} x),  supp psi_k in [2^{k-1}, 2^{k+1}].
// Sum over k_min..k_max telescopes to 1 on [2^k_min, 2^k_max].
class DyadicPartition {
 public:
  DyadicPartition() = default;
  DyadicPartition(int k_min, int k_max);

  int k_min() const { return k_min_; }
  int k_max() const { return k_max_; }
  int count() const { return k_max_ - k_min_ + 1; }
  bool contains(int k) const { return k >= k_min_ && k <= k_max_; }

  static double profile(double t);
  double psi(int k, double xi) const;
  // Sum of psi_k over the whole range.
  double total(double xi) const;
  double total_sq(double xi) const;

  // Fault injection: scales every shell symbol; 1 is the true partition.
  double gain() const { return gain_; }
  DyadicPartition with_gain(double g) const;

  // Largest frequency gap that keeps products of shell-j fields out of shell k
  // whenever j < k - overlap_constant().
  static constexpr int overlap_constant() { return 4; }

 private:
  int k_min_ = 0, k_max_ = 0;
  double gain_ = 1.0;
};

}  // namespace lift5
