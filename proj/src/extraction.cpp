#include "lift5/extraction.hpp"

#include <algorithm>
#include <cmath>

#include "lift5/biot_savart.hpp"
#include "lift5/error.hpp"
#include "lift5/packets.hpp"
#include "lift5/parallel.hpp"
#include "lift5/sum.hpp"

namespace lift5 {

double min_resolved_scale(const HalfPlaneGrid& g) { return 4.0 * std::max(g.radial_spacing(), g.dz()); }

double score(const ScalarFieldRZ& G, const AxisBall& ball) {
  const auto& g = *G.grid();
  // Relative slack so that dyadic scales equal to the bound are accepted.
  require(ball.lambda >= min_resolved_scale(g) * (1 - 1e-12), ErrorKind::Resolution,
          "ball radius below four grid spacings");
  const double l2 = ball.lambda * ball.lambda;
  return mass_mu5(G, ball) / (l2 * l2);
}

ScoreScan sup_scan(const ScalarFieldRZ& G, double lambda_min, double lambda_max, double stride_factor,
                   double ratio) {
  const auto& g = *G.grid();
  require(lambda_min > 0 && lambda_min <= lambda_max, ErrorKind::InvalidArgument, "empty scale range");
  require(ratio > 1 && stride_factor > 0, ErrorKind::InvalidArgument, "scan ratio must exceed 1 and stride be positive");
  require(lambda_min >= min_resolved_scale(g) * (1 - 1e-12), ErrorKind::Resolution,
          "smallest scan scale below four grid spacings");

  ScoreScan out;
  out.ratio = ratio;
  out.stride_factor = stride_factor;
  for (double l = lambda_min; l <= lambda_max * (1 + 1e-12); l *= ratio) out.lambdas.push_back(l);
  const std::size_t n = out.lambdas.size();
  out.centers.resize(n);
  out.scores.resize(n);
  for (std::size_t a = 0; a < n; ++a) {
    const double s = out.lambdas[a] * stride_factor;
    for (long m = static_cast<long>(std::ceil(-g.z_half() / s)); m * s < g.z_half(); ++m)
      out.centers[a].push_back(m * s);
    out.scores[a].assign(out.centers[a].size(), 0.0);
  }

  std::vector<std::pair<std::size_t, std::size_t>> cells;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < out.centers[a].size(); ++b) cells.emplace_back(a, b);
  parallel_for(cells.size(), [&](std::size_t c) {
    const auto [a, b] = cells[c];
    out.scores[a][b] = score(G, AxisBall{out.centers[a][b], out.lambdas[a]});
  });

  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < out.centers[a].size(); ++b)
      if (out.scores[a][b] > out.argmax.q || (a == 0 && b == 0))
        out.argmax = ScanArgmax{out.lambdas[a], out.centers[a][b], out.scores[a][b]};
  return out;
}

std::vector<double> lattice_ball_masses(const ScalarFieldRZ& G, int k, const std::vector<int>& lattice) {
  std::vector<double> out(lattice.size());
  const double s = std::ldexp(1.0, 4 * k);
  parallel_for(lattice.size(), [&](std::size_t n) { out[n] = s * mass_mu5(G, lattice_ball(k, lattice[n])); });
  return out;
}

DeltaReport delta_sup(const ScalarFieldRZ& G, const LevelRange& k_range) {
  require(k_range.count() > 0, ErrorKind::InvalidArgument, "empty level range");
  const auto& g = *G.grid();
  DeltaReport rep;
  rep.k_range = k_range;
  rep.j_min = k_range.lo;
  bool first = true;
  for (int k = k_range.lo; k <= k_range.hi; ++k) {
    require(std::ldexp(1.0, -k) >= min_resolved_scale(g) * (1 - 1e-12), ErrorKind::Resolution,
            "level " + std::to_string(k) + " is not resolved by the grid");
    const auto lat = lattice_indices(g, k);
    const auto m = lattice_ball_masses(G, k, lat);
    for (std::size_t n = 0; n < lat.size(); ++n) {
      if (first || m[n] > rep.delta) {
        rep.delta = m[n];
        rep.k_at = k;
        rep.z_at = lattice_ball(k, lat[n]).z0;
        first = false;
      }
    }
  }
  return rep;
}

double cap_fraction(double theta) {
  require(theta >= 0 && theta <= M_PI, ErrorKind::Range, "cap angle outside [0, pi]");
  return (theta - std::sin(theta) * std::cos(theta)) / M_PI;
}

RingCapture ring_capture_fraction(const ScalarFieldRZ& S, double lambda, double r_center, double z_center) {
  require(lambda > 0, ErrorKind::InvalidArgument, "capture radius must be positive");
  require(r_center >= 10.0 * lambda, ErrorKind::Regime, "ring capture needs r_center >= 10 lambda");
  const auto& g = *S.grid();
  CompensatedSum in, total;
  for (int i = 0; i < g.nr(); ++i) {
    const double r = g.r(i);
    for (int j = 0; j < g.nz(); ++j) {
      const double m = S(i, j) * S(i, j) * g.cell_weight(i);
      total.add(m);
      const double dz = g.z_offset(g.z(j), z_center);
      // |x - P|^2 = r^2 + rc^2 - 2 r rc cos(a) + dz^2 <= lambda^2
      const double c = (r * r + r_center * r_center + dz * dz - lambda * lambda) / (2.0 * r * r_center);
      if (c >= 1.0) continue;
      in.add(m * cap_fraction(std::acos(std::max(-1.0, c))));
    }
  }
  RingCapture out;
  out.theta = lambda / r_center;
  out.closed_form = cap_fraction(out.theta);
  out.measured = total.value() > 0 ? in.value() / total.value() : 0.0;
  return out;
}

double kappa_rec(double eta, double C0) {
  require(eta > 0 && eta <= 1 && C0 >= 0, ErrorKind::InvalidArgument, "need eta in (0, 1] and C0 >= 0");
  const double c = C0 + 1.0;
  return eta / (c * c * c * c);
}

Recentering recenter(const Packet& p, const ScalarFieldRZ& G, double eta, double C0) {
  const double kr = kappa_rec(eta, C0);
  require(p.r_n <= C0 * p.lambda_n, ErrorKind::Regime,
          "packet center is not axis-proximal; use ring_capture_fraction for thin rings");
  const Coherence coh = coherence_test(p, G, eta);
  require(coh.coherent, ErrorKind::Regime, "packet is not eta-coherent");
  Recentering out;
  out.R = (C0 + 1.0) * p.lambda_n;
  out.kappa_rec = kr;
  out.z_center = coh.best_z;
  out.eta_measured = coh.fraction;
  const double l2 = p.lambda_n * p.lambda_n;
  out.required_score = kr * p.mass / (l2 * l2);
  const double R2 = out.R * out.R;
  out.achieved_score = mass_mu5(G, AxisBall{out.z_center, out.R}) / (R2 * R2);
  out.holds = out.achieved_score >= out.required_score;
  return out;
}

}  // namespace lift5
