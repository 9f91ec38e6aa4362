#include "lift5/packets.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <unordered_map>
#include <unordered_set>

#include "lift5/error.hpp"
#include "lift5/parallel.hpp"
#include "lift5/sum.hpp"

namespace lift5 {

namespace {

double lower_edge(const HalfPlaneGrid& g, int i) { return i == 0 ? 0.0 : 0.5 * (g.r(i - 1) + g.r(i)); }
double upper_edge(const HalfPlaneGrid& g, int i) {
  return i + 1 == g.nr() ? g.r_max() : 0.5 * (g.r(i) + g.r(i + 1));
}

double cell_mass(const ScalarFieldRZ& G, const Cell& c) {
  const double v = G(c.i, c.j);
  return v * v * G.grid()->cell_weight(c.i);
}

double wrap_z(const HalfPlaneGrid& g, double z) { return g.z_offset(z, 0.0); }

}  // namespace

double packet_threshold(const ScalarFieldRZ& G, double mass_fraction) {
  require(mass_fraction > 0 && mass_fraction <= 1, ErrorKind::InvalidArgument, "mass fraction must lie in (0, 1]");
  const auto& g = *G.grid();
  std::vector<std::pair<double, double>> vm;  // (|G|^2, mass)
  vm.reserve(g.size());
  CompensatedSum total;
  for (int i = 0; i < g.nr(); ++i)
    for (int j = 0; j < g.nz(); ++j) {
      const double v2 = G(i, j) * G(i, j);
      if (v2 == 0) continue;
      vm.emplace_back(v2, v2 * g.cell_weight(i));
      total.add(v2 * g.cell_weight(i));
    }
  if (vm.empty()) return std::numeric_limits<double>::infinity();
  std::sort(vm.begin(), vm.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  const double target = mass_fraction * total.value();
  CompensatedSum acc;
  for (const auto& [v2, m] : vm) {
    acc.add(m);
    if (acc.value() >= target) return v2;
  }
  return vm.back().first;
}

std::vector<Packet> detect_packets(const ScalarFieldRZ& G, double mass_fraction) {
  return detect_packets_at_level(G, packet_threshold(G, mass_fraction));
}

std::vector<Packet> detect_packets_at_level(const ScalarFieldRZ& G, double tau) {
  require(G.all_finite(), ErrorKind::Numeric, "field has non-finite values");
  std::vector<Packet> out;
  if (!(tau > 0) || !std::isfinite(tau)) return out;
  const auto& g = *G.grid();
  const int nr = g.nr(), nz = g.nz();
  const double dz = g.dz();
  std::vector<char> seen(g.size(), 0);
  auto above = [&](int i, int j) { return G(i, j) * G(i, j) >= tau; };

  for (int i0 = 0; i0 < nr; ++i0)
    for (int j0 = 0; j0 < nz; ++j0) {
      if (seen[static_cast<std::size_t>(i0) * nz + j0] || !above(i0, j0)) continue;
      // Breadth-first labelling; the vertical index is unwrapped so that a
      // component crossing z = +-L stays contiguous.
      std::vector<Cell> cells;
      std::unordered_map<long, long> unwrapped;  // node -> unwrapped j
      bool wraps = false;
      std::deque<std::pair<int, long>> queue{{i0, j0}};
      seen[static_cast<std::size_t>(i0) * nz + j0] = 1;
      unwrapped[static_cast<long>(i0) * nz + j0] = j0;
      while (!queue.empty()) {
        const auto [i, ju] = queue.front();
        queue.pop_front();
        const int j = static_cast<int>(((ju % nz) + nz) % nz);
        cells.push_back(Cell{i, j, g.z(0) + ju * dz, g.r(i)});
        const std::pair<int, long> nb[4] = {{i - 1, ju}, {i + 1, ju}, {i, ju - 1}, {i, ju + 1}};
        for (const auto& [ni, nju] : nb) {
          if (ni < 0 || ni >= nr) continue;
          const int nj = static_cast<int>(((nju % nz) + nz) % nz);
          const long key = static_cast<long>(ni) * nz + nj;
          if (!above(ni, nj)) continue;
          if (seen[key]) {
            if (unwrapped.at(key) != nju) wraps = true;
            continue;
          }
          seen[key] = 1;
          unwrapped[key] = nju;
          queue.emplace_back(ni, nju);
        }
      }
      if (cells.size() < 4) continue;
      // A component closing around the period has no consistent unwrapping.
      if (wraps)
        for (auto& c : cells) c.z = g.z(c.j);
      out.push_back(make_packet(G, std::move(cells)));
    }
  return out;
}

Packet make_packet(const ScalarFieldRZ& G, std::vector<Cell> cells) {
  require(!cells.empty(), ErrorKind::InvalidArgument, "packet needs cells");
  const auto& g = *G.grid();
  Packet p;
  p.cells = std::move(cells);
  CompensatedSum mass, mr, mz, area;
  double r_lo = std::numeric_limits<double>::infinity(), r_hi = 0.0;
  double z_lo = std::numeric_limits<double>::infinity(), z_hi = -std::numeric_limits<double>::infinity();
  for (auto& c : p.cells) {
    require(c.i >= 0 && c.i < g.nr() && c.j >= 0 && c.j < g.nz(), ErrorKind::Range, "packet cell outside grid");
    c.r = g.r(c.i);
    const double m = cell_mass(G, c);
    mass.add(m);
    mr.add(m * g.r(c.i));
    mz.add(m * c.z);
    area.add((upper_edge(g, c.i) - lower_edge(g, c.i)) * g.dz());
    r_lo = std::min(r_lo, lower_edge(g, c.i));
    r_hi = std::max(r_hi, upper_edge(g, c.i));
    z_lo = std::min(z_lo, c.z);
    z_hi = std::max(z_hi, c.z);
    if (c.i == 0) p.touches_axis = true;
  }
  p.mass = mass.value();
  require(p.mass > 0, ErrorKind::InvalidArgument, "packet carries no mass");
  p.r_n = mr.value() / p.mass;
  p.z_n = wrap_z(g, mz.value() / p.mass);
  // Equivalent-disc radius of the meridional section; an axis-touching
  // section is completed by its mirror image.
  p.lambda_n = std::sqrt((p.touches_axis ? 2.0 : 1.0) * area.value() / M_PI);
  p.thickness_r = p.touches_axis ? 2.0 * r_hi : r_hi - r_lo;
  p.thickness_z = std::min(z_hi - z_lo + g.dz(), 2.0 * g.z_half());

  // Diameter over boundary cells only.
  std::unordered_set<long> member;
  const long nz = g.nz();
  for (const auto& c : p.cells) member.insert(c.i * nz + c.j);
  std::vector<const Cell*> boundary;
  for (const auto& c : p.cells) {
    const long up = c.i * nz + (c.j + 1) % nz, dn = c.i * nz + (c.j + nz - 1) % nz;
    if (c.i == 0 || c.i + 1 == g.nr() || !member.count(c.i * nz - nz + c.j) || !member.count(c.i * nz + nz + c.j) ||
        !member.count(up) || !member.count(dn))
      boundary.push_back(&c);
  }
  double d2 = 0.0;
  for (std::size_t a = 0; a < boundary.size(); ++a)
    for (std::size_t b = a + 1; b < boundary.size(); ++b) {
      const double dr = g.r(boundary[a]->i) - g.r(boundary[b]->i);
      const double dzz = boundary[a]->z - boundary[b]->z;
      d2 = std::max(d2, dr * dr + dzz * dzz);
    }
  p.diameter = std::sqrt(d2);

  const Coherence coh = coherence_test(p, G, 1.0);
  p.eta_measured = coh.fraction;
  p.core_r = coh.best_r;
  p.core_z = coh.best_z;
  return p;
}

Coherence coherence_test(const Packet& p, const ScalarFieldRZ& G, double eta) {
  const auto& g = *G.grid();
  const std::size_t n = p.cells.size();
  std::vector<double> m(n), r(n);
  CompensatedSum total;
  for (std::size_t a = 0; a < n; ++a) {
    m[a] = cell_mass(G, p.cells[a]);
    r[a] = g.r(p.cells[a].i);
    total.add(m[a]);
  }
  Coherence out;
  if (n == 0 || total.value() <= 0) return out;

  // Candidate centers: the packet cells (strided for large packets).
  constexpr std::size_t kMaxCandidates = 2048;
  const std::size_t stride = (n + kMaxCandidates - 1) / kMaxCandidates;
  std::vector<std::size_t> cand;
  for (std::size_t a = 0; a < n; a += stride) cand.push_back(a);
  std::vector<double> captured(cand.size());
  const double l2 = p.lambda_n * p.lambda_n;
  parallel_for(cand.size(), [&](std::size_t c) {
    const double rc = r[cand[c]], zc = p.cells[cand[c]].z;
    CompensatedSum s;
    for (std::size_t a = 0; a < n; ++a) {
      const double dr = r[a] - rc, dzz = p.cells[a].z - zc;
      if (dr * dr + dzz * dzz <= l2) s.add(m[a]);
    }
    captured[c] = s.value();
  });
  std::size_t best = 0;
  for (std::size_t c = 1; c < cand.size(); ++c)
    if (captured[c] > captured[best]) best = c;
  out.fraction = std::min(1.0, captured[best] / total.value());
  out.best_r = r[cand[best]];
  out.best_z = wrap_z(g, p.cells[cand[best]].z);
  out.coherent = out.fraction >= eta;
  return out;
}

const char* label_name(BranchLabel b) {
  switch (b) {
    case BranchLabel::Fragmentation: return "fragmentation";
    case BranchLabel::SlabCollapse: return "slab_collapse";
    case BranchLabel::DisplacedOnly: return "displaced_only";
    case BranchLabel::ThinRing: return "thin_ring";
    case BranchLabel::AdmissibleProximal: return "admissible_proximal";
    case BranchLabel::ResidualNonconcentration: return "residual_nonconcentration";
  }
  return "residual_nonconcentration";
}

BranchLabel classify(const Packet& p, const ScalarFieldRZ& G, const ClassifyParams& prm) {
  const auto& g = *G.grid();
  // Thinness is tested first: an elongated slab also fails one-ball capture
  // at its equivalent-disc scale and would otherwise read as fragmentation.
  const double aspect = std::max(p.thickness_z / p.thickness_r, p.thickness_r / p.thickness_z);
  if (aspect > prm.aspect_max) return BranchLabel::SlabCollapse;

  const Coherence coh = coherence_test(p, G, prm.eta);
  if (!coh.coherent) return BranchLabel::Fragmentation;

  if (prm.scan) {
    const double R = (prm.C0 + 1.0) * p.lambda_n;
    const double offset = std::abs(g.z_offset(p.z_n, prm.scan->z0));
    if (offset > R) {
      const double R2 = R * R;
      const double own = mass_mu5(G, AxisBall{p.z_n, R}) / (R2 * R2);
      if (own < prm.deficiency * prm.scan->q) return BranchLabel::DisplacedOnly;
    }
  }

  if (p.r_n >= 10.0 * p.lambda_n) return BranchLabel::ThinRing;

  const double floor_k = std::ldexp(1.0, -prm.k);
  if (p.r_n <= prm.C0 * p.lambda_n && p.thickness_r >= floor_k && p.thickness_z >= floor_k)
    return BranchLabel::AdmissibleProximal;
  return BranchLabel::ResidualNonconcentration;
}

double WindowCover::radius() const { return std::ldexp(1.0, -k); }

int WindowCover::overlap(double r, double z, double factor, double period) const {
  const double h = radius(), rad = factor * h;
  int count = 0;
  for (int i : J) {
    const double dz = std::remainder(z - i * h, period);
    if (r * r + dz * dz <= rad * rad) ++count;
  }
  return count;
}

WindowCover window_cover(const Packet& p, int k, int N0, double proximal_factor) {
  require(!p.cells.empty(), ErrorKind::InvalidArgument, "empty packet");
  require(N0 >= 1, ErrorKind::InvalidArgument, "N0 must be positive");
  const double h = std::ldexp(1.0, -k);
  double r_max = 0.0;
  for (const auto& c : p.cells) r_max = std::max(r_max, c.r);
  require(r_max <= proximal_factor * h, ErrorKind::Regime, "packet is not axis-proximal at this level");
  // Cell c lies in ball i iff |z_c - i h| <= sqrt(h^2 - r_c^2); the minimal
  // consecutive index set meeting every such interval spans [min hi, max lo].
  long lo_max = std::numeric_limits<long>::min(), hi_min = std::numeric_limits<long>::max();
  for (const auto& c : p.cells) {
    const double s = std::sqrt(std::max(0.0, h * h - c.r * c.r));
    const long lo = static_cast<long>(std::ceil((c.z - s) / h));
    const long hi = static_cast<long>(std::floor((c.z + s) / h));
    require(lo <= hi, ErrorKind::Regime, "packet cell meets no lattice ball at this level");
    lo_max = std::max(lo_max, lo);
    hi_min = std::min(hi_min, hi);
  }
  WindowCover w;
  w.k = k;
  w.N0 = N0;
  if (hi_min >= lo_max) {
    w.J.push_back(static_cast<int>(lo_max));
  } else {
    for (long i = hi_min; i <= lo_max; ++i) w.J.push_back(static_cast<int>(i));
  }
  require(static_cast<int>(w.J.size()) <= N0, ErrorKind::Regime,
          "cover needs " + std::to_string(w.J.size()) + " balls, more than N0 = " + std::to_string(N0));
  return w;
}

}  // namespace lift5
