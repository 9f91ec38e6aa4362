#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lift5/extraction.hpp"
#include "lift5/field.hpp"

namespace lift5 {

struct Cell {
  int i = 0;     // radial node
  int j = 0;     // vertical node in [0, nz)
  double z = 0;  // vertical coordinate unwrapped along the component
  double r = 0;  // radial coordinate, filled by make_packet
};

struct Packet {
  std::vector<Cell> cells;
  double r_n = 0.0, z_n = 0.0;  // centroid of |G|^2 dmu5
  double lambda_n = 0.0;        // equivalent-disc radius of the meridional section
  double diameter = 0.0;        // (r, z)-diameter of the cell set
  double mass = 0.0;            // int_packet |G|^2 dmu5
  double thickness_r = 0.0, thickness_z = 0.0;
  bool touches_axis = false;
  double eta_measured = 0.0;          // best one-ball captured fraction at radius lambda_n
  double core_r = 0.0, core_z = 0.0;  // center of that ball
};

// Connected components (4-neighbour, periodic in z) of the super-level set
// {|G|^2 >= tau}, where tau keeps the largest values carrying the fraction
// `mass_fraction` of int |G|^2 dmu5.  Components under 4 cells are dropped.
std::vector<Packet> detect_packets(const ScalarFieldRZ& G, double mass_fraction = 0.9);
// Same, with an explicit level on |G|^2.
std::vector<Packet> detect_packets_at_level(const ScalarFieldRZ& G, double tau);
double packet_threshold(const ScalarFieldRZ& G, double mass_fraction);
// Builds a packet from an explicit cell set (descriptors recomputed).
Packet make_packet(const ScalarFieldRZ& G, std::vector<Cell> cells);

struct Coherence {
  double fraction = 0.0;
  bool coherent = false;
  double best_r = 0.0, best_z = 0.0;
};

// Best fraction of packet mass captured by one ball of radius lambda_n.  A
// ball about a point of the orbit of (r_c, z_c) contains the whole orbit of a
// cell iff the cell lies within meridional distance lambda_n of (r_c, z_c)
// for the optimal angular offset; centers range over the packet cells.
Coherence coherence_test(const Packet& p, const ScalarFieldRZ& G, double eta);

enum class BranchLabel { Fragmentation, SlabCollapse, DisplacedOnly, ThinRing, AdmissibleProximal, ResidualNonconcentration };
const char* label_name(BranchLabel b);

struct ClassifyParams {
  double eta = 0.4;
  double C0 = 4.0;
  double aspect_max = 20.0;
  int k = 0;
  double deficiency = 0.5;  // displaced packets below this fraction of Q_* count as score-deficient
  std::optional<ScanArgmax> scan;
};

BranchLabel classify(const Packet& p, const ScalarFieldRZ& G, const ClassifyParams& params);

struct WindowCover {
  int k = 0;
  std::vector<int> J;
  int N0 = 8;
  double radius() const;
  // Number of balls of radius factor * 2^-k about z_i, i in J, containing (r, z).
  int overlap(double r, double z, double factor, double period) const;
};

// The default proximal factor sqrt(3)/2 guarantees that every cell meets at
// least one lattice ball of radius 2^-k.
WindowCover window_cover(const Packet& p, int k, int N0 = 8, double proximal_factor = 0.8660254037844386);

}  // namespace lift5
