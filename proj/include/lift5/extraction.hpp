#pragma once

#include <vector>

#include "lift5/field.hpp"
#include "lift5/spectral.hpp"

namespace lift5 {

struct Packet;

// Q_lambda(z0) = lambda^-4 int_{B_lambda(z0)} |G|^2 dmu5.  Requires lambda to
// span at least four grid cells.
double score(const ScalarFieldRZ& G, const AxisBall& ball);
double min_resolved_scale(const HalfPlaneGrid& g);

struct ScanArgmax {
  double lambda = 0.0;
  double z0 = 0.0;
  double q = 0.0;
};

struct ScoreScan {
  std::vector<double> lambdas;
  std::vector<std::vector<double>> centers;  // per scale
  std::vector<std::vector<double>> scores;   // per scale, per center
  ScanArgmax argmax;
  double ratio = 0.0;
  double stride_factor = 0.0;
};

// Geometric net of scales lambda_min * ratio^m <= lambda_max and centers on the
// lattice lambda * stride_factor * Z within [-L, L).  Ties resolve to the
// smallest lambda, then the smallest z0.
ScoreScan sup_scan(const ScalarFieldRZ& G, double lambda_min, double lambda_max, double stride_factor = 0.25,
                   double ratio = 1.189207115002721);

struct DeltaReport {
  LevelRange k_range;
  double delta = 0.0;
  int j_min = 0;
  int k_at = 0;      // level of the maximizing ball
  double z_at = 0.0; // its center
};

// max over k in range and lattice centers i 2^-k of 2^{4k} int_{B_{2^-k}} |G|^2.
DeltaReport delta_sup(const ScalarFieldRZ& G, const LevelRange& k_range);
// 2^{4k} ||1_{B} G||^2 for every lattice ball at level k.
std::vector<double> lattice_ball_masses(const ScalarFieldRZ& G, int k, const std::vector<int>& lattice);

// Normalized area of a geodesic cap of angular radius theta on S^3.
double cap_fraction(double theta);

struct RingCapture {
  double measured = 0.0;
  double closed_form = 0.0;
  double theta = 0.0;
};

// Fraction of int |S|^2 dmu5 inside the 5D ball of radius lambda about one
// point of the orbit of (r_center, z_center).  Needs r_center >= 10 lambda.
RingCapture ring_capture_fraction(const ScalarFieldRZ& S, double lambda, double r_center, double z_center);

struct Recentering {
  double R = 0.0;
  double kappa_rec = 0.0;
  double achieved_score = 0.0;
  double required_score = 0.0;  // kappa_rec * lambda^-4 * M
  double z_center = 0.0;
  double eta_measured = 0.0;
  bool holds = false;
};

double kappa_rec(double eta, double C0);
// Axis ball of radius (C0 + 1) lambda_n about the packet's coherent core.
Recentering recenter(const Packet& p, const ScalarFieldRZ& G, double eta, double C0);

}  // namespace lift5
