#include "lift5/field.hpp"

#include <algorithm>
#include <cmath>

#include "lift5/error.hpp"
#include "lift5/sum.hpp"

namespace lift5 {

const char* role_name(Role r) {
  switch (r) {
    case Role::Gamma: return "gamma";
    case Role::G: return "G";
    case Role::Phi: return "phi";
    case Role::Shell: return "shell";
    case Role::Generic: return "generic";
  }
  return "generic";
}

Role role_from_name(const std::string& name) {
  if (name == "gamma") return Role::Gamma;
  if (name == "G") return Role::G;
  if (name == "phi") return Role::Phi;
  if (name == "shell") return Role::Shell;
  return Role::Generic;
}

ScalarFieldRZ::ScalarFieldRZ(GridPtr grid, Role role) : grid_(std::move(grid)), role_(role) {
  require(grid_ != nullptr, ErrorKind::InvalidArgument, "field needs a grid");
  v_.assign(grid_->size(), 0.0);
}

ScalarFieldRZ::ScalarFieldRZ(GridPtr grid, std::vector<double> values, Role role)
    : grid_(std::move(grid)), v_(std::move(values)), role_(role) {
  require(grid_ != nullptr, ErrorKind::InvalidArgument, "field needs a grid");
  require(v_.size() == grid_->size(), ErrorKind::InvalidArgument, "value count does not match grid");
}

ScalarFieldRZ ScalarFieldRZ::from_function(GridPtr grid, const std::function<double(double, double)>& f,
                                           Role role) {
  ScalarFieldRZ out(grid, role);
  for (int i = 0; i < grid->nr(); ++i)
    for (int j = 0; j < grid->nz(); ++j) out(i, j) = f(grid->r(i), grid->z(j));
  return out;
}

double ScalarFieldRZ::max_abs() const {
  double m = 0.0;
  for (double x : v_) m = std::max(m, std::abs(x));
  return m;
}

bool ScalarFieldRZ::all_finite() const {
  return std::all_of(v_.begin(), v_.end(), [](double x) { return std::isfinite(x); });
}

void check_same_grid(const ScalarFieldRZ& a, const ScalarFieldRZ& b) {
  require(a.grid() && b.grid() && a.grid()->same_as(*b.grid()), ErrorKind::GridMismatch,
          "fields live on different grids");
}

ScalarFieldRZ& ScalarFieldRZ::operator+=(const ScalarFieldRZ& o) {
  check_same_grid(*this, o);
  for (std::size_t n = 0; n < v_.size(); ++n) v_[n] += o.v_[n];
  return *this;
}

ScalarFieldRZ& ScalarFieldRZ::operator-=(const ScalarFieldRZ& o) {
  check_same_grid(*this, o);
  for (std::size_t n = 0; n < v_.size(); ++n) v_[n] -= o.v_[n];
  return *this;
}

ScalarFieldRZ& ScalarFieldRZ::operator*=(double s) {
  for (double& x : v_) x *= s;
  return *this;
}

ScalarFieldRZ operator+(ScalarFieldRZ a, const ScalarFieldRZ& b) { return a += b; }
ScalarFieldRZ operator-(ScalarFieldRZ a, const ScalarFieldRZ& b) { return a -= b; }
ScalarFieldRZ operator*(double s, ScalarFieldRZ a) { return a *= s; }

ScalarFieldRZ pointwise_product(const ScalarFieldRZ& a, const ScalarFieldRZ& b) {
  check_same_grid(a, b);
  ScalarFieldRZ out(a.grid());
  for (std::size_t n = 0; n < out.values().size(); ++n) out.values()[n] = a.values()[n] * b.values()[n];
  return out;
}

void validate(const ScalarFieldRZ& f) {
  require(f.grid() != nullptr, ErrorKind::InvalidArgument, "field without grid");
  require(f.all_finite(), ErrorKind::Numeric, "field has non-finite values");
  if (f.role() != Role::Gamma) return;
  // Gamma = r u_theta behaves like r^2 near the axis: Gamma/r^2 at the first
  // two nodes must be comparable.
  const auto& g = *f.grid();
  const double r0 = g.r(0), r1 = g.r(1);
  const double scale = f.max_abs();
  double m0 = 0, m1 = 0;
  for (int j = 0; j < g.nz(); ++j) {
    m0 = std::max(m0, std::abs(f(0, j)) / (r0 * r0));
    m1 = std::max(m1, std::abs(f(1, j)) / (r1 * r1));
  }
  require(m0 <= 2.0 * m1 + 1e-12 * scale / (r0 * r0), ErrorKind::InvalidArgument,
          "gamma field is not O(r^2) at the axis");
}

VectorFieldRZ operator+(const VectorFieldRZ& a, const VectorFieldRZ& b) {
  return {a.radial + b.radial, a.axial + b.axial};
}

ScalarFieldRZ dot(const VectorFieldRZ& a, const VectorFieldRZ& b) {
  check_same_grid(a.radial, b.radial);
  ScalarFieldRZ out(a.radial.grid());
  auto& o = out.values();
  for (std::size_t n = 0; n < o.size(); ++n)
    o[n] = a.radial.values()[n] * b.radial.values()[n] + a.axial.values()[n] * b.axial.values()[n];
  return out;
}

VectorFieldRZ scale(const VectorFieldRZ& a, const ScalarFieldRZ& s) {
  return {pointwise_product(a.radial, s), pointwise_product(a.axial, s)};
}

bool node_in_ball(const HalfPlaneGrid& g, int i, int j, const AxisBall& b) {
  const double dz = g.z_offset(g.z(j), b.z0);
  const double r = g.r(i);
  return r * r + dz * dz <= b.lambda * b.lambda;
}

namespace {

void check_ball(const HalfPlaneGrid& g, const AxisBall& b) {
  require(b.lambda > 0 && std::isfinite(b.lambda), ErrorKind::InvalidArgument, "ball radius must be positive");
  require(std::isfinite(b.z0), ErrorKind::InvalidArgument, "ball center must be finite");
  // Periodic in z, so only the radial extent can miss the grid, or a center
  // outside the fundamental period.
  require(b.z0 >= -g.z_half() && b.z0 <= g.z_half(), ErrorKind::Range, "ball center outside the vertical domain");
  require(b.lambda > g.r(0), ErrorKind::Range, "ball contains no grid node");
}

template <class F>
double ball_sum(const HalfPlaneGrid& g, const AxisBall& b, F&& value) {
  check_ball(g, b);
  CompensatedSum s;
  const double l2 = b.lambda * b.lambda;
  for (int i = 0; i < g.nr(); ++i) {
    const double r = g.r(i);
    if (r * r > l2) break;
    const double half = std::sqrt(l2 - r * r);
    CompensatedSum row;
    for (int j = 0; j < g.nz(); ++j) {
      const double dz = g.z_offset(g.z(j), b.z0);
      if (std::abs(dz) <= half) row.add(value(i, j));
    }
    s.add(row.value() * g.cell_weight(i));
  }
  return s.value();
}

template <class F>
double domain_sum(const HalfPlaneGrid& g, F&& value) {
  CompensatedSum s;
  for (int i = 0; i < g.nr(); ++i) {
    CompensatedSum row;
    for (int j = 0; j < g.nz(); ++j) row.add(value(i, j));
    s.add(row.value() * g.cell_weight(i));
  }
  return s.value();
}

}  // namespace

double integrate_mu5(const ScalarFieldRZ& f) {
  return domain_sum(*f.grid(), [&](int i, int j) { return f(i, j); });
}

double integrate_mu5(const ScalarFieldRZ& f, const AxisBall& ball) {
  return ball_sum(*f.grid(), ball, [&](int i, int j) { return f(i, j); });
}

double mass_mu5(const ScalarFieldRZ& f) {
  return domain_sum(*f.grid(), [&](int i, int j) { return f(i, j) * f(i, j); });
}

double mass_mu5(const ScalarFieldRZ& f, const AxisBall& ball) {
  return ball_sum(*f.grid(), ball, [&](int i, int j) { return f(i, j) * f(i, j); });
}

double mass_mu5(const VectorFieldRZ& v) { return mass_mu5(v.radial) + mass_mu5(v.axial); }

double lifted_l2_norm_sq(const ScalarFieldRZ& f) { return kSphere3Area * mass_mu5(f); }

}  // namespace lift5
