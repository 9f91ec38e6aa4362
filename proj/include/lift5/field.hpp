#pragma once

#include <functional>
#include <string>
#include <vector>

#include "lift5/grid.hpp"

namespace lift5 {

enum class Role { Gamma, G, Phi, Shell, Generic };

const char* role_name(Role r);
Role role_from_name(const std::string& name);

// SO(4)-radial scalar f(r, z) sampled on a HalfPlaneGrid, stored r-major
// (index i * nz + j).
class ScalarFieldRZ {
 public:
  ScalarFieldRZ() = default;
  ScalarFieldRZ(GridPtr grid, Role role = Role::Generic);
  ScalarFieldRZ(GridPtr grid, std::vector<double> values, Role role = Role::Generic);

  static ScalarFieldRZ from_function(GridPtr grid, const std::function<double(double, double)>& f,
                                     Role role = Role::Generic);

  const GridPtr& grid() const { return grid_; }
  Role role() const { return role_; }
  void set_role(Role r) { role_ = r; }
  const std::vector<double>& values() const { return v_; }
  std::vector<double>& values() { return v_; }
  double operator()(int i, int j) const { return v_[static_cast<std::size_t>(i) * grid_->nz() + j]; }
  double& operator()(int i, int j) { return v_[static_cast<std::size_t>(i) * grid_->nz() + j]; }
  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }

  double max_abs() const;
  bool all_finite() const;

  ScalarFieldRZ& operator+=(const ScalarFieldRZ& o);
  ScalarFieldRZ& operator-=(const ScalarFieldRZ& o);
  ScalarFieldRZ& operator*=(double s);

 private:
  GridPtr grid_;
  std::vector<double> v_;
  Role role_ = Role::Generic;
};

ScalarFieldRZ operator+(ScalarFieldRZ a, const ScalarFieldRZ& b);
ScalarFieldRZ operator-(ScalarFieldRZ a, const ScalarFieldRZ& b);
ScalarFieldRZ operator*(double s, ScalarFieldRZ a);
ScalarFieldRZ pointwise_product(const ScalarFieldRZ& a, const ScalarFieldRZ& b);

// Checks the role-dependent axis behaviour; throws on violation.
void validate(const ScalarFieldRZ& f);

// Vector field on the lifted space in the equivariant class: a radial
// coefficient along x'/|x'| and a vertical component.
struct VectorFieldRZ {
  ScalarFieldRZ radial;
  ScalarFieldRZ axial;
};

VectorFieldRZ operator+(const VectorFieldRZ& a, const VectorFieldRZ& b);
ScalarFieldRZ dot(const VectorFieldRZ& a, const VectorFieldRZ& b);
VectorFieldRZ scale(const VectorFieldRZ& a, const ScalarFieldRZ& s);

struct VelocityRZ {
  ScalarFieldRZ u_r;
  ScalarFieldRZ u_theta;
  ScalarFieldRZ u_z;
};

void check_same_grid(const ScalarFieldRZ& a, const ScalarFieldRZ& b);

bool node_in_ball(const HalfPlaneGrid& g, int i, int j, const AxisBall& b);

// Integral of f r^3 dr dz over the domain or over a ball (node indicator).
double integrate_mu5(const ScalarFieldRZ& f);
double integrate_mu5(const ScalarFieldRZ& f, const AxisBall& ball);
// Integral of |f|^2 r^3 dr dz, optionally restricted to a ball.
double mass_mu5(const ScalarFieldRZ& f);
double mass_mu5(const ScalarFieldRZ& f, const AxisBall& ball);
double mass_mu5(const VectorFieldRZ& v);
// Full L^2(R^5) squared norm: 2 pi^2 * mass_mu5.
double lifted_l2_norm_sq(const ScalarFieldRZ& f);

constexpr double kSphere3Area = 2.0 * 3.14159265358979323846 * 3.14159265358979323846;

}  // namespace lift5
