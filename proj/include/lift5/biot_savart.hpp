#pragma once

#include <vector>

#include "lift5/field.hpp"
#include "lift5/partition.hpp"

namespace lift5 {

// Divergence-free lifted velocity on R^5: radial coefficient along x'/|x'|
// and vertical component.
struct LiftedVelocity {
  ScalarFieldRZ v_radial;
  ScalarFieldRZ v_z;
  // ||div5 V|| / ||V|| measured after projection.
  double divfree_residual = 0.0;
  // ||(2/r) u_r|| / ||naive lift||, the divergence of the naive lift.
  double naive_residual = 0.0;

  VectorFieldRZ vec() const { return {v_radial, v_z}; }
};

// Solves -Delta5 phi = G with phi = 0 at r = R.
ScalarFieldRZ stream_solve(const ScalarFieldRZ& G);
// u_r = -r d_z phi, u_z = 2 phi + r d_r phi, u_theta = Gamma / r.
VelocityRZ velocity_from_phi(const ScalarFieldRZ& phi, const ScalarFieldRZ* gamma = nullptr);
VelocityRZ velocity_from_G(const ScalarFieldRZ& G, const ScalarFieldRZ* gamma = nullptr);

// (d_z u_r - d_r u_z) / r, i.e. omega_theta / r.
ScalarFieldRZ vorticity_over_r(const VelocityRZ& u);
// (1/r) d_r (r u_r) + d_z u_z.
ScalarFieldRZ meridional_divergence(const VelocityRZ& u);

// 5D Leray projection within the equivariant class.
VectorFieldRZ leray_project(const VectorFieldRZ& v);
// Naive lift (v_radial = u_r, v_z = u_z) followed by the Leray projection.
LiftedVelocity lift_and_project(const VelocityRZ& u);
LiftedVelocity lifted_velocity(const ScalarFieldRZ& G);

// Axis ball of lattice index i at level k: center i 2^-k, radius factor * 2^-k.
AxisBall lattice_ball(int k, int i, double factor = 1.0);
// Lattice indices whose centers lie in [-L, L).
std::vector<int> lattice_indices(const HalfPlaneGrid& g, int k);

// max |U_k| over the nodes of each lattice ball B_i, i in `lattice`.
std::vector<double> velocity_block_bound(const LiftedVelocity& U, int k, const DyadicPartition& p,
                                         const std::vector<int>& lattice);
std::vector<double> block_sup(const VectorFieldRZ& v, int k, const std::vector<int>& lattice);

}  // namespace lift5
