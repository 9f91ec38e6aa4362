#include "lift5/biot_savart.hpp"

#include <cmath>

#include "lift5/error.hpp"
#include "lift5/spectral.hpp"

namespace lift5 {

namespace {

const cplx I(0.0, 1.0);

ScalarFieldRZ times_r(ScalarFieldRZ f) {
  const auto& g = *f.grid();
  for (int i = 0; i < g.nr(); ++i)
    for (int j = 0; j < g.nz(); ++j) f(i, j) *= g.r(i);
  return f;
}

ScalarFieldRZ over_r(ScalarFieldRZ f) {
  const auto& g = *f.grid();
  for (int i = 0; i < g.nr(); ++i)
    for (int j = 0; j < g.nz(); ++j) f(i, j) /= g.r(i);
  return f;
}

}  // namespace

ScalarFieldRZ stream_solve(const ScalarFieldRZ& G) {
  SpectralField F = forward_transform(G);
  // rho >= j_{1,1}/R > 0, so there is no zero mode to fix.
  F.apply([](double xi) { return 1.0 / (xi * xi); });
  return inverse_transform(F, Role::Phi);
}

VelocityRZ velocity_from_phi(const ScalarFieldRZ& phi, const ScalarFieldRZ* gamma) {
  const SpectralField F = forward_transform(phi);
  const auto& P = F.plan();
  SpectralField A(phi.grid(), Basis::Scalar), B(phi.grid(), Basis::Axial);
  for (int m = 0; m < P.nr(); ++m)
    for (int n = 0; n < P.nzh(); ++n) {
      A.at(m, n) = -I * P.zeta_deriv(n) * F.at(m, n);
      B.at(m, n) = P.rho(m) * F.at(m, n);
    }
  VelocityRZ u;
  u.u_r = times_r(inverse_transform(A));
  u.u_z = inverse_transform(B);
  if (gamma) {
    check_same_grid(phi, *gamma);
    u.u_theta = over_r(*gamma);
  } else {
    u.u_theta = ScalarFieldRZ(phi.grid());
  }
  return u;
}

VelocityRZ velocity_from_G(const ScalarFieldRZ& G, const ScalarFieldRZ* gamma) {
  return velocity_from_phi(stream_solve(G), gamma);
}

ScalarFieldRZ vorticity_over_r(const VelocityRZ& u) {
  const SpectralField A = forward_transform(over_r(u.u_r), Basis::Scalar);
  const SpectralField B = forward_transform(u.u_z, Basis::Axial);
  const auto& P = A.plan();
  SpectralField W(u.u_r.grid(), Basis::Scalar);
  for (int m = 0; m < P.nr(); ++m)
    for (int n = 0; n < P.nzh(); ++n) W.at(m, n) = I * P.zeta_deriv(n) * A.at(m, n) + P.rho(m) * B.at(m, n);
  return inverse_transform(W);
}

ScalarFieldRZ meridional_divergence(const VelocityRZ& u) {
  const SpectralField A = forward_transform(over_r(u.u_r), Basis::Scalar);
  const SpectralField B = forward_transform(u.u_z, Basis::Axial);
  const auto& P = A.plan();
  SpectralField D(u.u_r.grid(), Basis::Axial);
  for (int m = 0; m < P.nr(); ++m)
    for (int n = 0; n < P.nzh(); ++n) D.at(m, n) = P.rho(m) * A.at(m, n) + I * P.zeta_deriv(n) * B.at(m, n);
  return inverse_transform(D);
}

VectorFieldRZ leray_project(const VectorFieldRZ& v) {
  SpectralField A = forward_transform(v.radial, Basis::Vector);
  SpectralField B = forward_transform(v.axial, Basis::Scalar);
  const auto& P = A.plan();
  for (int m = 0; m < P.nr(); ++m)
    for (int n = 0; n < P.nzh(); ++n) {
      const double rho = P.rho(m), zeta = P.zeta_deriv(n);
      // Remove the gradient part grad p with Delta5 p = div5 v.
      const cplx p = -(rho * A.at(m, n) + I * zeta * B.at(m, n)) / (rho * rho + zeta * zeta);
      A.at(m, n) += rho * p;
      B.at(m, n) -= I * zeta * p;
    }
  return {inverse_transform(A), inverse_transform(B)};
}

LiftedVelocity lift_and_project(const VelocityRZ& u) {
  const VectorFieldRZ naive{u.u_r, u.u_z};
  const double naive_norm = std::sqrt(mass_mu5(naive));
  LiftedVelocity out;
  if (naive_norm == 0.0) {
    out.v_radial = ScalarFieldRZ(u.u_r.grid());
    out.v_z = ScalarFieldRZ(u.u_r.grid());
    return out;
  }
  // div5 of the naive lift is (2/r) u_r.
  out.naive_residual = 2.0 * std::sqrt(mass_mu5(over_r(u.u_r))) / naive_norm;
  VectorFieldRZ v = leray_project(naive);
  out.v_radial = std::move(v.radial);
  out.v_z = std::move(v.axial);
  const double vn = std::sqrt(mass_mu5(out.vec()));
  out.divfree_residual = vn > 0 ? std::sqrt(mass_mu5(divergence5(out.vec()))) / vn : 0.0;
  return out;
}

LiftedVelocity lifted_velocity(const ScalarFieldRZ& G) { return lift_and_project(velocity_from_G(G)); }

AxisBall lattice_ball(int k, int i, double factor) {
  const double h = std::ldexp(1.0, -k);
  return AxisBall{i * h, factor * h};
}

std::vector<int> lattice_indices(const HalfPlaneGrid& g, int k) {
  const double h = std::ldexp(1.0, -k);
  std::vector<int> out;
  const int lo = static_cast<int>(std::ceil(-g.z_half() / h));
  for (int i = lo; i * h < g.z_half(); ++i) out.push_back(i);
  return out;
}

std::vector<double> block_sup(const VectorFieldRZ& v, int k, const std::vector<int>& lattice) {
  const auto& g = *v.radial.grid();
  std::vector<double> out;
  out.reserve(lattice.size());
  for (int idx : lattice) {
    const AxisBall b = lattice_ball(k, idx);
    double m = 0.0;
    for (int i = 0; i < g.nr() && g.r(i) <= b.lambda; ++i)
      for (int j = 0; j < g.nz(); ++j)
        if (node_in_ball(g, i, j, b)) m = std::max(m, std::hypot(v.radial(i, j), v.axial(i, j)));
    out.push_back(m);
  }
  return out;
}

std::vector<double> velocity_block_bound(const LiftedVelocity& U, int k, const DyadicPartition& p,
                                         const std::vector<int>& lattice) {
  return block_sup(shell_project(U.vec(), k, p), k, lattice);
}

}  // namespace lift5
