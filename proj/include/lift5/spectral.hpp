#pragma once

#include <complex>
#include <functional>
#include <map>
#include <memory>
#include <vector>

#include "lift5/field.hpp"
#include "lift5/partition.hpp"

namespace lift5 {

using cplx = std::complex<double>;

// Radial companion bases sharing the frequencies rho_m = j_{1,m} / R:
//   Scalar: J1(rho r)/r  (SO(4)-radial scalars, Dirichlet at R)
//   Vector: J2(rho r)/r  (radial coefficient of lifted vector fields; d/dr of scalars)
//   Axial:  J0(rho r)    (3D axial velocity and 3D divergence checks)
// Identities used throughout:
//   d/dr [J1(rho r)/r] = -rho J2(rho r)/r
//   (d/dr + 3/r) [J2(rho r)/r] = rho J1(rho r)/r
//   (2 + r d/dr) [J1(rho r)/r] = rho J0(rho r)
enum class Basis { Scalar, Vector, Axial };

class SpectralPlan {
 public:
  static std::shared_ptr<const SpectralPlan> for_grid(const GridPtr& grid);
  ~SpectralPlan();
  SpectralPlan(const SpectralPlan&) = delete;
  SpectralPlan& operator=(const SpectralPlan&) = delete;

  const HalfPlaneGrid& grid() const { return *grid_; }
  int nr() const { return nr_; }
  int nz() const { return nz_; }
  int nzh() const { return nzh_; }
  std::size_t coeff_size() const { return static_cast<std::size_t>(nr_) * nzh_; }

  const std::vector<double>& rho() const { return rho_; }
  double rho(int m) const { return rho_[m]; }
  double zeta(int n) const { return zeta_[n]; }
  // Wavenumber used by d/dz; zero on the Nyquist column.
  double zeta_deriv(int n) const { return n == nz_ / 2 ? 0.0 : zeta_[n]; }
  double xi(int m, int n) const { return std::sqrt(rho_[m] * rho_[m] + zeta_[n] * zeta_[n]); }

  // Continuous norm of one radial basis function: int b_m^2 r^3 dr for the
  // Scalar and Vector bases, int J0^2 r dr for the Axial basis.
  double radial_norm(Basis b, int m) const;
  // Multiplicity times period for column n: 2L for n = 0 and Nyquist, 4L otherwise.
  double z_norm(int n) const;

  void forward(const double* values, Basis b, cplx* coeffs) const;
  void inverse(const cplx* coeffs, Basis b, double* values) const;

 private:
  explicit SpectralPlan(const GridPtr& grid);
  struct Impl;
  GridPtr grid_;
  int nr_, nz_, nzh_;
  std::vector<double> rho_, zeta_, norm_sv_, norm_ax_;
  std::unique_ptr<Impl> impl_;
};

class SpectralField {
 public:
  SpectralField() = default;
  SpectralField(GridPtr grid, Basis basis);

  const GridPtr& grid() const { return grid_; }
  Basis basis() const { return basis_; }
  const SpectralPlan& plan() const { return *plan_; }
  std::vector<cplx>& coeffs() { return c_; }
  const std::vector<cplx>& coeffs() const { return c_; }
  cplx& at(int m, int n) { return c_[static_cast<std::size_t>(m) * plan_->nzh() + n]; }
  cplx at(int m, int n) const { return c_[static_cast<std::size_t>(m) * plan_->nzh() + n]; }

  // Value of the continuous 5D Fourier transform at (rho_m, zeta_n) implied by
  // the series coefficient (Scalar basis only).
  cplx fourier_value(int m, int n) const;

  // Multiplies every coefficient by sym(|xi|).
  void apply(const std::function<double(double)>& sym);

 private:
  GridPtr grid_;
  std::shared_ptr<const SpectralPlan> plan_;
  Basis basis_ = Basis::Scalar;
  std::vector<cplx> c_;
};

SpectralField forward_transform(const ScalarFieldRZ& f, Basis basis = Basis::Scalar);
ScalarFieldRZ inverse_transform(const SpectralField& F, Role role = Role::Generic);
// int |f|^2 r^3 dr dz from the coefficients (Scalar and Vector bases).
double spectral_mass(const SpectralField& F);

// A contiguous block of dyadic levels (the singular range).
struct LevelRange {
  int lo = 0, hi = -1;
  bool contains(int k) const { return k >= lo && k <= hi; }
  int count() const { return hi >= lo ? hi - lo + 1 : 0; }
};

ScalarFieldRZ shell_project(const ScalarFieldRZ& f, int k, const DyadicPartition& p);
VectorFieldRZ shell_project(const VectorFieldRZ& v, int k, const DyadicPartition& p);
// Sum of shells l < k with l in `range`.
ScalarFieldRZ low_pass(const ScalarFieldRZ& f, int k, const DyadicPartition& p, const LevelRange& range);
VectorFieldRZ low_pass(const VectorFieldRZ& v, int k, const DyadicPartition& p, const LevelRange& range);
// Sum of shells lo..hi clipped to the partition.
ScalarFieldRZ band_project(const ScalarFieldRZ& f, int lo, int hi, const DyadicPartition& p);

struct DyadicDecomposition {
  DyadicPartition partition;
  std::map<int, ScalarFieldRZ> shells;
};

DyadicDecomposition decompose(const ScalarFieldRZ& f, const DyadicPartition& p);
// ||Delta_k f||^2 in L^2(mu5) for every k of the partition, from one transform.
std::map<int, double> shell_masses(const ScalarFieldRZ& f, const DyadicPartition& p);

VectorFieldRZ gradient5(const ScalarFieldRZ& f);
// int |grad f|^2 r^3 dr dz evaluated on the coefficients.
double gradient_mass(const ScalarFieldRZ& f);
ScalarFieldRZ laplacian5(const ScalarFieldRZ& f);
// d_r v + (3/r) v + d_z w for a lifted vector field (v radial, w vertical).
ScalarFieldRZ divergence5(const VectorFieldRZ& v);

// Sum of 2^{2k} ||Delta_k f||^2 over the decomposition, or only over `range`.
double square_function_sum(const DyadicDecomposition& dec);
double square_function_sum(const DyadicDecomposition& dec, const LevelRange& range);

// ||Delta_k (U_j Gt_j)||_{L^2(mu5)}.
double frequency_overlap_check(const VectorFieldRZ& u_j, const ScalarFieldRZ& g_j, int k, const DyadicPartition& p);

}  // namespace lift5
