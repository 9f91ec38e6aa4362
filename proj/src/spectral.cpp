#include "lift5/spectral.hpp"

#include <fftw3.h>

#include <Eigen/Dense>
#include <boost/math/special_functions/bessel.hpp>
#include <cmath>
#include <mutex>

#include "lift5/error.hpp"
#include "lift5/parallel.hpp"
#include "lift5/sum.hpp"

namespace lift5 {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::mutex& fftw_mutex() {
  static std::mutex mu;
  return mu;
}

}  // namespace

struct SpectralPlan::Impl {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
  Eigen::MatrixXd eval[3];
  Eigen::MatrixXd inv[3];
};

SpectralPlan::SpectralPlan(const GridPtr& grid)
    : grid_(grid), nr_(grid->nr()), nz_(grid->nz()), nzh_(grid->nz() / 2 + 1), impl_(std::make_unique<Impl>()) {
  const auto& g = *grid;
  const auto& zeros = g.bessel_zeros();
  const double R = g.r_max();
  rho_.resize(nr_);
  norm_sv_.resize(nr_);
  norm_ax_.resize(nr_);
  for (int m = 0; m < nr_; ++m) {
    rho_[m] = zeros[m] / R;
    const double j2 = boost::math::cyl_bessel_j(2, zeros[m]);
    const double j0 = boost::math::cyl_bessel_j(0, zeros[m]);
    norm_sv_[m] = 0.5 * R * R * j2 * j2;
    norm_ax_[m] = 0.5 * R * R * j0 * j0;
  }
  zeta_.resize(nzh_);
  for (int n = 0; n < nzh_; ++n) zeta_[n] = M_PI * n / g.z_half();

  Eigen::MatrixXd J[3];
  for (auto& M : J) M.resize(nr_, nr_);
  for (int i = 0; i < nr_; ++i)
    for (int m = 0; m < nr_; ++m) {
      const double x = rho_[m] * g.r(i);
      J[0](i, m) = boost::math::cyl_bessel_j(1, x);
      J[1](i, m) = boost::math::cyl_bessel_j(2, x);
      J[2](i, m) = boost::math::cyl_bessel_j(0, x);
    }
  for (int b = 0; b < 3; ++b) {
    impl_->eval[b] = J[b];
    if (b < 2)
      for (int i = 0; i < nr_; ++i) impl_->eval[b].row(i) /= g.r(i);
  }
  impl_->inv[0] = impl_->eval[0].partialPivLu().inverse();
  impl_->inv[1] = impl_->eval[1].partialPivLu().inverse();
  impl_->inv[2] = impl_->eval[2].partialPivLu().inverse();

  std::lock_guard<std::mutex> lock(fftw_mutex());
  std::vector<double> rbuf(g.size());
  std::vector<fftw_complex> cbuf(coeff_size());
  int n = nz_;
  impl_->r2c = fftw_plan_many_dft_r2c(1, &n, nr_, rbuf.data(), nullptr, 1, nz_, cbuf.data(), nullptr, 1, nzh_,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
  impl_->c2r = fftw_plan_many_dft_c2r(1, &n, nr_, cbuf.data(), nullptr, 1, nzh_, rbuf.data(), nullptr, 1, nz_,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
  require(impl_->r2c && impl_->c2r, ErrorKind::Numeric, "FFTW plan creation failed");
}

SpectralPlan::~SpectralPlan() {
  std::lock_guard<std::mutex> lock(fftw_mutex());
  if (impl_->r2c) fftw_destroy_plan(impl_->r2c);
  if (impl_->c2r) fftw_destroy_plan(impl_->c2r);
}

std::shared_ptr<const SpectralPlan> SpectralPlan::for_grid(const GridPtr& grid) {
  require(grid != nullptr, ErrorKind::UnsupportedGrid, "no grid");
  static std::mutex mu;
  static std::vector<std::pair<std::weak_ptr<const HalfPlaneGrid>, std::shared_ptr<const SpectralPlan>>> cache;
  std::lock_guard<std::mutex> lock(mu);
  for (auto it = cache.begin(); it != cache.end();) {
    auto g = it->first.lock();
    if (!g) {
      it = cache.erase(it);
      continue;
    }
    if (g.get() == grid.get()) return it->second;
    ++it;
  }
  std::shared_ptr<const SpectralPlan> plan(new SpectralPlan(grid));
  cache.emplace_back(grid, plan);
  return plan;
}

double SpectralPlan::radial_norm(Basis b, int m) const { return b == Basis::Axial ? norm_ax_[m] : norm_sv_[m]; }

double SpectralPlan::z_norm(int n) const {
  const double period = 2.0 * grid_->z_half();
  return (n == 0 || n == nz_ / 2) ? period : 2.0 * period;
}

void SpectralPlan::forward(const double* values, Basis b, cplx* coeffs) const {
  std::vector<cplx> F(coeff_size());
  fftw_execute_dft_r2c(impl_->r2c, const_cast<double*>(values), reinterpret_cast<fftw_complex*>(F.data()));
  Eigen::Map<const RowMat> Fm(reinterpret_cast<const double*>(F.data()), nr_, 2 * nzh_);
  Eigen::Map<RowMat> Cm(reinterpret_cast<double*>(coeffs), nr_, 2 * nzh_);
  Cm.noalias() = impl_->inv[static_cast<int>(b)] * Fm;
  Cm *= 1.0 / nz_;
}

void SpectralPlan::inverse(const cplx* coeffs, Basis b, double* values) const {
  std::vector<cplx> F(coeff_size());
  Eigen::Map<const RowMat> Cm(reinterpret_cast<const double*>(coeffs), nr_, 2 * nzh_);
  Eigen::Map<RowMat> Fm(reinterpret_cast<double*>(F.data()), nr_, 2 * nzh_);
  Fm.noalias() = impl_->eval[static_cast<int>(b)] * Cm;
  fftw_execute_dft_c2r(impl_->c2r, reinterpret_cast<fftw_complex*>(F.data()), values);
}

SpectralField::SpectralField(GridPtr grid, Basis basis)
    : grid_(std::move(grid)), plan_(SpectralPlan::for_grid(grid_)), basis_(basis), c_(plan_->coeff_size()) {}

cplx SpectralField::fourier_value(int m, int n) const {
  require(basis_ == Basis::Scalar, ErrorKind::InvalidArgument, "fourier_value needs the scalar basis");
  const double two_pi_sq = 4.0 * M_PI * M_PI;
  const double sign = (n % 2 == 0) ? 1.0 : -1.0;
  return at(m, n) * (two_pi_sq * plan_->radial_norm(basis_, m) / plan_->rho(m) * 2.0 * grid_->z_half() * sign);
}

void SpectralField::apply(const std::function<double(double)>& sym) {
  const auto& P = *plan_;
  for (int m = 0; m < P.nr(); ++m)
    for (int n = 0; n < P.nzh(); ++n) at(m, n) *= sym(P.xi(m, n));
}

SpectralField forward_transform(const ScalarFieldRZ& f, Basis basis) {
  require(f.grid() != nullptr, ErrorKind::UnsupportedGrid, "field without grid");
  SpectralField F(f.grid(), basis);
  F.plan().forward(f.data(), basis, F.coeffs().data());
  return F;
}

ScalarFieldRZ inverse_transform(const SpectralField& F, Role role) {
  ScalarFieldRZ f(F.grid(), role);
  F.plan().inverse(F.coeffs().data(), F.basis(), f.data());
  return f;
}

double spectral_mass(const SpectralField& F) {
  require(F.basis() != Basis::Axial, ErrorKind::InvalidArgument, "axial basis carries a 3D norm");
  const auto& P = F.plan();
  CompensatedSum s;
  for (int m = 0; m < P.nr(); ++m) {
    CompensatedSum row;
    for (int n = 0; n < P.nzh(); ++n) row.add(std::norm(F.at(m, n)) * P.z_norm(n));
    s.add(row.value() * P.radial_norm(F.basis(), m));
  }
  return s.value();
}

namespace {

void check_level(const DyadicPartition& p, int k) {
  require(p.contains(k), ErrorKind::Range, "dyadic level " + std::to_string(k) + " outside the partition range");
}

ScalarFieldRZ project_with(const ScalarFieldRZ& f, Basis b, const std::function<double(double)>& sym) {
  SpectralField F = forward_transform(f, b);
  F.apply(sym);
  return inverse_transform(F, Role::Shell);
}

std::function<double(double)> low_symbol(int k, const DyadicPartition& p, const LevelRange& range) {
  return [k, p, range](double xi) {
    double s = 0.0;
    for (int l = std::max(range.lo, p.k_min()); l < k && l <= range.hi && l <= p.k_max(); ++l) s += p.psi(l, xi);
    return s;
  };
}

}  // namespace

ScalarFieldRZ shell_project(const ScalarFieldRZ& f, int k, const DyadicPartition& p) {
  check_level(p, k);
  return project_with(f, Basis::Scalar, [&](double xi) { return p.psi(k, xi); });
}

VectorFieldRZ shell_project(const VectorFieldRZ& v, int k, const DyadicPartition& p) {
  check_level(p, k);
  auto sym = [&](double xi) { return p.psi(k, xi); };
  return {project_with(v.radial, Basis::Vector, sym), project_with(v.axial, Basis::Scalar, sym)};
}

ScalarFieldRZ low_pass(const ScalarFieldRZ& f, int k, const DyadicPartition& p, const LevelRange& range) {
  check_level(p, k);
  return project_with(f, Basis::Scalar, low_symbol(k, p, range));
}

VectorFieldRZ low_pass(const VectorFieldRZ& v, int k, const DyadicPartition& p, const LevelRange& range) {
  check_level(p, k);
  auto sym = low_symbol(k, p, range);
  return {project_with(v.radial, Basis::Vector, sym), project_with(v.axial, Basis::Scalar, sym)};
}

ScalarFieldRZ band_project(const ScalarFieldRZ& f, int lo, int hi, const DyadicPartition& p) {
  lo = std::max(lo, p.k_min());
  hi = std::min(hi, p.k_max());
  return project_with(f, Basis::Scalar, [&](double xi) {
    double s = 0.0;
    for (int l = lo; l <= hi; ++l) s += p.psi(l, xi);
    return s;
  });
}

DyadicDecomposition decompose(const ScalarFieldRZ& f, const DyadicPartition& p) {
  DyadicDecomposition dec;
  dec.partition = p;
  const SpectralField F = forward_transform(f, Basis::Scalar);
  std::vector<ScalarFieldRZ> out(p.count());
  parallel_for(p.count(), [&](int idx) {
    const int k = p.k_min() + idx;
    SpectralField S = F;
    S.apply([&](double xi) { return p.psi(k, xi); });
    out[idx] = inverse_transform(S, Role::Shell);
  });
  for (int idx = 0; idx < p.count(); ++idx) dec.shells.emplace(p.k_min() + idx, std::move(out[idx]));
  return dec;
}

std::map<int, double> shell_masses(const ScalarFieldRZ& f, const DyadicPartition& p) {
  const SpectralField F = forward_transform(f, Basis::Scalar);
  const auto& P = F.plan();
  std::map<int, double> out;
  for (int k = p.k_min(); k <= p.k_max(); ++k) {
    CompensatedSum s;
    for (int m = 0; m < P.nr(); ++m)
      for (int n = 0; n < P.nzh(); ++n) {
        const double w = p.psi(k, P.xi(m, n));
        if (w != 0.0) s.add(w * w * std::norm(F.at(m, n)) * P.z_norm(n) * P.radial_norm(Basis::Scalar, m));
      }
    out[k] = s.value();
  }
  return out;
}

VectorFieldRZ gradient5(const ScalarFieldRZ& f) {
  const SpectralField F = forward_transform(f, Basis::Scalar);
  const auto& P = F.plan();
  SpectralField Dr(f.grid(), Basis::Vector), Dz(f.grid(), Basis::Scalar);
  for (int m = 0; m < P.nr(); ++m)
    for (int n = 0; n < P.nzh(); ++n) {
      Dr.at(m, n) = -P.rho(m) * F.at(m, n);
      Dz.at(m, n) = cplx(0.0, P.zeta_deriv(n)) * F.at(m, n);
    }
  return {inverse_transform(Dr), inverse_transform(Dz)};
}

double gradient_mass(const ScalarFieldRZ& f) {
  const SpectralField F = forward_transform(f, Basis::Scalar);
  const auto& P = F.plan();
  CompensatedSum s;
  for (int m = 0; m < P.nr(); ++m)
    for (int n = 0; n < P.nzh(); ++n) {
      const double k2 = P.rho(m) * P.rho(m) + P.zeta_deriv(n) * P.zeta_deriv(n);
      s.add(k2 * std::norm(F.at(m, n)) * P.z_norm(n) * P.radial_norm(Basis::Scalar, m));
    }
  return s.value();
}

ScalarFieldRZ laplacian5(const ScalarFieldRZ& f) {
  SpectralField F = forward_transform(f, Basis::Scalar);
  F.apply([](double xi) { return -xi * xi; });
  return inverse_transform(F);
}

ScalarFieldRZ divergence5(const VectorFieldRZ& v) {
  const SpectralField A = forward_transform(v.radial, Basis::Vector);
  const SpectralField B = forward_transform(v.axial, Basis::Scalar);
  const auto& P = A.plan();
  SpectralField D(v.radial.grid(), Basis::Scalar);
  for (int m = 0; m < P.nr(); ++m)
    for (int n = 0; n < P.nzh(); ++n) D.at(m, n) = P.rho(m) * A.at(m, n) + cplx(0.0, P.zeta_deriv(n)) * B.at(m, n);
  return inverse_transform(D);
}

double square_function_sum(const DyadicDecomposition& dec) {
  CompensatedSum s;
  for (const auto& [k, f] : dec.shells) s.add(std::ldexp(mass_mu5(f), 2 * k));
  return s.value();
}

double square_function_sum(const DyadicDecomposition& dec, const LevelRange& range) {
  CompensatedSum s;
  for (const auto& [k, f] : dec.shells)
    if (range.contains(k)) s.add(std::ldexp(mass_mu5(f), 2 * k));
  return s.value();
}

double frequency_overlap_check(const VectorFieldRZ& u_j, const ScalarFieldRZ& g_j, int k, const DyadicPartition& p) {
  const VectorFieldRZ prod = scale(u_j, g_j);
  return std::sqrt(mass_mu5(shell_project(prod, k, p)));
}

}  // namespace lift5
