#include "gpwave/madelung.hpp"

#include <cmath>
#include <numbers>

namespace gpwave {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

void require_nonvanishing(const Field& psi) {
  MinModulus m = min_modulus(psi);
  if (m.value < kVortexThreshold) throw VortexEncountered(m.value, m.node);
}

// Least-squares potential: phi minimizing ||grad phi - v||, zero mean, plus
// the best lattice plane wave for the mean of v.
struct PotentialFit {
  Field phi;
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  double residual = 0.0;
};

PotentialFit fit_potential(const VectorField& v) {
  const TorusGrid& g = v.grid();
  const int dim = g.dim();
  ArrayXcd phi_hat = ArrayXcd::Zero(g.size());
  for (int d = 0; d < dim; ++d)
    phi_hat -= cplx(0, 1) * g.xi(d) * v[d].coefficients();
  ArrayXd inv = (g.xi2() > 0).select(g.xi2().inverse(), 0.0);
  phi_hat *= inv;

  PotentialFit fit;
  const double dk = g.frequency_step();
  for (int d = 0; d < dim; ++d) {
    const double m = (v[d].values().real().mean());
    fit.mean[d] = dk * std::round(m / dk);
  }
  double r2 = 0.0;
  for (int d = 0; d < dim; ++d) {
    ArrayXcd grad = cplx(0, 1) * g.xi(d) * phi_hat;
    ArrayXcd rest = v[d].coefficients() - grad;
    rest[0] -= fit.mean[d] * std::sqrt(double(g.size()));
    r2 += rest.abs2().sum();
  }
  fit.residual = std::sqrt(g.cell_volume() * r2);
  fit.phi = Field::from_coefficients(v.grid_ptr(), std::move(phi_hat));
  return fit;
}

Field assemble(const GridPtr& grid, const ArrayXd& rho2,
               const VectorField& velocity) {
  if ((rho2 <= 0).any())
    throw Error(ErrorCode::NotAdmissible, "density weight is not positive");
  // velocity = 2 grad(phase)
  const VectorField half = 0.5 * velocity;
  PotentialFit fit = fit_potential(half);
  if (fit.residual > kPotentialTolerance * std::max(l2_norm(half), 1.0))
    throw Error(ErrorCode::NotPotential,
                "velocity is not a lattice-compatible gradient (residual " +
                    std::to_string(fit.residual) + ")");
  ArrayXd phase = fit.phi.values().real();
  for (int d = 0; d < grid->dim(); ++d)
    phase += fit.mean[d] * grid->x(d);
  ArrayXcd psi = rho2.sqrt() * (cplx(0, 1) * phase.cast<cplx>()).exp();
  return Field::from_values(grid, std::move(psi));
}

}  // namespace

ArrayXd HydroState::density() const {
  return 1.0 + (eps / kSqrt2) * a.values().real();
}

bool HydroState::admissible() const { return (density() > 0).all(); }

ArrayXd AugmentedState::weight() const {
  const ArrayXd bb = b.values().real();
  if (norm == BNorm::Dynaslow) return 1.0 + (eps / kSqrt2) * bb;
  return 1.0 + 0.5 * eps * eps * bb;
}

MinModulus min_modulus(const Field& psi) {
  const ArrayXd m = psi.values().abs();
  MinModulus out;
  out.value = m.minCoeff(&out.index);
  out.node = psi.grid().unravel(out.index);
  return out;
}

HydroState to_hydro(const Field& psi, double eps) {
  require_nonvanishing(psi);
  const GridPtr& grid = psi.grid_ptr();
  HydroState s;
  s.eps = eps;
  const ArrayXcd& v = psi.values();
  s.a = Field::from_real(grid, (kSqrt2 / eps) * (v.abs2() - 1.0));
  std::vector<Field> u;
  for (int d = 0; d < grid->dim(); ++d) {
    const Field dpsi = partial(psi, d);
    u.push_back(Field::from_real(grid, 2.0 * (dpsi.values() / v).imag()));
  }
  s.u = VectorField(std::move(u));
  return s;
}

AugmentedState to_augmented(const Field& psi, double eps, BNorm norm) {
  require_nonvanishing(psi);
  const GridPtr& grid = psi.grid_ptr();
  AugmentedState s;
  s.eps = eps;
  s.norm = norm;
  const ArrayXcd& v = psi.values();
  const ArrayXd excess = v.abs2() - 1.0;
  s.b = Field::from_real(grid, norm == BNorm::Dynaslow
                                   ? ArrayXd((kSqrt2 / eps) * excess)
                                   : ArrayXd((2.0 / (eps * eps)) * excess));
  std::vector<Field> z;
  for (int d = 0; d < grid->dim(); ++d) {
    const Field dpsi = partial(psi, d);
    z.push_back(Field::from_values(grid, cplx(0, -2) * dpsi.values() / v));
  }
  s.z = VectorField(std::move(z));
  return s;
}

Field from_hydro(const HydroState& state) {
  return assemble(state.a.grid_ptr(), state.density(), state.u);
}

Field from_augmented(const AugmentedState& state) {
  std::vector<Field> re;
  for (int d = 0; d < state.z.dim(); ++d) re.push_back(real_part(state.z[d]));
  return assemble(state.b.grid_ptr(), state.weight(),
                  VectorField(std::move(re)));
}

double pota_residual(const AugmentedState& state) {
  const GridPtr& grid = state.b.grid_ptr();
  const Field w = Field::from_real(grid, state.weight());
  double num = 0.0, den = 0.0, alt = 0.0;
  for (int d = 0; d < grid->dim(); ++d) {
    const ArrayXd dw = partial(w, d).values().real();
    const ArrayXd wimz = w.values().real() * state.z[d].values().imag();
    num += (dw + wimz).square().sum();
    den += dw.square().sum();
    alt += wimz.square().sum();
  }
  if (den == 0.0) den = alt;
  if (den == 0.0) return num == 0.0 ? 0.0 : 1.0;
  return std::sqrt(num / den);
}

double augmented_energy(const AugmentedState& state) {
  const TorusGrid& g = state.b.grid();
  const ArrayXd w = state.weight();
  double zw = 0.0;
  for (int d = 0; d < state.z.dim(); ++d)
    zw += (w * state.z[d].values().abs2()).sum();
  double bb = state.b.values().real().square().sum();
  if (state.norm == BNorm::Parabolic) bb *= 0.5 * state.eps * state.eps;
  return 0.125 * g.cell_volume() * (bb + zw);
}

double rotational_residual(const VectorField& v) {
  return fit_potential(v).residual;
}

}  // namespace gpwave
