#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "gpwave/dynamics.hpp"
#include "json.hpp"

using namespace gpwave;
using std::numbers::pi;
using std::numbers::sqrt2;

namespace {

Field gaussian_psi(const GridPtr& g, double eps, double amp, double sigma,
                   double phase_amp = 0.0) {
  ArrayXd r2 = ArrayXd::Zero(g->size());
  for (int d = 0; d < g->dim(); ++d) r2 += g->x(d).square();
  ArrayXd a0 = amp * (-r2 / (2 * sigma * sigma)).exp();
  ArrayXd phi0 = phase_amp * (-r2 / (2 * sigma * sigma)).exp();
  return Field::from_values(g, (1.0 + eps / sqrt2 * a0).sqrt().cast<cplx>() *
                                   (cplx(0, 1) * phi0.cast<cplx>()).exp());
}

double max_diff(const Field& a, const Field& b) {
  return (a.values() - b.values()).abs().maxCoeff();
}

// Centroid of the density dip 1 - |psi|^2 over |x - center| < half.
double dip_centroid(const Field& psi, double center, double half) {
  const ArrayXd& x = psi.grid().x(0);
  const ArrayXd w = 1.0 - psi.values().abs2();
  double m = 0, mx = 0;
  for (Index i = 0; i < x.size(); ++i)
    if (std::abs(x[i] - center) < half) {
      m += w[i];
      mx += w[i] * x[i];
    }
  return mx / m;
}

double h1_distance(const HydroState& p, const HydroState& q) {
  auto h1 = [](const Field& f) {
    return (f.grid().cell_volume() * ((1.0 + f.grid().xi2()) * f.coefficients().abs2()).sum());
  };
  double num = h1(p.a - q.a), den = h1(q.a);
  for (int d = 0; d < p.u.dim(); ++d) {
    num += h1(p.u[d] - q.u[d]);
    den += h1(q.u[d]);
  }
  return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("strang step keeps the constant state fixed") {
  GridPtr g = make_grid(2, 32, 10.0);
  Field one = Field::from_real(g, ArrayXd::Ones(g->size()));
  Field next = strang_step(one, 0.3, 0.01);
  CHECK(max_diff(next, one) < 1e-15);
}

TEST_CASE("nonlinear substep preserves the modulus") {
  GridPtr g = make_grid(1, 128, 20.0);
  Field psi = gaussian_psi(g, 0.3, 2.0, 1.0, 0.7);
  Field out = nonlinear_substep(psi, 0.3, 0.37);
  CHECK((out.values().abs() - psi.values().abs()).abs().maxCoeff() < 1e-15);
}

TEST_CASE("strang step is second order and time reversible") {
  GridPtr g = make_grid(1, 256, 20.0);
  const double eps = 0.3, T = 0.5;
  Field psi0 = gaussian_psi(g, eps, 1.0, 1.0);
  auto run = [&](double dt) {
    Field p = psi0;
    StrangStepper s(g, eps, dt);
    const int n = static_cast<int>(std::lround(T / dt));
    for (int i = 0; i < n; ++i) s.step(p);
    return p;
  };
  const double dt = 0.01;
  Field ref = run(dt / 8);
  const double e1 = l2_norm(run(dt) - ref), e2 = l2_norm(run(dt / 2) - ref);
  // against a dt/8 reference the dt/2 error carries a (1 - 1/16)/(1 - 1/64) bias
  const double ratio = e1 / e2 * (1 - 1.0 / 16) / (1 - 1.0 / 64);
  CHECK(ratio == doctest::Approx(4.0).epsilon(0.05));

  Field there = strang_step(psi0, eps, 0.02);
  Field back = strang_step(there, eps, -0.02);
  CHECK(max_diff(back, psi0) < 1e-11);
}

TEST_CASE("dark soliton profile and residual") {
  GridPtr g = make_grid(1, 512, 64.0);
  DarkSoliton black = dark_soliton(g, 0.0);
  CHECK(black.psi.values().imag().abs().maxCoeff() < 1e-15);
  MinModulus m = min_modulus(black.psi);
  CHECK(m.value < 1e-15);
  CHECK(std::abs(black.psi.values()[g->size() / 2]) < 1e-15);

  GridPtr wide = make_grid(1, 1024, 160.0);
  for (double c : {0.0, 0.5, 1.2}) {
    DarkSoliton s = dark_soliton(wide, c);
    // far field |psi|^2 = (2 - c^2)/2 + c^2/2 = 1, up to the mirror-kink tail
    const double kappa = std::sqrt(2 - c * c) / 2;
    const Index quarter = wide->size() / 4 * 3;
    CHECK(std::abs(s.psi.values().abs2()[quarter] - 1.0) < 8 * std::exp(-kappa * 80.0));
    CHECK(s.residual < 1e-8);
  }
  CHECK_THROWS_AS(dark_soliton(g, 1.5), Error);
  try {
    dark_soliton(g, sqrt2);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoTravellingWave);
  }

  // semiclassical scaling at c_eps = sqrt(2 - eps^2)
  const double eps = 0.4;
  GridPtr gs = make_grid(1, 1024, 128.0);
  DarkSoliton se = dark_soliton(gs, std::sqrt(2 - eps * eps), eps);
  CHECK(se.residual < 1e-8);
  // the wrong speed leaves a residual of order one
  CHECK(travelling_wave_residual(se.psi, 0.5, eps) > 1e-3);
}

TEST_CASE("one strang step moves the soliton by c dt") {
  GridPtr g = make_grid(1, 512, 64.0);
  const double c = 0.5, dt = 0.05;
  DarkSoliton s = dark_soliton(g, c);
  Field next = strang_step(s.psi, 1.0, dt);
  const double shift = dip_centroid(next, 0.0, 12.0) - dip_centroid(s.psi, 0.0, 12.0);
  CHECK(std::abs(shift - c * dt) < 1e-4 * dt);
}

TEST_CASE("evolve_gp transports the semiclassical soliton at c_eps") {
  const double eps = 0.4, c = std::sqrt(2 - eps * eps), T = 4.0;
  GridPtr g = make_grid(1, 1024, 128.0);
  DarkSoliton s = dark_soliton(g, c, eps);
  SolverConfig cfg;
  cfg.dt = 0.005;
  cfg.t_max = T;
  cfg.log_every = 200;
  GpTrajectory traj = evolve_gp(s.psi, eps, cfg);
  const double x0 = dip_centroid(traj.snapshots.front(), 0.0, 12.0);
  const double x1 = dip_centroid(traj.final_state(), c * T, 12.0);
  CHECK(std::abs((x1 - x0) / T - c) < 1e-3 * c);
}

TEST_CASE("gl_energy oracles") {
  GridPtr g = make_grid(2, 32, 6.0);
  CHECK(gl_energy(Field::from_real(g, ArrayXd::Ones(g->size())), 0.4) == 0.0);

  const double k0 = 2 * pi / 6.0 * 2, k1 = 2 * pi / 6.0 * -3;
  Field pw = Field::from_values(
      g, (cplx(0, 1) * (k0 * g->x(0) + k1 * g->x(1)).cast<cplx>()).exp());
  CHECK(gl_energy(pw, 0.4) ==
        doctest::Approx(0.5 * (k0 * k0 + k1 * k1) * 36.0).epsilon(1e-12));

  // Band-limited psi, energy by direct trigonometric sums on a 4x grid.
  GridPtr h = make_grid(1, 16, 5.0);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> nd;
  std::vector<std::pair<int, cplx>> modes;
  ArrayXcd c = ArrayXcd::Zero(16);
  for (int k = -3; k <= 3; ++k) {
    cplx a = 0.1 * cplx(nd(rng), nd(rng)) + (k == 0 ? 1.0 : 0.0);
    modes.push_back({k, a});
    c[(k + 16) % 16] = a * 4.0;  // unitary: coefficient = sqrt(N) * amplitude
  }
  Field psi = Field::from_coefficients(h, c);
  const double eps = 0.7, L = 5.0;
  const int M = 64;
  double e = 0;
  for (int j = 0; j < M; ++j) {
    const double x = -L / 2 + j * L / M;
    cplx v = 0, dv = 0;
    for (auto [k, a] : modes) {
      const double xi = 2 * pi * k / L;
      v += a * std::polar(1.0, xi * x);
      dv += cplx(0, xi) * a * std::polar(1.0, xi * x);
    }
    e += (0.5 * std::norm(dv) + std::pow(1 - std::norm(v), 2) / (4 * eps * eps)) * L / M;
  }
  CHECK(gl_energy(psi, eps) == doctest::Approx(e).epsilon(1e-10));
}

TEST_CASE("evolve_gp: constant data, conservation, mass") {
  GridPtr g = make_grid(1, 64, 10.0);
  SolverConfig cfg;
  cfg.dt = 0.01;
  cfg.t_max = 0.5;
  cfg.log_every = 10;
  GpTrajectory flat = evolve_gp(Field::from_real(g, ArrayXd::Ones(64)), 0.3, cfg);
  CHECK(flat.reason == StopReason::Completed);
  for (const StepLog& l : flat.logs) CHECK(l.energy == 0.0);
  CHECK(flat.times.size() == 6);

  GridPtr big = make_grid(1, 1024, 128.0);
  const double eps = 0.3;
  Field psi0 = gaussian_psi(big, eps, 1.0, 8.0);
  SolverConfig run;
  run.dt = 1e-3;
  run.t_max = 10.0;
  run.log_every = 1000;
  GpTrajectory traj = evolve_gp(psi0, eps, run);
  CHECK(traj.steps == 10000);
  const double e0 = traj.logs.front().energy, m0 = traj.logs.front().mass;
  for (const StepLog& l : traj.logs) {
    CHECK(std::abs(l.energy - e0) / e0 < 1e-8);
    CHECK(std::abs(l.mass - m0) < 1e-9);
  }
}

TEST_CASE("evolve_gp stops when a vortex forms") {
  // A phase jump of ~pi across a density dip collapses to a black soliton.
  GridPtr g = make_grid(1, 512, 64.0);
  const ArrayXd& x = g->x(0);
  ArrayXd rho2 = 1.0 - 0.85 / (x / 2).cosh().square();
  ArrayXd phase = 1.45 * x.tanh();
  Field psi0 = Field::from_values(
      g, rho2.sqrt().cast<cplx>() * (cplx(0, 1) * phase.cast<cplx>()).exp());
  SolverConfig cfg;
  cfg.dt = 0.005;
  cfg.t_max = 20.0;
  cfg.log_every = 20;
  GpTrajectory traj = evolve_gp(psi0, 1.0, cfg);
  CHECK(traj.reason == StopReason::Vortex);
  CHECK(traj.times.back() < cfg.t_max);
  CHECK(traj.logs.back().min_modulus < kVortexThreshold);
  CHECK(traj.logs.front().min_modulus > kVortexThreshold);
}

TEST_CASE("evolve_hydro zero state and admissibility") {
  GridPtr g = make_grid(2, 32, 10.0);
  HydroState zero{Field(g), VectorField(g), 0.3};
  SolverConfig cfg;
  cfg.t_max = 0.1;
  HydroTrajectory traj = evolve_hydro(zero, cfg);
  CHECK(sup_norm(traj.final_state().a) == 0.0);
  CHECK(sup_norm(traj.final_state().u) == 0.0);

  HydroState bad{Field::from_real(g, ArrayXd::Constant(g->size(), -5.0)),
                 VectorField(g), 0.3};
  CHECK_THROWS_AS(evolve_hydro(bad, cfg), Error);
}

TEST_CASE("hydro engine agrees with GP through Madelung") {
  GridPtr g = make_grid(1, 256, 20.0);
  const double eps = 0.3;
  Field psi0 = gaussian_psi(g, eps, 1.0, 1.0, 0.5);
  SolverConfig cfg;
  cfg.t_max = 0.5;
  cfg.log_every = 1000000;
  HydroTrajectory h = evolve_hydro(to_hydro(psi0, eps), cfg);
  cfg.dt = h.dt / 4;
  GpTrajectory p = evolve_gp(psi0, eps, cfg);
  CHECK(h1_distance(to_hydro(p.final_state(), eps), h.final_state()) < 1e-3);
}

TEST_CASE("hydro engine keeps the velocity a gradient") {
  GridPtr g = make_grid(2, 128, 24.0);
  const double eps = 0.3;
  Field psi0 = gaussian_psi(g, eps, 1.0, 1.5, 0.4);
  SolverConfig cfg;
  cfg.t_max = 0.3;
  HydroTrajectory h = evolve_hydro(to_hydro(psi0, eps), cfg);
  CHECK(rotational_residual(h.final_state().u) < 1e-8 * l2_norm(h.final_state().u));
  const double e0 = h.logs.front().energy, e1 = h.logs.back().energy;
  CHECK(std::abs(e1 - e0) / e0 < 1e-4);
  CHECK(e0 == doctest::Approx(gl_energy(psi0, eps)).epsilon(1e-10));
}

TEST_CASE("trajectory sidecar") {
  GridPtr g = make_grid(1, 32, 10.0);
  SolverConfig cfg;
  cfg.dt = 0.05;
  cfg.t_max = 0.2;
  cfg.log_every = 2;
  GpTrajectory traj = evolve_gp(gaussian_psi(g, 0.5, 0.5, 1.0), 0.5, cfg);
  const std::string dir = "test_dynamics_out";
  write_trajectory(dir, "run", traj);
  std::ifstream in(dir + "/run.json");
  nlohmann::json j = nlohmann::json::parse(in);
  CHECK(j["times"].size() == 3);
  CHECK(j["logs"].size() == 3);
  Snapshot s = read_snapshot(dir + "/" + j["snapshots"][2].get<std::string>());
  CHECK(s.time == doctest::Approx(0.2));
  CHECK((s.field.values() - traj.final_state().values()).abs().maxCoeff() == 0.0);
  std::filesystem::remove_all(dir);
}
