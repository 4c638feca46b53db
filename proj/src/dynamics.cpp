#include "gpwave/dynamics.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "json.hpp"

namespace gpwave {

int step_count(double t_max, double dt) {
  if (!(dt > 0.0) || !(t_max > 0.0))
    throw Error(ErrorCode::InvalidArgument, "dt and t_max must be positive");
  return std::max(1, static_cast<int>(std::ceil(t_max / dt - 1e-9)));
}

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

StepLog gp_log(const Field& psi, double eps, int step, double t) {
  StepLog log;
  log.step = step;
  log.time = t;
  log.energy = gl_energy(psi, eps);
  log.min_modulus = psi.values().abs().minCoeff();
  log.mass = mass_excess(psi);
  return log;
}

// Hydro state held as Fourier coefficients during RK4.
struct Spectral {
  ArrayXcd a;
  std::vector<ArrayXcd> u;
};

Spectral to_spectral(const HydroState& s) {
  Spectral out{s.a.coefficients(), {}};
  for (int d = 0; d < s.u.dim(); ++d) out.u.push_back(s.u[d].coefficients());
  return out;
}

HydroState from_spectral(const GridPtr& g, const Spectral& s, double eps) {
  HydroState out;
  out.eps = eps;
  out.a = real_part(Field::from_coefficients(g, s.a));
  std::vector<Field> u;
  for (const auto& c : s.u) u.push_back(real_part(Field::from_coefficients(g, c)));
  out.u = VectorField(std::move(u));
  return out;
}

Spectral axpy(const Spectral& x, double h, const Spectral& k) {
  Spectral out{x.a + h * k.a, {}};
  for (std::size_t d = 0; d < x.u.size(); ++d) out.u.push_back(x.u[d] + h * k.u[d]);
  return out;
}

class HydroRhs {
 public:
  HydroRhs(const GridPtr& g, double eps, bool dealias)
      : g_(g), eps_(eps), mask_(dealias ? g->dealias_mask() : ArrayXd::Ones(g->size())) {}

  Spectral operator()(const Spectral& s) const {
    const TorusGrid& g = *g_;
    const int dim = g.dim();
    const Index n = g.size();
    const ArrayXd a = nodal(s.a);
    std::vector<ArrayXd> u;
    ArrayXd u2 = ArrayXd::Zero(n);
    for (int d = 0; d < dim; ++d) {
      u.push_back(nodal(s.u[d]));
      u2 += u[d].square();
    }
    const ArrayXd r = (kSqrt2 + eps_ * a).sqrt();
    const ArrayXd lap_r = nodal(ArrayXcd(-g.xi2() * spectral(r)));
    const ArrayXcd pressure = mask_ * spectral(ArrayXd(2.0 * lap_r / r));
    const ArrayXcd kinetic = mask_ * spectral(ArrayXd(0.5 * u2));

    Spectral out{ArrayXcd::Zero(n), {}};
    for (int d = 0; d < dim; ++d) {
      const ArrayXcd ixi = cplx(0, 1) * g.xi(d).cast<cplx>();
      const ArrayXcd flux = mask_ * spectral(ArrayXd(a * u[d]));
      out.a -= ixi * (kSqrt2 * s.u[d] + eps_ * flux);
      out.u.push_back(ixi * (-kSqrt2 * s.a + eps_ * (pressure - kinetic)));
    }
    return out;
  }

 private:
  ArrayXd nodal(const ArrayXcd& c) const {
    ArrayXcd v(c.size());
    g_->inverse(c.data(), v.data());
    return v.real();
  }
  ArrayXcd spectral(const ArrayXd& v) const {
    ArrayXcd in = v.cast<cplx>(), out(v.size());
    g_->forward(in.data(), out.data());
    return out;
  }

  GridPtr g_;
  double eps_;
  ArrayXd mask_;
};

}  // namespace

const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::Completed: return "completed";
    case StopReason::Vortex: return "vortex";
    case StopReason::DensityBand: return "density-band";
  }
  return "unknown";
}

double default_dt(const TorusGrid& grid, double eps) {
  const double h = grid.dx();
  return std::min(0.2 * h * h / eps, 0.1 * h / kSqrt2);
}

StrangStepper::StrangStepper(const GridPtr& grid, double eps, double dt)
    : eps_(eps), dt_(dt) {
  linear_ = (cplx(0, -eps * dt) * grid->xi2().cast<cplx>()).exp();
}

void StrangStepper::step(Field& psi) const {
  const double half = 0.5 * dt_ / eps_;
  auto nonlinear = [half](ArrayXcd& v) {
    v *= (cplx(0, -half) * (v.abs2() - 1.0).cast<cplx>()).exp();
  };
  nonlinear(psi.mutable_values());
  psi.mutable_coefficients() *= linear_;
  nonlinear(psi.mutable_values());
}

Field nonlinear_substep(Field psi, double eps, double tau) {
  ArrayXcd& v = psi.mutable_values();
  v *= (cplx(0, -tau / eps) * (v.abs2() - 1.0).cast<cplx>()).exp();
  return psi;
}

Field strang_step(Field psi, double eps, double dt) {
  StrangStepper(psi.grid_ptr(), eps, dt).step(psi);
  return psi;
}

GpTrajectory evolve_gp(const Field& psi0, double eps,
                       const SolverConfig& config) {
  if (!psi0.values().isFinite().all())
    throw Error(ErrorCode::NonFinite, "initial wavefunction is not finite");
  const double dt_req = config.dt > 0 ? config.dt : default_dt(psi0.grid(), eps);
  const int steps = step_count(config.t_max, dt_req);
  const double dt = config.t_max / steps;
  const int every = std::max(1, config.log_every);

  GpTrajectory traj;
  traj.dt = dt;
  auto record = [&](const Field& psi, int step) {
    const double t = step * dt;
    traj.times.push_back(t);
    traj.logs.push_back(gp_log(psi, eps, step, t));
    if (config.keep_snapshots || traj.snapshots.empty())
      traj.snapshots.push_back(psi);
    else
      traj.snapshots.back() = psi;
  };

  StrangStepper stepper(psi0.grid_ptr(), eps, dt);
  Field psi = psi0;
  record(psi, 0);
  for (int step = 1; step <= steps; ++step) {
    stepper.step(psi);
    const ArrayXcd& v = psi.values();
    if (!v.isFinite().all())
      throw Error(ErrorCode::NonFinite,
                  "non-finite wavefunction at step " + std::to_string(step));
    traj.steps = step;
    if (config.stop_on_vortex) {
      MinModulus m = min_modulus(psi);
      if (m.value < kVortexThreshold) {
        record(psi, step);
        traj.reason = StopReason::Vortex;
        traj.detail = VortexEncountered(m.value, m.node).what();
        return traj;
      }
    }
    if (step % every == 0 || step == steps) record(psi, step);
  }
  return traj;
}

HydroState hydro_rhs(const HydroState& state, bool dealias) {
  HydroRhs rhs(state.a.grid_ptr(), state.eps, dealias);
  return from_spectral(state.a.grid_ptr(), rhs(to_spectral(state)), state.eps);
}

HydroTrajectory evolve_hydro(const HydroState& state0,
                             const SolverConfig& config) {
  const GridPtr& g = state0.a.grid_ptr();
  const double eps = state0.eps;
  auto in_band = [](const ArrayXd& rho2) {
    return rho2.minCoeff() >= 0.25 && rho2.maxCoeff() <= 4.0;
  };
  if (!state0.admissible() || !in_band(state0.density()))
    throw Error(ErrorCode::NotAdmissible, "initial state outside the density band");
  if (!state0.potential)
    throw Error(ErrorCode::NotPotential, "initial velocity is not potential");

  const double dt_req = config.dt > 0 ? config.dt : default_dt(*g, eps);
  const int steps = step_count(config.t_max, dt_req);
  const double dt = config.t_max / steps;
  const int every = std::max(1, config.log_every);

  HydroTrajectory traj;
  traj.dt = dt;
  auto record = [&](const HydroState& s, int step) {
    StepLog log;
    log.step = step;
    log.time = step * dt;
    log.energy = hydro_energy(s);
    log.min_modulus = std::sqrt(std::max(0.0, s.density().minCoeff()));
    log.mass = eps / kSqrt2 * s.a.values().real().sum() * g->cell_volume();
    traj.times.push_back(log.time);
    traj.logs.push_back(log);
    if (config.keep_snapshots || traj.snapshots.empty())
      traj.snapshots.push_back(s);
    else
      traj.snapshots.back() = s;
  };

  HydroRhs rhs(g, eps, config.dealias);
  Spectral x = to_spectral(state0);
  record(state0, 0);
  for (int step = 1; step <= steps; ++step) {
    const Spectral k1 = rhs(x);
    const Spectral k2 = rhs(axpy(x, 0.5 * dt, k1));
    const Spectral k3 = rhs(axpy(x, 0.5 * dt, k2));
    const Spectral k4 = rhs(axpy(x, dt, k3));
    x.a += (dt / 6.0) * (k1.a + 2.0 * k2.a + 2.0 * k3.a + k4.a);
    for (std::size_t d = 0; d < x.u.size(); ++d)
      x.u[d] += (dt / 6.0) * (k1.u[d] + 2.0 * k2.u[d] + 2.0 * k3.u[d] + k4.u[d]);
    traj.steps = step;

    HydroState s = from_spectral(g, x, eps);
    const ArrayXd rho2 = s.density();
    if (!rho2.isFinite().all())
      throw Error(ErrorCode::NonFinite,
                  "non-finite hydro state at step " + std::to_string(step));
    if (!in_band(rho2)) {
      record(s, step);
      traj.reason = StopReason::DensityBand;
      traj.detail = "rho^2 left [1/4, 4] at t = " + std::to_string(step * dt);
      return traj;
    }
    if (step % every == 0 || step == steps) record(s, step);
  }
  return traj;
}

double gl_energy(const Field& psi, double eps) {
  const TorusGrid& g = psi.grid();
  double kinetic = 0.0;
  for (int d = 0; d < g.dim(); ++d) kinetic += partial(psi, d).values().abs2().sum();
  const double potential = (1.0 - psi.values().abs2()).square().sum();
  return g.cell_volume() * (0.5 * kinetic + potential / (4.0 * eps * eps));
}

// 1/2 |grad rho|^2 + rho^2 |u|^2 / 8 + a^2 / 8
double hydro_energy(const HydroState& s) {
  const GridPtr& g = s.a.grid_ptr();
  const ArrayXd rho2 = s.density();
  const Field rho = Field::from_real(g, rho2.max(0.0).sqrt());
  double acc = 0.0;
  for (int d = 0; d < g->dim(); ++d) {
    acc += 0.5 * partial(rho, d).values().real().square().sum();
    acc += 0.125 * (rho2 * s.u[d].values().real().square()).sum();
  }
  acc += 0.125 * s.a.values().real().square().sum();
  return g->cell_volume() * acc;
}

double mass_excess(const Field& psi) {
  return psi.grid().cell_volume() * (psi.values().abs2() - 1.0).sum();
}

DarkSoliton dark_soliton(const GridPtr& grid, double c, double eps) {
  if (grid->dim() != 1)
    throw Error(ErrorCode::InvalidArgument, "dark soliton needs a 1-D grid");
  if (!(std::abs(c) < kSqrt2))
    throw Error(ErrorCode::NoTravellingWave,
                "no travelling wave for |c| >= sqrt2 (c = " + std::to_string(c) + ")");
  const double amp = std::sqrt((2.0 - c * c) / 2.0);
  const double kappa = std::sqrt(2.0 - c * c) / 2.0;
  const double beta = c / kSqrt2;
  const double half = 0.5 * grid->box_length() / eps;
  if (2.0 * std::exp(-2.0 * kappa * half) > 1e-12)
    throw Error(ErrorCode::InvalidArgument,
                "box too short for the soliton tails to decay below 1e-12");

  auto profile = [&](double x) { return cplx(amp * std::tanh(kappa * x), beta); };
  const cplx right = cplx(amp, beta), left = cplx(-amp, beta);
  ArrayXcd psi(grid->size());
  for (Index i = 0; i < grid->size(); ++i) {
    const double x = grid->x(0)[i] / eps;
    psi[i] = x >= 0 ? profile(x) * profile(-(x - half)) / right
                    : profile(x) * profile(-(x + half)) / left;
  }
  DarkSoliton out;
  out.psi = Field::from_values(grid, std::move(psi));
  out.speed = c;
  out.residual = travelling_wave_residual(out.psi, c, eps);
  return out;
}

double travelling_wave_residual(const Field& psi, double c, double eps) {
  const TorusGrid& g = psi.grid();
  const ArrayXcd d1 = partial(psi, 0).values();
  const ArrayXcd d2 = laplacian(psi).values();
  const ArrayXcd& v = psi.values();
  const ArrayXd sign =
      (g.x(0).abs() < 0.25 * g.box_length()).select(ArrayXd::Ones(g.size()), -1.0);
  const ArrayXcd r = cplx(0, -c * eps) * sign.cast<cplx>() * d1 + eps * eps * d2 -
                     v * (v.abs2() - 1.0).cast<cplx>();
  return std::sqrt(g.cell_volume() * r.abs2().sum());
}

void write_trajectory(const std::string& dir, const std::string& stem,
                      const GpTrajectory& traj) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(dir) / "snapshots");
  nlohmann::json j;
  j["times"] = traj.times;
  j["reason"] = to_string(traj.reason);
  j["detail"] = traj.detail;
  j["dt"] = traj.dt;
  j["steps"] = traj.steps;
  nlohmann::json logs = nlohmann::json::array();
  for (const StepLog& l : traj.logs)
    logs.push_back({{"step", l.step}, {"time", l.time}, {"energy", l.energy},
                    {"min_modulus", l.min_modulus}, {"mass", l.mass}});
  j["logs"] = logs;
  nlohmann::json files = nlohmann::json::array();
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    char name[64];
    std::snprintf(name, sizeof name, "%s-%04zu.gpwf", stem.c_str(), i);
    const std::string rel = std::string("snapshots/") + name;
    write_snapshot((fs::path(dir) / rel).string(), traj.snapshots[i],
                   traj.times[std::min(i, traj.times.size() - 1)]);
    files.push_back(rel);
  }
  j["snapshots"] = files;
  std::ofstream out(fs::path(dir) / (stem + ".json"));
  if (!out) throw Error(ErrorCode::Io, "cannot write trajectory sidecar in " + dir);
  out << j.dump(2) << "\n";
}

}  // namespace gpwave
