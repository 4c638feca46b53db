#pragma once

#include <string>
#include <vector>

#include "gpwave/grid.hpp"
#include "gpwave/madelung.hpp"

namespace gpwave {

struct SolverConfig {
  double dt = 0.0;  // 0 selects default_dt
  double t_max = 1.0;
  int log_every = 1;
  bool dealias = true;
  bool stop_on_vortex = true;
  bool keep_snapshots = true;
};

enum class StopReason { Completed, Vortex, DensityBand };
const char* to_string(StopReason r);

struct StepLog {
  int step = 0;
  double time = 0.0;
  double energy = 0.0;
  double min_modulus = 0.0;
  double mass = 0.0;  // integral of |psi|^2 - 1
};

template <class State>
struct Trajectory {
  std::vector<double> times;
  std::vector<State> snapshots;
  std::vector<StepLog> logs;
  StopReason reason = StopReason::Completed;
  std::string detail;
  double dt = 0.0;
  int steps = 0;

  const State& final_state() const { return snapshots.back(); }
};

using GpTrajectory = Trajectory<Field>;
using HydroTrajectory = Trajectory<HydroState>;

// min(0.2 dx^2 / eps, 0.1 dx / sqrt2)
double default_dt(const TorusGrid& grid, double eps);
// Steps used to reach t_max; the step is then shrunk to t_max / steps.
int step_count(double t_max, double dt);

// Reusable Strang stepper for i eps psi_t + eps^2 Lap psi = psi(|psi|^2 - 1).
class StrangStepper {
 public:
  StrangStepper(const GridPtr& grid, double eps, double dt);
  void step(Field& psi) const;
  double eps() const { return eps_; }
  double dt() const { return dt_; }

 private:
  double eps_;
  double dt_;
  ArrayXcd linear_;
};

Field strang_step(Field psi, double eps, double dt);

// psi <- exp(-i tau (|psi|^2 - 1) / eps) psi; leaves |psi| unchanged.
Field nonlinear_substep(Field psi, double eps, double tau);

GpTrajectory evolve_gp(const Field& psi0, double eps,
                       const SolverConfig& config);

// Right-hand side of the scaled hydrodynamic system
//   a_t = -sqrt2 div u - eps div(a u)
//   u_t = -sqrt2 grad a + eps(-grad |u|^2/2 + 2 grad(Lap r / r)),
//   r = sqrt(sqrt2 + eps a).
HydroState hydro_rhs(const HydroState& state, bool dealias = true);

HydroTrajectory evolve_hydro(const HydroState& state0,
                             const SolverConfig& config);

double gl_energy(const Field& psi, double eps);
double hydro_energy(const HydroState& state);
double mass_excess(const Field& psi);

struct DarkSoliton {
  Field psi;
  double speed = 0.0;
  double residual = 0.0;
};

// 1-D travelling wave psi_c(x) = A tanh(kappa x) + i c/sqrt2 in the
// semiclassical variable y = eps x, placed at the origin and paired with a
// mirror kink at y = L/2 moving at -c so the profile is periodic.
DarkSoliton dark_soliton(const GridPtr& grid, double c, double eps = 1.0);

// L2 residual of -i c eps psi' + eps^2 psi'' - psi(|psi|^2 - 1), using +c on
// |y| < L/4 and -c elsewhere.
double travelling_wave_residual(const Field& psi, double c, double eps = 1.0);

// snapshots/<stem>-NNNN.gpwf plus <stem>.json with times and logs.
void write_trajectory(const std::string& dir, const std::string& stem,
                      const GpTrajectory& trajectory);

}  // namespace gpwave
