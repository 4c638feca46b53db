#pragma once

#include <algorithm>
#include <atomic>
#include <deque>
#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"

#include "gpwave/dynamics.hpp"
#include "gpwave/linear.hpp"
#include "gpwave/littlewood_paley.hpp"

namespace gpwave {

// Initial data (a0, u0) of the scaled hydrodynamic system. Profiles:
//   gaussian            a0 = A exp(-|x|^2 / (2 w^2))
//   ring                a0 = A exp(-(|x| - 3w)^2 / (2 w^2))
//   random-bandlimited  seeded random coefficients on |xi| <= 1/w, sup = A
//   soliton-perturbation  dark soliton of speed c_eps times (1 + A gaussian)
// u0 = drift (a0 - mean a0) in one dimension (drift = 1 is purely
// right-moving away from the zero mode) and u0 = drift w grad a0 otherwise.
struct DataFamily {
  std::string name = "gaussian";
  double amplitude = 1.0;
  double width = 1.0;
  double drift = 0.0;
  std::uint64_t seed = 0;
  double norm_s = 4.0;

  nlohmann::ordered_json to_json() const;
};

HydroState generate(const DataFamily& family, const GridPtr& grid, double eps);
Field generate_psi(const DataFamily& family, const GridPtr& grid, double eps);

struct GridSpec {
  int dim = 1;
  int n = 256;
  double box_length = 20.0;

  GridPtr make() const { return make_grid(dim, n, box_length); }
  nlohmann::ordered_json to_json() const;
};

struct PowerFit {
  double exponent = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double stderr_exponent = 0.0;
  double x_lo = 0.0;
  double x_hi = 0.0;
  int points = 0;
  std::vector<double> xs, ys;  // the points inside the window
};

// Least squares on (log x, log y) over the points with x in [x_lo, x_hi].
PowerFit fit_powerlaw(const std::vector<double>& xs,
                      const std::vector<double>& ys,
                      std::pair<double, double> window = {0.0, kInfinity});

struct Verdict {
  std::string criterion;
  std::string quantity;
  double value = 0.0;
  double lo = -kInfinity;
  double hi = kInfinity;
  bool pass = false;
  bool informational = false;
};

Verdict check_range(std::string criterion, std::string quantity, double value,
                    double lo, double hi, bool informational = false);

// Long-format series: one row per (param, x), e.g. (eps, t).
struct Series {
  std::string name;
  std::vector<double> param;
  std::vector<double> x;
  std::vector<double> y;

  void add(double p, double xv, double yv);
};

struct ExperimentReport {
  std::string id;
  nlohmann::ordered_json parameters = nlohmann::ordered_json::object();
  std::deque<Series> series;  // stable references from add_series
  std::vector<std::pair<std::string, PowerFit>> fits;
  std::vector<std::pair<std::string, double>> constants;
  std::vector<Verdict> verdicts;

  Series& add_series(const std::string& name);
  const Series* find_series(const std::string& name) const;
  const PowerFit* find_fit(const std::string& name) const;
  double constant(const std::string& name) const;
  bool passed() const;

  nlohmann::ordered_json to_json() const;
  // Header "series,param,x,y"; values with 17 significant digits.
  std::string to_csv() const;
};

// Runs fn(0..count-1) on up to GPWAVE_THREADS workers; results keep index
// order.
int worker_count();
template <class T>
std::vector<T> parallel_map(int count, const std::function<T(int)>& fn) {
  std::vector<std::optional<T>> slots(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int workers = std::min(worker_count(), count);
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<T> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

// Global error ratio of the Strang scheme under dt halving against a
// reference computed with dt / 64.
struct OrderConfig {
  GridSpec grid{1, 1024, 20.0};
  double eps = 0.3;
  double t_max = 1.0;
  double dt = 0.01;
};
ExperimentReport strang_order(const DataFamily& family,
                              const OrderConfig& config);

// Energy drift and Gamma^0 over a fixed number of steps.
struct ConservationConfig {
  GridSpec grid{1, 1024, 128.0};
  double eps = 0.3;
  double dt = 1e-3;
  int steps = 10000;
  int samples = 10;
};
ExperimentReport conservation(const DataFamily& family,
                              const ConservationConfig& config);

// GP (through Madelung) against the hydro engine in relative H^1.
struct EngineConfig {
  GridSpec grid{1, 256, 20.0};
  double eps = 0.3;
  double t_max = 1.0;
  int samples = 4;
  int gp_substeps = 4;  // GP dt = hydro dt / gp_substeps
};
ExperimentReport compare_engines(const DataFamily& family,
                                 const EngineConfig& config);

struct SweepConfig {
  GridSpec grid{1, 512, 64.0};
  double t_max = 20.0;
  double sample_dt = 0.1;
  double dt = 0.0;
  double norm_bound = 2.0;  // horizon: first time the H^{s+1} x H^s ratio exceeds this
};
ExperimentReport sweep_theorem1(const DataFamily& family,
                                const std::vector<double>& eps_list,
                                const SweepConfig& config);

struct ApproxConfig {
  GridSpec grid{1, 1024, 40.0};
  double s = 4.0;
  double dt = 0.0;           // GP step; 0 = default_dt
  double kappa = 0.5;        // dispersion coefficient for L_eps
  double fit_eps = 0.1;      // eps of the t-exponent fit
  double fit_t = 1.0;        // t of the eps-exponent fit
  std::pair<double, double> t_window{0.0, kInfinity};
};
ExperimentReport error_vs_wave(const DataFamily& family,
                               const std::vector<double>& eps_list,
                               const std::vector<double>& t_grid,
                               const ApproxConfig& config);
// Split norm ||(a, u_l)||_{H^{s-1}} + eps^-1 ||u_h||_{H^{s-2}} for both the
// L_eps and the wave error; "crossover" is wave / L_eps.
ExperimentReport error_vs_leps(const DataFamily& family,
                               const std::vector<double>& eps_list,
                               const std::vector<double>& t_grid,
                               const ApproxConfig& config);

// Gamma^s along a GP trajectory with uniformly spaced snapshots, against
// (1 + eps ||b||_inf) ||(Db, Dz)||_inf (Gamma^s + E_eps), in t_d = eps t.
ExperimentReport monitor_prop1(const GpTrajectory& trajectory, int s,
                               double eps);

// Radial spectrum smoothstep((r - R1)/R1) smoothstep((R2 - r)/(0.4 R2))
// exp(-r^2 / (2 w^2)), supported in [R1, R2].
struct AnnulusProfile {
  double r1 = 0.05;
  double r2 = 2.6;
  double width = 0.8;

  double operator()(double r) const;
};
Field annulus_field(const GridPtr& grid, const AnnulusProfile& profile);

struct DecayConfig {
  GridSpec grid{2, 256, 256.0};
  double eps = 0.01;
  bool slowed = true;  // U_eps when true, V_eps otherwise
  double t_end = 90.0;
  int points = 4;
  double ratio = 1.4142135623730951;
  AnnulusProfile profile;
};
ExperimentReport decay_exponent(const DecayConfig& config);

enum class Regime { Wave, Schrodinger };
bool admissible_pair(double p, double r, int dim, Regime regime);

// L^p_T of ||(b, v)_l||_{W^{1,r}} over the samples against
// eps^{1/p} (||(b0, v0)_l||_{B^sigma_{2,1}} + int ||(f, g)_l||_{B^sigma_{2,1}}),
// sigma = 1 + N/2 - N/r - 1/p. Times are parabolic (t_d).
struct StrichartzInput {
  std::vector<double> times;
  std::vector<LinearPair> states;
  LinearPair data;
  ForcingSamples forcing;
};
ExperimentReport strichartz_ratio(const StrichartzInput& input, double eps,
                                  double p, double r,
                                  Regime regime = Regime::Wave);
// Samples leps_propagate(data, t_d / eps) on [0, T] with `count` points.
StrichartzInput strichartz_linear(const LinearPair& data, double eps, double T,
                                  int count);

struct SolitonConfig {
  double cells_per_unit = 5.0;  // grid points per unit length
  double margin = 40.0;
  double horizon_factor = 1.5;  // run to this multiple of the crossover
  double offset_fraction = 0.25;
  int samples = 60;
};
ExperimentReport soliton_shift(const std::vector<double>& eps_list,
                               const SolitonConfig& config);

// Partition, orthogonality, Sobolev equivalence, exchange and commutator
// checks on one grid.
struct LpConfig {
  GridSpec grid{2, 128, 3 * 3.141592653589793 * 0.99};
  std::uint64_t seed = 1;
  int functions = 20;
  double s = 1.0;
  double eps = 0.2;
};
ExperimentReport lp_suite(const LpConfig& config);

}  // namespace gpwave

