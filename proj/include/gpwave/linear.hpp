#pragma once

#include <vector>

#include "gpwave/grid.hpp"

namespace gpwave {

// Acoustic pair (a, u). Only the potential part of u is acoustic; the
// solenoidal part and the zero mode are carried along unchanged.
struct LinearPair {
  Field a;
  VectorField u;
};

LinearPair zero_pair(const GridPtr& grid);
LinearPair operator+(const LinearPair& p, const LinearPair& q);
LinearPair operator-(const LinearPair& p, const LinearPair& q);
LinearPair operator*(double s, const LinearPair& p);

// c = (1 - kappa eps^2 Lap)^{1/2} b,  d = (-Lap)^{-1/2} div v (zero mode 0).
struct SymmetrizedPair {
  Field c;
  Field d;
  double eps = 0.0;
  double kappa = 1.0;
};

// omega = sqrt2 |xi| sqrt(1 + kappa eps^2 |xi|^2); kappa = 1 is the operator
// L_eps, kappa = 1/2 the linearization of the hydrodynamic system.
double leps_frequency(double xi_abs, double eps, double kappa = 1.0);

SymmetrizedPair symmetrize(const Field& b, const VectorField& v, double eps,
                           double kappa = 1.0);
// Returns (b, v_potential) with v = -grad (-Lap)^{-1/2} d.
LinearPair desymmetrize(const SymmetrizedPair& pair);

// Free wave system a_t + sqrt2 div u = 0, u_t + sqrt2 grad a = 0.
LinearPair wave_propagate(const LinearPair& pair0, double t);

// a_t + sqrt2 div u = 0, u_t + sqrt2 grad (1 - kappa eps^2 Lap) a = 0.
LinearPair leps_propagate(const LinearPair& pair0, double t, double eps,
                          double kappa = 1.0);

// Uniform samples of the forcing (f, g) on [0, t], first at 0 and last at t.
struct ForcingSamples {
  std::vector<double> times;
  std::vector<LinearPair> values;
};

// Variation of constants for the leps_propagate system with source (f, g),
// composite Simpson in time (3/8 rule on the last panel for odd counts).
LinearPair leps_duhamel(const LinearPair& pair0, const ForcingSamples& forcing,
                        double t, double eps, double kappa = 1.0,
                        double dt_quad = 0.05);

// V_eps(t): multiplier exp(i t eps^{-1} sqrt2 |xi| sqrt(1 + eps^2 |xi|^2));
// slowed gives U_eps(t) = V_eps(eps t / sqrt2).
Field group_apply(const Field& f, double t, double eps, bool slowed);

}  // namespace gpwave
