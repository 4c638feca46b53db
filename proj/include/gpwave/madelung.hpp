#pragma once

#include "gpwave/grid.hpp"

namespace gpwave {

// Normalization of the density variable b of the augmented pair.
//   Dynaslow:  b = sqrt2 (|psi|^2 - 1) / eps,  weight 1 + eps b / sqrt2
//   Parabolic: b = 2 (|psi|^2 - 1) / eps^2,   weight 1 + eps^2 b / 2
// Both weights equal |psi|^2.
enum class BNorm { Dynaslow, Parabolic };

inline constexpr double kVortexThreshold = 0.1;
inline constexpr double kPotentialTolerance = 1e-8;

struct HydroState {
  Field a;
  VectorField u;
  double eps = 1.0;
  bool potential = true;

  // |psi|^2 = 1 + eps a / sqrt2
  ArrayXd density() const;
  bool admissible() const;
};

struct AugmentedState {
  Field b;
  VectorField z;
  double eps = 1.0;
  BNorm norm = BNorm::Dynaslow;

  ArrayXd weight() const;
};

struct MinModulus {
  double value = 0.0;
  Index index = 0;
  std::vector<int> node;
};

MinModulus min_modulus(const Field& psi);

HydroState to_hydro(const Field& psi, double eps);
AugmentedState to_augmented(const Field& psi, double eps,
                            BNorm norm = BNorm::Dynaslow);
Field from_hydro(const HydroState& state);
Field from_augmented(const AugmentedState& state);

// Relative L2 residual of grad w + w Im z = 0 with w the state weight.
double pota_residual(const AugmentedState& state);

// (1/8)(||b||^2 + ||z||^2_{L2(w dx)}) in the dynaslow normalization; the
// parabolic normalization carries an extra eps^2/2 on ||b||^2.
double augmented_energy(const AugmentedState& state);

// L2 norm of the non-gradient part of v (curl part plus non-lattice mean).
double rotational_residual(const VectorField& v);

}  // namespace gpwave
