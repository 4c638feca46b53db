#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "gpwave/grid.hpp"
#include "gpwave/madelung.hpp"

namespace gpwave {

// Radial profiles of the dyadic partition. chi equals 1 on [0, 1.1] and 0 on
// [4/3, inf) with a C-infinity transition; phi(r) = chi(r/2) - chi(r).
inline constexpr double kChiInner = 1.1;
inline constexpr double kChiOuter = 4.0 / 3.0;
double lp_chi(double r);
double lp_phi(double r);

struct DyadicPartition {
  GridPtr grid;
  int q_min = -1;
  int q_max = 0;

  // Telescoped sum chi + sum_{q <= q_max} phi_q equals 1 below this radius.
  double coverage_radius() const;
  // Radius of the 2/3 dealias disk.
  double dealias_radius() const;
  // Sampled multiplier of Delta_q (q = -1 gives chi).
  ArrayXd block_symbol(int q) const;
  // Sampled multiplier of S_q = chi(2^-q D).
  ArrayXd lowpass_symbol(int q) const;
};

DyadicPartition build_partition(const GridPtr& grid);

enum class BlockKind { Delta, Lowpass };

// Delta_q u for -1 <= q <= q_max, or S_q u for -1 <= q <= q_max + 1.
Field dyadic_block(const DyadicPartition& p, const Field& u, int q,
                   BlockKind kind = BlockKind::Delta);

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct NormReport {
  std::string kind;  // besov, sobolev, lipschitz, gamma
  double s = 0.0;
  double r = 2.0;
  double value = 0.0;
  std::vector<double> per_block;  // 2^{qs} ||Delta_q u||_2 for q = -1..q_max
  int q_max = -1;                 // truncation level, -1 when no blocks

  std::string to_json() const;
};

// ||(2^{qs} ||Delta_q u||_2)_q||_{l^r}; r = kInfinity gives the sup. Vector
// arguments sum squared block norms over components.
NormReport besov_norm(const DyadicPartition& p, const Field& u, double s,
                      double r = 2.0);
NormReport besov_norm(const DyadicPartition& p, const VectorField& v, double s,
                      double r = 2.0);
NormReport besov_norm(const DyadicPartition& p,
                      const std::vector<const Field*>& components, double s,
                      double r = 2.0);

enum class SobolevMethod { Direct, Blocks };

// Direct: (dV sum_xi (1+|xi|^2)^s |u_hat|^2)^{1/2}; Blocks: besov r = 2.
NormReport sobolev_norm(const DyadicPartition& p, const Field& u, double s,
                        SobolevMethod method = SobolevMethod::Direct);
double sobolev_norm(const Field& u, double s);
double sobolev_norm(const VectorField& v, double s);

// Bounds of ||u||_{blocks} / ||u||_{direct} over all fields supported on
// |xi| <= radius, from the symbol ratio sum_q 2^{2qs} phi_q^2 / (1+|xi|^2)^s.
std::pair<double, double> sobolev_equivalence_band(const DyadicPartition& p,
                                                   double s, double radius);

// u_l = chi(eps D) u, u_h = u - u_l.
std::pair<Field, Field> split_low_high(const Field& u, double eps);
std::pair<VectorField, VectorField> split_low_high(const VectorField& v,
                                                   double eps);

// sum_{|alpha| = s} ||d^alpha b||^2 + ||d^alpha z||^2_{L2(w dx)}.
double gamma_weighted(const AugmentedState& state, int s);

// sup |u| + sup |grad u| (Euclidean at each node, Frobenius for vectors).
double lipschitz_norm(const Field& u);
double lipschitz_norm(const VectorField& v);

// ||[a, psi_q(D)] f||_2 / (2^{-qs} (||Da||_inf ||f||_{B^{s-1}} +
// ||Da||_{B^{s-1}} ||f||_inf)), psi_q the Delta_q symbol.
double commutator_ratio(const DyadicPartition& p, const Field& a,
                        const Field& f, int q, double s);

struct RatioScan {
  std::vector<int> q;
  std::vector<double> ratio;
  double max = 0.0;
};
RatioScan commutator_scan(const DyadicPartition& p, const Field& a,
                          const Field& f, double s);

// ||uv||_{H^k} / (||u||_inf ||v||_{H^k} + ||v||_inf ||u||_{H^k}).
double tame_product_ratio(const Field& u, const Field& v, int k);

// High-frequency exchange ||u_h||_{B^s} <= C eps^alpha ||u_h||_{B^{s+alpha}}.
// Per-block ratios are reported for the nonzero blocks; bound is the
// constant implied by the support of u_h in |xi| >= 1.1/eps.
struct ExchangeReport {
  std::vector<int> q;
  std::vector<double> ratio;
  double max_ratio = 0.0;
  double total_ratio = 0.0;
  double bound = 0.0;
};
ExchangeReport exchange_ratio(const DyadicPartition& p, const Field& u_high,
                              double s, double alpha, double eps,
                              double r = 2.0);

// ||(b, z)||_{B^sigma} / (||(b, v)_l||_{B^sigma} + ||(eps grad b, v)_h||_{B^sigma})
// with v = Re z.
double norm_equivalence_ratio(const DyadicPartition& p,
                              const AugmentedState& state, double sigma);

}  // namespace gpwave
