#include "gpwave/littlewood_paley.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "json.hpp"

namespace gpwave {

namespace {

double transition_weight(double z) { return z > 0 ? std::exp(-1.0 / z) : 0.0; }

ArrayXd radial(const ArrayXd& r, double (*profile)(double)) {
  return r.unaryExpr(profile);
}

double block_l2(const TorusGrid& g, const ArrayXcd& coeffs,
                const ArrayXd& symbol) {
  return std::sqrt(g.cell_volume() * (symbol.square() * coeffs.abs2()).sum());
}

double lr_aggregate(const std::vector<double>& v, double r) {
  if (std::isinf(r)) return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
  double acc = 0.0;
  for (double x : v) acc += std::pow(x, r);
  return std::pow(acc, 1.0 / r);
}

void check_q(const DyadicPartition& p, int q, int hi) {
  if (q < p.q_min || q > hi)
    throw Error(ErrorCode::InvalidArgument,
                "block index " + std::to_string(q) + " outside [" +
                    std::to_string(p.q_min) + ", " + std::to_string(hi) + "]");
}

// All multi-indices alpha in N^dim with |alpha| = order.
void multi_indices(int dim, int order, std::vector<int>& cur,
                   std::vector<std::vector<int>>& out) {
  if (int(cur.size()) == dim - 1) {
    cur.push_back(order);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (int k = 0; k <= order; ++k) {
    cur.push_back(k);
    multi_indices(dim, order - k, cur, out);
    cur.pop_back();
  }
}

ArrayXcd derivative_symbol(const TorusGrid& g, const std::vector<int>& alpha) {
  ArrayXcd m = ArrayXcd::Ones(g.size());
  for (int d = 0; d < g.dim(); ++d)
    for (int k = 0; k < alpha[d]; ++k) m *= cplx(0, 1) * g.xi(d);
  return m;
}

double sup_gradient(const Field& u) {
  VectorField g = gradient(u);
  ArrayXd acc = ArrayXd::Zero(u.grid().size());
  for (int d = 0; d < g.dim(); ++d) acc += g[d].values().abs2();
  return std::sqrt(acc.maxCoeff());
}

}  // namespace

double lp_chi(double r) {
  if (r <= kChiInner) return 1.0;
  if (r >= kChiOuter) return 0.0;
  const double t = (r - kChiInner) / (kChiOuter - kChiInner);
  const double a = transition_weight(1.0 - t), b = transition_weight(t);
  return a / (a + b);
}

double lp_phi(double r) { return lp_chi(0.5 * r) - lp_chi(r); }

double DyadicPartition::coverage_radius() const {
  return kChiInner * std::ldexp(1.0, q_max + 1);
}

double DyadicPartition::dealias_radius() const {
  return (2.0 / 3.0) * grid->nyquist();
}

ArrayXd DyadicPartition::block_symbol(int q) const {
  check_q(*this, q, q_max);
  if (q < 0) return radial(grid->xi_abs(), lp_chi);
  return radial(grid->xi_abs() * std::ldexp(1.0, -q), lp_phi);
}

ArrayXd DyadicPartition::lowpass_symbol(int q) const {
  check_q(*this, q, q_max + 1);
  return radial(grid->xi_abs() * std::ldexp(1.0, -q), lp_chi);
}

DyadicPartition build_partition(const GridPtr& grid) {
  const double top = grid->nyquist() * 3.0 / 8.0;
  const int q_max = top >= 1.0 ? int(std::floor(std::log2(top))) : -1;
  // blocks -1, 0, ..., q_max must number at least three
  if (q_max < 1)
    throw Error(ErrorCode::GridTooCoarse,
                "grid resolves fewer than three dyadic blocks (Nyquist " +
                    std::to_string(grid->nyquist()) + ")");
  DyadicPartition p;
  p.grid = grid;
  p.q_max = q_max;
  return p;
}

Field dyadic_block(const DyadicPartition& p, const Field& u, int q,
                   BlockKind kind) {
  const ArrayXd m =
      kind == BlockKind::Delta ? p.block_symbol(q) : p.lowpass_symbol(q);
  return apply_multiplier(u, m);
}

std::string NormReport::to_json() const {
  nlohmann::json j;
  j["kind"] = kind;
  j["s"] = s;
  if (std::isinf(r))
    j["r"] = "inf";
  else
    j["r"] = r;
  j["value"] = value;
  j["per_block"] = per_block;
  j["q_max"] = q_max;
  return j.dump();
}

NormReport besov_norm(const DyadicPartition& p,
                      const std::vector<const Field*>& components, double s,
                      double r) {
  if (!(r >= 1.0))
    throw Error(ErrorCode::InvalidArgument, "besov index r must be >= 1");
  const TorusGrid& g = *p.grid;
  NormReport rep;
  rep.kind = "besov";
  rep.s = s;
  rep.r = r;
  rep.q_max = p.q_max;
  for (int q = p.q_min; q <= p.q_max; ++q) {
    const ArrayXd m = p.block_symbol(q);
    double sq = 0.0;
    for (const Field* f : components) {
      if (f->grid().size() != g.size())
        throw Error(ErrorCode::InvalidArgument, "field and partition grids differ");
      sq += std::pow(block_l2(g, f->coefficients(), m), 2);
    }
    rep.per_block.push_back(std::pow(2.0, q * s) * std::sqrt(sq));
  }
  rep.value = lr_aggregate(rep.per_block, r);
  return rep;
}

NormReport besov_norm(const DyadicPartition& p, const Field& u, double s,
                      double r) {
  return besov_norm(p, std::vector<const Field*>{&u}, s, r);
}

NormReport besov_norm(const DyadicPartition& p, const VectorField& v, double s,
                      double r) {
  std::vector<const Field*> c;
  for (int d = 0; d < v.dim(); ++d) c.push_back(&v[d]);
  return besov_norm(p, c, s, r);
}

double sobolev_norm(const Field& u, double s) {
  const TorusGrid& g = u.grid();
  const ArrayXd w = (1.0 + g.xi2()).pow(s);
  return std::sqrt(g.cell_volume() * (w * u.coefficients().abs2()).sum());
}

double sobolev_norm(const VectorField& v, double s) {
  double acc = 0.0;
  for (int d = 0; d < v.dim(); ++d) acc += std::pow(sobolev_norm(v[d], s), 2);
  return std::sqrt(acc);
}

NormReport sobolev_norm(const DyadicPartition& p, const Field& u, double s,
                        SobolevMethod method) {
  if (method == SobolevMethod::Blocks) {
    NormReport rep = besov_norm(p, u, s, 2.0);
    rep.kind = "sobolev";
    return rep;
  }
  NormReport rep;
  rep.kind = "sobolev";
  rep.s = s;
  rep.value = sobolev_norm(u, s);
  return rep;
}

std::pair<double, double> sobolev_equivalence_band(const DyadicPartition& p,
                                                   double s, double radius) {
  const TorusGrid& g = *p.grid;
  ArrayXd acc = ArrayXd::Zero(g.size());
  for (int q = p.q_min; q <= p.q_max; ++q)
    acc += std::pow(2.0, 2 * q * s) * p.block_symbol(q).square();
  const ArrayXd ratio = acc / (1.0 + g.xi2()).pow(s);
  double lo = kInfinity, hi = 0.0;
  for (Index i = 0; i < g.size(); ++i) {
    if (g.xi_abs()[i] > radius) continue;
    lo = std::min(lo, ratio[i]);
    hi = std::max(hi, ratio[i]);
  }
  return {std::sqrt(lo), std::sqrt(hi)};
}

std::pair<Field, Field> split_low_high(const Field& u, double eps) {
  if (!(eps > 0))
    throw Error(ErrorCode::InvalidArgument, "split_low_high needs eps > 0");
  const ArrayXd m = radial(u.grid().xi_abs() * eps, lp_chi);
  Field low = apply_multiplier(u, m);
  Field high = apply_multiplier(u, 1.0 - m);
  return {std::move(low), std::move(high)};
}

std::pair<VectorField, VectorField> split_low_high(const VectorField& v,
                                                   double eps) {
  std::vector<Field> lo, hi;
  for (int d = 0; d < v.dim(); ++d) {
    auto [l, h] = split_low_high(v[d], eps);
    lo.push_back(std::move(l));
    hi.push_back(std::move(h));
  }
  return {VectorField(std::move(lo)), VectorField(std::move(hi))};
}

double gamma_weighted(const AugmentedState& state, int s) {
  if (s < 0) throw Error(ErrorCode::InvalidArgument, "gamma order must be >= 0");
  const ArrayXd w = state.weight();
  if ((w <= 0).any() || !w.allFinite())
    throw Error(ErrorCode::NotAdmissible, "weight leaves (0, inf)");
  const TorusGrid& g = state.b.grid();
  std::vector<std::vector<int>> alphas;
  std::vector<int> cur;
  multi_indices(g.dim(), s, cur, alphas);
  const double dv = g.cell_volume();
  double total = 0.0;
  for (const auto& alpha : alphas) {
    const ArrayXcd m = derivative_symbol(g, alpha);
    total += dv * (m * state.b.coefficients()).abs2().sum();
    for (int d = 0; d < state.z.dim(); ++d) {
      Field dz = apply_multiplier(state.z[d], m);
      total += dv * (w * dz.values().abs2()).sum();
    }
  }
  return total;
}

double lipschitz_norm(const Field& u) {
  return sup_norm(u) + sup_gradient(u);
}

double lipschitz_norm(const VectorField& v) {
  ArrayXd jac = ArrayXd::Zero(v.grid().size());
  for (int c = 0; c < v.dim(); ++c) {
    VectorField g = gradient(v[c]);
    for (int d = 0; d < g.dim(); ++d) jac += g[d].values().abs2();
  }
  return sup_norm(v) + std::sqrt(jac.maxCoeff());
}

double commutator_ratio(const DyadicPartition& p, const Field& a,
                        const Field& f, int q, double s) {
  const ArrayXd m = p.block_symbol(q);
  const ArrayXcd av = a.values();
  const Field af = Field::from_values(a.grid_ptr(), av * f.values());
  const ArrayXcd comm =
      av * apply_multiplier(f, m).values() - apply_multiplier(af, m).values();
  const double lhs =
      std::sqrt(a.grid().cell_volume() * comm.abs2().sum());

  const VectorField da = gradient(a);
  const double rhs = std::pow(2.0, -q * s) *
                     (sup_norm(da) * besov_norm(p, f, s - 1).value +
                      besov_norm(p, da, s - 1).value * sup_norm(f));
  if (rhs == 0.0) {
    const double scale = sup_norm(a) * l2_norm(f);
    if (lhs <= 1e-14 * std::max(scale, 1e-300) || lhs == 0.0) return 0.0;
    throw Error(ErrorCode::DegenerateBound,
                "commutator bound vanishes while the commutator does not");
  }
  return lhs / rhs;
}

RatioScan commutator_scan(const DyadicPartition& p, const Field& a,
                          const Field& f, double s) {
  RatioScan scan;
  for (int q = 0; q <= p.q_max; ++q) {
    scan.q.push_back(q);
    scan.ratio.push_back(commutator_ratio(p, a, f, q, s));
    scan.max = std::max(scan.max, scan.ratio.back());
  }
  return scan;
}

double tame_product_ratio(const Field& u, const Field& v, int k) {
  const Field uv = Field::from_values(u.grid_ptr(), u.values() * v.values());
  const double rhs =
      sup_norm(u) * sobolev_norm(v, k) + sup_norm(v) * sobolev_norm(u, k);
  if (rhs == 0.0) {
    if (sobolev_norm(uv, k) == 0.0) return 0.0;
    throw Error(ErrorCode::DegenerateBound, "tame product bound vanishes");
  }
  return sobolev_norm(uv, k) / rhs;
}

ExchangeReport exchange_ratio(const DyadicPartition& p, const Field& u_high,
                              double s, double alpha, double eps, double r) {
  ExchangeReport rep;
  const NormReport lo = besov_norm(p, u_high, s, r);
  const NormReport hi = besov_norm(p, u_high, s + alpha, r);
  const double floor = 1e-14 * std::max(hi.value, 1e-300);
  for (std::size_t i = 0; i < lo.per_block.size(); ++i) {
    const double den = std::pow(eps, alpha) * hi.per_block[i];
    if (hi.per_block[i] <= floor) continue;
    rep.q.push_back(p.q_min + int(i));
    rep.ratio.push_back(lo.per_block[i] / den);
    rep.max_ratio = std::max(rep.max_ratio, rep.ratio.back());
  }
  rep.total_ratio = hi.value > 0 ? lo.value / (std::pow(eps, alpha) * hi.value) : 0.0;
  // Delta_q u_h vanishes unless 2^q kChiOuter*2 >= kChiInner / eps, so
  // (eps 2^q)^{-alpha} <= (2 kChiOuter / kChiInner)^alpha.
  rep.bound = std::pow(2.0 * kChiOuter / kChiInner, alpha);
  return rep;
}

double norm_equivalence_ratio(const DyadicPartition& p,
                              const AugmentedState& state, double sigma) {
  const int dim = state.z.dim();
  std::vector<Field> v;
  for (int d = 0; d < dim; ++d) v.push_back(real_part(state.z[d]));
  std::vector<const Field*> full{&state.b};
  for (int d = 0; d < dim; ++d) full.push_back(&state.z[d]);
  const double lhs = besov_norm(p, full, sigma).value;

  const double eps = state.eps;
  auto [b_l, b_h] = split_low_high(state.b, eps);
  auto [v_l, v_h] = split_low_high(VectorField(v), eps);
  VectorField eb = eps * gradient(b_h);
  std::vector<const Field*> low{&b_l}, high;
  for (int d = 0; d < dim; ++d) {
    low.push_back(&v_l[d]);
    high.push_back(&eb[d]);
    high.push_back(&v_h[d]);
  }
  const double rhs = besov_norm(p, low, sigma).value + besov_norm(p, high, sigma).value;
  if (rhs == 0.0) return lhs == 0.0 ? 1.0 : kInfinity;
  return lhs / rhs;
}

}  // namespace gpwave
