#include "gpwave/linear.hpp"

#include <cmath>
#include <numbers>

namespace gpwave {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

// Longitudinal amplitude w = xi.u / |xi| per mode (0 at xi = 0).
ArrayXcd longitudinal(const VectorField& u) {
  const TorusGrid& g = u.grid();
  ArrayXcd w = ArrayXcd::Zero(g.size());
  const ArrayXd inv = (g.xi_abs() > 0).select(g.xi_abs().inverse(), 0.0);
  for (int d = 0; d < u.dim(); ++d) w += g.xi(d) * inv * u[d].coefficients();
  return w;
}

ArrayXd stretch(const TorusGrid& g, double eps, double kappa) {
  return (1.0 + kappa * eps * eps * g.xi2()).sqrt();
}

LinearPair rotate(const LinearPair& p, double t, double eps, double kappa) {
  const TorusGrid& g = p.a.grid();
  const GridPtr& grid = p.a.grid_ptr();
  const ArrayXd s = stretch(g, eps, kappa);
  const ArrayXd omega = kSqrt2 * g.xi_abs() * s;
  const ArrayXcd w = longitudinal(p.u);
  const ArrayXcd c = s * p.a.coefficients();
  const ArrayXcd rot = (cplx(0, -t) * omega.cast<cplx>()).exp();
  const ArrayXcd plus = (c + w) * rot;
  const ArrayXcd minus = (c - w) * rot.conjugate();
  const ArrayXcd c_t = 0.5 * (plus + minus);
  const ArrayXcd w_t = 0.5 * (plus - minus);

  const ArrayXd inv = (g.xi_abs() > 0).select(g.xi_abs().inverse(), 0.0);
  LinearPair out;
  out.a = Field::from_coefficients(grid, c_t / s);
  std::vector<Field> u;
  for (int d = 0; d < g.dim(); ++d) {
    const ArrayXd unit = g.xi(d) * inv;
    u.push_back(Field::from_coefficients(grid, p.u[d].coefficients() + unit * (w_t - w)));
  }
  out.u = VectorField(std::move(u));
  return out;
}

}  // namespace

LinearPair zero_pair(const GridPtr& grid) { return {Field(grid), VectorField(grid)}; }

LinearPair operator+(const LinearPair& p, const LinearPair& q) {
  return {p.a + q.a, p.u + q.u};
}

LinearPair operator-(const LinearPair& p, const LinearPair& q) {
  return {p.a - q.a, p.u - q.u};
}

LinearPair operator*(double s, const LinearPair& p) { return {s * p.a, s * p.u}; }

double leps_frequency(double xi_abs, double eps, double kappa) {
  return kSqrt2 * xi_abs * std::sqrt(1.0 + kappa * eps * eps * xi_abs * xi_abs);
}

SymmetrizedPair symmetrize(const Field& b, const VectorField& v, double eps,
                           double kappa) {
  const TorusGrid& g = b.grid();
  SymmetrizedPair out;
  out.eps = eps;
  out.kappa = kappa;
  out.c = Field::from_coefficients(b.grid_ptr(), stretch(g, eps, kappa) * b.coefficients());
  out.d = Field::from_coefficients(b.grid_ptr(), cplx(0, 1) * longitudinal(v));
  return out;
}

LinearPair desymmetrize(const SymmetrizedPair& p) {
  const TorusGrid& g = p.c.grid();
  const GridPtr& grid = p.c.grid_ptr();
  LinearPair out;
  out.a = Field::from_coefficients(grid, p.c.coefficients() / stretch(g, p.eps, p.kappa));
  const ArrayXd inv = (g.xi_abs() > 0).select(g.xi_abs().inverse(), 0.0);
  std::vector<Field> v;
  for (int d = 0; d < g.dim(); ++d)
    v.push_back(Field::from_coefficients(
        grid, cplx(0, -1) * g.xi(d) * inv * p.d.coefficients()));
  out.u = VectorField(std::move(v));
  return out;
}

LinearPair wave_propagate(const LinearPair& pair0, double t) {
  return rotate(pair0, t, 0.0, 0.0);
}

LinearPair leps_propagate(const LinearPair& pair0, double t, double eps,
                          double kappa) {
  return rotate(pair0, t, eps, kappa);
}

LinearPair leps_duhamel(const LinearPair& pair0, const ForcingSamples& forcing,
                        double t, double eps, double kappa, double dt_quad) {
  LinearPair out = leps_propagate(pair0, t, eps, kappa);
  const std::size_t count = forcing.times.size();
  if (count == 0) return out;
  if (count != forcing.values.size())
    throw Error(ErrorCode::InvalidArgument, "forcing times and values differ in length");
  if (count < 3)
    throw Error(ErrorCode::QuadratureTooCoarse, "Simpson quadrature needs >= 3 samples");
  const int panels = static_cast<int>(count) - 1;
  const double h = t / panels;
  if (h > dt_quad)
    throw Error(ErrorCode::QuadratureTooCoarse,
                "forcing spacing " + std::to_string(h) + " exceeds " +
                    std::to_string(dt_quad));
  for (std::size_t k = 0; k < count; ++k)
    if (std::abs(forcing.times[k] - k * h) > 1e-9 * std::max(1.0, t))
      throw Error(ErrorCode::InvalidArgument,
                  "forcing samples must be uniform on [0, t]");

  std::vector<double> weight(count, 0.0);
  const int simpson = panels % 2 == 0 ? panels : panels - 3;
  for (int k = 0; k < simpson; k += 2) {
    weight[k] += h / 3;
    weight[k + 1] += 4 * h / 3;
    weight[k + 2] += h / 3;
  }
  if (simpson != panels) {
    const int k = simpson;
    weight[k] += 3 * h / 8;
    weight[k + 1] += 9 * h / 8;
    weight[k + 2] += 9 * h / 8;
    weight[k + 3] += 3 * h / 8;
  }
  for (std::size_t k = 0; k < count; ++k) {
    if (weight[k] == 0.0) continue;
    out = out + weight[k] * leps_propagate(forcing.values[k], t - forcing.times[k],
                                           eps, kappa);
  }
  return out;
}

Field group_apply(const Field& f, double t, double eps, bool slowed) {
  const TorusGrid& g = f.grid();
  const ArrayXd root = (1.0 + eps * eps * g.xi2()).sqrt();
  const ArrayXd phase = slowed ? ArrayXd(t * g.xi_abs() * root)
                               : ArrayXd((t / eps) * kSqrt2 * g.xi_abs() * root);
  return apply_multiplier(f, (cplx(0, 1) * phase.cast<cplx>()).exp());
}

}  // namespace gpwave
