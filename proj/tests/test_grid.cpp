#include "doctest.h"

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>

#include "gpwave/grid.hpp"

using namespace gpwave;
using std::numbers::pi;

namespace {

// Band-limited random field with |k_j| <= kmax on every axis.
Field random_bandlimited(const GridPtr& g, int kmax, unsigned seed,
                         bool real = true) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  ArrayXcd c = ArrayXcd::Zero(g->size());
  for (Index i = 0; i < g->size(); ++i) {
    bool inside = true;
    for (int d = 0; d < g->dim(); ++d)
      inside = inside && std::abs(g->lattice(d)[i]) <= kmax;
    if (inside) c[i] = cplx(nd(rng), nd(rng));
  }
  Field f = Field::from_coefficients(g, c);
  return real ? real_part(f) : f;
}

// Dense unitary DFT matrix, F(j,k) = exp(-2 pi i jk/n) / sqrt(n).
Eigen::MatrixXcd dft_matrix(int n) {
  Eigen::MatrixXcd F(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      F(j, k) = std::polar(1.0 / std::sqrt(double(n)), -2.0 * pi * j * k / n);
  return F;
}

}  // namespace

TEST_CASE("make_grid builds the centered lattice") {
  GridPtr g = make_grid(1, 8, 2 * pi);
  std::vector<int> ks;
  for (Index i = 0; i < g->size(); ++i) ks.push_back(g->lattice(0)[i]);
  CHECK(ks == std::vector<int>{0, 1, 2, 3, -4, -3, -2, -1});
  for (Index i = 0; i < g->size(); ++i)
    CHECK(g->xi(0)[i] == doctest::Approx(ks[i]).epsilon(1e-15));

  GridPtr g2 = make_grid(2, 64, 40.0);
  CHECK(g2->size() == 64 * 64);
  CHECK(g2->xi(1)[1] == doctest::Approx(2 * pi / 40.0));
  CHECK(g2->x(0)[0] == doctest::Approx(-20.0));
  CHECK(g2->x(1)[1] == doctest::Approx(-20.0 + 40.0 / 64));

  GridPtr g3 = make_grid(3, 64, 20.0);
  CHECK(g3->size() == 262144);
  // grid tables (3 xi, 3 x, 3 lattice, |xi|^2, |xi|, mask) plus twelve
  // complex work fields is well under half a gigabyte
  const double bytes = double(g3->size()) * (11 * 8 + 3 * 4 + 12 * 16);
  CHECK(bytes < 0.5e9);
}

TEST_CASE("make_grid rejects invalid shapes") {
  CHECK_THROWS_AS(make_grid(1, 12, 1.0), Error);
  CHECK_THROWS_AS(make_grid(4, 16, 1.0), Error);
  CHECK_THROWS_AS(make_grid(0, 16, 1.0), Error);
  CHECK_THROWS_AS(make_grid(1, 4, 1.0), Error);
  CHECK_THROWS_AS(make_grid(1, 16, -1.0), Error);
}

TEST_CASE("frequency lattice is odd symmetric away from Nyquist") {
  GridPtr g = make_grid(2, 16, 7.0);
  for (Index i = 0; i < g->size(); ++i) {
    std::vector<int> node = g->unravel(i);
    bool nyq = false;
    for (int d = 0; d < 2; ++d) {
      nyq = nyq || g->lattice(d)[i] == -8;
      node[d] = (16 - node[d]) % 16;
    }
    if (nyq) continue;
    const Index j = g->ravel(node);
    for (int d = 0; d < 2; ++d) CHECK(g->xi(d)[j] == -g->xi(d)[i]);
  }
}

TEST_CASE("apply_multiplier identity and eigenfunction") {
  GridPtr g = make_grid(2, 32, 10.0);
  Field f = random_bandlimited(g, 10, 1, false);
  Field same = apply_multiplier(f, ArrayXd::Ones(g->size()));
  CHECK((same.values() - f.values()).abs().maxCoeff() < 1e-13);

  const double k0 = 2 * pi / 10.0 * 3;
  ArrayXcd pw = (cplx(0, 1) * k0 * g->x(0)).exp();
  Field e = Field::from_values(g, pw);
  Field de = apply_multiplier(e, cplx(0, 1) * g->xi(0).cast<cplx>());
  CHECK((de.values() - cplx(0, k0) * pw).abs().maxCoeff() < 1e-12);
}

TEST_CASE("apply_multiplier matches a dense matrix oracle") {
  const int n = 16;
  const double eps = 0.5, L = 8.0;
  GridPtr g = make_grid(1, n, L);
  ArrayXd gauss = (-g->x(0).square()).exp();
  Field f = Field::from_real(g, gauss);
  auto symbol = [eps](const Wavevector& xi) {
    const double k = xi.norm();
    return cplx(std::sqrt(2.0) * k * std::sqrt(1 + eps * eps * k * k), 0);
  };
  Field mf = apply_multiplier(f, Symbol(symbol));

  Eigen::MatrixXcd F = dft_matrix(n);
  Eigen::VectorXcd m(n);
  for (int k = 0; k < n; ++k) {
    const int kk = k < n / 2 ? k : k - n;
    Wavevector xi(2 * pi * kk / L, 0, 0);
    m[k] = symbol(xi);
  }
  Eigen::VectorXcd expected =
      F.adjoint() * m.asDiagonal() * F * gauss.matrix().cast<cplx>();
  CHECK((mf.values().matrix() - expected).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("apply_multiplier reports non-finite symbols") {
  GridPtr g = make_grid(1, 16, 2 * pi);
  Field f = Field::from_real(g, ArrayXd::Ones(16));
  ArrayXd inv = g->xi_abs().inverse();
  try {
    apply_multiplier(f, inv);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFinite);
    CHECK(std::string(e.what()).find("xi = (0)") != std::string::npos);
  }
}

TEST_CASE("multipliers compose and commute with derivatives") {
  GridPtr g = make_grid(2, 32, 12.0);
  Field f = random_bandlimited(g, 9, 7, false);
  ArrayXcd m1 = (cplx(0, 0.3) * g->xi2().cast<cplx>()).exp();
  ArrayXcd m2 = (1.0 + g->xi_abs()).inverse().cast<cplx>();
  Field a = apply_multiplier(apply_multiplier(f, m1), m2);
  Field b = apply_multiplier(f, ArrayXcd(m1 * m2));
  CHECK((a.values() - b.values()).abs().maxCoeff() < 1e-12);

  Field c = partial(apply_multiplier(f, m1), 1);
  Field d = apply_multiplier(partial(f, 1), m1);
  CHECK((c.values() - d.values()).abs().maxCoeff() < 1e-12);
}

TEST_CASE("differentiate: gradient, laplacian, divergence") {
  GridPtr g = make_grid(2, 32, 2 * pi);
  const double k0 = 2.0, k1 = 3.0;
  ArrayXd s = (k0 * g->x(0) + k1 * g->x(1)).sin();
  AnyField grad = differentiate(Field::from_real(g, s), DiffMode::Gradient);
  const VectorField& gv = std::get<VectorField>(grad);
  ArrayXd c = (k0 * g->x(0) + k1 * g->x(1)).cos();
  CHECK((gv[0].values() - (k0 * c).cast<cplx>()).abs().maxCoeff() < 1e-12);
  CHECK((gv[1].values() - (k1 * c).cast<cplx>()).abs().maxCoeff() < 1e-12);

  ArrayXcd pw = (cplx(0, 1) * (k0 * g->x(0) + k1 * g->x(1)).cast<cplx>()).exp();
  AnyField lap = differentiate(Field::from_values(g, pw), DiffMode::Laplacian);
  CHECK((std::get<Field>(lap).values() + (k0 * k0 + k1 * k1) * pw)
            .abs()
            .maxCoeff() < 1e-11);

  Field f = random_bandlimited(g, 10, 3);
  Field dg = divergence(gradient(f));
  Field lf = laplacian(f);
  CHECK((dg.values() - lf.values()).abs().maxCoeff() < 1e-12 * sup_norm(lf));

  CHECK_THROWS_AS(differentiate(f, DiffMode::Divergence), Error);
  CHECK_THROWS_AS(differentiate(gradient(f), DiffMode::Laplacian), Error);
}

TEST_CASE("dealias") {
  GridPtr g = make_grid(1, 32, 5.0);
  Field f = random_bandlimited(g, 10, 11);
  Field d = dealias(f);
  CHECK((d.values() - f.values()).abs().maxCoeff() < 1e-14);

  ArrayXd nyq = (pi * g->n() / g->box_length() * g->x(0)).cos();
  CHECK(sup_norm(dealias(Field::from_real(g, nyq))) < 1e-14);
}

TEST_CASE("dealiased product matches a 3/2-padded product") {
  const int n = 16, m = 24;
  GridPtr g = make_grid(1, n, 2 * pi);
  Field u = random_bandlimited(g, 3, 21);
  Field v = random_bandlimited(g, 3, 22);
  Field prod = dealias(Field::from_values(g, u.values() * v.values()));

  // Padded oracle with dense DFTs on m = 3n/2 points.
  auto pad = [&](const Field& f) {
    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(m);
    for (int k = 0; k < n; ++k) {
      const int kk = k < n / 2 ? k : k - n;
      if (kk == -n / 2) continue;
      c[(kk + m) % m] = f.coefficients()[k] * std::sqrt(double(m) / n);
    }
    return Eigen::VectorXcd(dft_matrix(m).adjoint() * c);
  };
  Eigen::VectorXcd pp = pad(u).cwiseProduct(pad(v));
  Eigen::VectorXcd pc = dft_matrix(m) * pp;
  for (int k = 0; k < n; ++k) {
    const int kk = k < n / 2 ? k : k - n;
    const cplx expected =
        3 * std::abs(kk) > n ? cplx(0) : pc[(kk + m) % m] * std::sqrt(double(n) / m);
    CHECK(std::abs(prod.coefficients()[k] - expected) < 1e-12);
  }
}

TEST_CASE("transform: constants, deltas, Parseval and round trip") {
  GridPtr g = make_grid(2, 16, 3.0);
  Field one = Field::from_real(g, ArrayXd::Ones(g->size()));
  Field c = transform(one, Direction::Forward);
  CHECK(std::abs(c.values()[0] - 16.0) < 1e-12);
  CHECK(c.values().tail(g->size() - 1).abs().maxCoeff() < 1e-12);

  ArrayXd delta = ArrayXd::Zero(g->size());
  delta[37] = 1.0;
  Field dc = transform(Field::from_real(g, delta), Direction::Forward);
  CHECK((dc.values().abs() - 1.0 / 16.0).abs().maxCoeff() < 1e-15);

  Field r = random_bandlimited(g, 8, 5, false);
  const double direct = std::sqrt(r.values().abs2().sum());
  const double spectral = std::sqrt(r.coefficients().abs2().sum());
  CHECK(std::abs(direct - spectral) < 1e-12 * direct);

  Field back = transform(transform(r, Direction::Forward), Direction::Inverse);
  CHECK((back.values() - r.values()).abs().maxCoeff() <
        1e-12 * r.values().abs().maxCoeff());
}

TEST_CASE("real fields have Hermitian coefficients") {
  GridPtr g = make_grid(3, 8, 2.0);
  Field r = random_bandlimited(g, 3, 9);
  const ArrayXcd& c = r.coefficients();
  for (Index i = 0; i < g->size(); ++i) {
    std::vector<int> node = g->unravel(i);
    for (int& j : node) j = (8 - j) % 8;
    CHECK(std::abs(c[i] - std::conj(c[g->ravel(node)])) < 1e-12);
  }
}

TEST_CASE("snapshot round trip and header layout") {
  GridPtr g = make_grid(2, 8, 4.5);
  Field f = random_bandlimited(g, 3, 2, false);
  const std::string path = "test_grid_snapshot.gpwf";
  write_snapshot(path, f, 1.25);
  Snapshot s = read_snapshot(path);
  CHECK(s.time == 1.25);
  CHECK(s.field.grid().dim() == 2);
  CHECK(s.field.grid().n() == 8);
  CHECK(s.field.grid().box_length() == 4.5);
  CHECK((s.field.values() - f.values()).abs().maxCoeff() == 0.0);

  std::ifstream in(path, std::ios::binary | std::ios::ate);
  CHECK(in.tellg() == std::streamoff(64 + 16 * 64));
  in.seekg(0);
  char magic[4];
  in.read(magic, 4);
  CHECK(std::string(magic, 4) == "GPWF");
  std::remove(path.c_str());
}
