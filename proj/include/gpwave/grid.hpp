#pragma once

#include <Eigen/Core>

#include <array>
#include <complex>
#include <functional>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "gpwave/errors.hpp"

namespace gpwave {

using cplx = std::complex<double>;
using Eigen::ArrayXcd;
using Eigen::ArrayXd;
using Eigen::Index;

// Periodic box [-L/2, L/2)^dim with n nodes per axis in C order. Spectral
// arrays are stored in FFT natural order; lattice() gives the centered
// integer k of each storage slot (Nyquist on the negative side).
class TorusGrid {
 public:
  TorusGrid(int dim, int n, double box_length);
  ~TorusGrid();
  TorusGrid(const TorusGrid&) = delete;
  TorusGrid& operator=(const TorusGrid&) = delete;

  int dim() const { return dim_; }
  int n() const { return n_; }
  double box_length() const { return length_; }
  double dx() const { return length_ / n_; }
  Index size() const { return size_; }
  double cell_volume() const;
  double volume() const;
  double nyquist() const;
  double frequency_step() const;

  const ArrayXd& xi(int axis) const { return xi_[axis]; }
  const ArrayXd& xi2() const { return xi2_; }
  const ArrayXd& xi_abs() const { return xi_abs_; }
  const ArrayXd& x(int axis) const { return x_[axis]; }
  const Eigen::ArrayXi& lattice(int axis) const { return lattice_[axis]; }
  const ArrayXd& dealias_mask() const { return dealias_mask_; }

  std::vector<int> unravel(Index i) const;
  Index ravel(const std::vector<int>& node) const;

  // Unitary transforms; in and out must not alias.
  void forward(const cplx* in, cplx* out) const;
  void inverse(const cplx* in, cplx* out) const;

 private:
  int dim_;
  int n_;
  double length_;
  Index size_;
  std::array<ArrayXd, 3> xi_;
  std::array<ArrayXd, 3> x_;
  std::array<Eigen::ArrayXi, 3> lattice_;
  ArrayXd xi2_;
  ArrayXd xi_abs_;
  ArrayXd dealias_mask_;
  void* plan_forward_ = nullptr;
  void* plan_inverse_ = nullptr;
};

using GridPtr = std::shared_ptr<const TorusGrid>;

GridPtr make_grid(int dim, int n, double box_length);

// Complex scalar field with lazily synchronized nodal values and Fourier
// coefficients. Not safe for concurrent use; copies are independent.
class Field {
 public:
  Field() = default;
  explicit Field(GridPtr grid);

  static Field from_values(GridPtr grid, ArrayXcd values);
  static Field from_coefficients(GridPtr grid, ArrayXcd coefficients);
  static Field from_real(GridPtr grid, const ArrayXd& values);

  const TorusGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  bool empty() const { return !grid_; }

  const ArrayXcd& values() const;
  const ArrayXcd& coefficients() const;
  ArrayXd real() const { return values().real(); }

  // Mutable access invalidates the other representation.
  ArrayXcd& mutable_values();
  ArrayXcd& mutable_coefficients();

 private:
  GridPtr grid_;
  mutable ArrayXcd values_;
  mutable ArrayXcd coeffs_;
  mutable bool has_values_ = false;
  mutable bool has_coeffs_ = false;
};

Field operator+(const Field& a, const Field& b);
Field operator-(const Field& a, const Field& b);
Field operator*(double s, const Field& f);
Field operator*(cplx s, const Field& f);

// Drops the imaginary part of the nodal values.
Field real_part(const Field& f);

class VectorField {
 public:
  VectorField() = default;
  explicit VectorField(GridPtr grid);
  explicit VectorField(std::vector<Field> components);

  int dim() const { return static_cast<int>(components_.size()); }
  const Field& operator[](int i) const { return components_[i]; }
  Field& operator[](int i) { return components_[i]; }
  const TorusGrid& grid() const { return components_.front().grid(); }
  const GridPtr& grid_ptr() const { return components_.front().grid_ptr(); }
  const std::vector<Field>& components() const { return components_; }

 private:
  std::vector<Field> components_;
};

VectorField operator+(const VectorField& a, const VectorField& b);
VectorField operator-(const VectorField& a, const VectorField& b);
VectorField operator*(double s, const VectorField& v);

using Wavevector = Eigen::Vector3d;
using Symbol = std::function<cplx(const Wavevector&)>;

Field apply_multiplier(Field f, const ArrayXcd& symbol);
Field apply_multiplier(Field f, const Symbol& symbol);

template <class Derived>
Field apply_multiplier(Field f, const Eigen::ArrayBase<Derived>& symbol) {
  return apply_multiplier(std::move(f), ArrayXcd(symbol.template cast<cplx>()));
}

// Symbol evaluated on the grid lattice in storage order.
ArrayXcd sample_symbol(const TorusGrid& grid, const Symbol& symbol);

Field partial(const Field& f, int axis);
VectorField gradient(const Field& f);
Field divergence(const VectorField& v);
Field laplacian(const Field& f);

enum class DiffMode { Gradient, Divergence, Laplacian };
using AnyField = std::variant<Field, VectorField>;
AnyField differentiate(const AnyField& input, DiffMode mode);

Field dealias(Field f);

enum class Direction { Forward, Inverse };
// Forward: the result's nodal values are the coefficients of the input.
// Inverse: the input's nodal values are read as coefficients.
Field transform(const Field& f, Direction direction);

// Continuous norms approximated by nodal quadrature: sqrt(dV * sum |f|^2).
double l2_norm(const Field& f);
double l2_norm(const VectorField& v);
double sup_norm(const Field& f);
double sup_norm(const VectorField& v);
// sum over nodes times cell volume
cplx integrate(const Field& f);

struct Snapshot {
  Field field;
  double time = 0.0;
};

void write_snapshot(const std::string& path, const Field& f, double time);
Snapshot read_snapshot(const std::string& path);

}  // namespace gpwave
