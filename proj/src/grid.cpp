#include "gpwave/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <mutex>
#include <numbers>
#include <sstream>

namespace gpwave {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

void require_same_grid(const Field& a, const Field& b) {
  if (a.grid_ptr() != b.grid_ptr())
    throw Error(ErrorCode::InvalidArgument, "fields live on different grids");
}

}  // namespace

TorusGrid::TorusGrid(int dim, int n, double box_length)
    : dim_(dim), n_(n), length_(box_length) {
  if (dim < 1 || dim > 3)
    throw Error(ErrorCode::InvalidArgument, "dim must be 1, 2 or 3");
  if (n < 8 || (n & (n - 1)) != 0)
    throw Error(ErrorCode::InvalidArgument,
                "n must be a power of two >= 8, got " + std::to_string(n));
  if (!(box_length > 0.0) || !std::isfinite(box_length))
    throw Error(ErrorCode::InvalidArgument, "box length must be positive");

  size_ = 1;
  for (int d = 0; d < dim; ++d) size_ *= n;

  const double dk = 2.0 * std::numbers::pi / length_;
  const double h = dx();
  xi2_ = ArrayXd::Zero(size_);
  dealias_mask_ = ArrayXd::Ones(size_);
  for (int d = 0; d < dim; ++d) {
    xi_[d].resize(size_);
    x_[d].resize(size_);
    lattice_[d].resize(size_);
  }
  Index stride = size_;
  for (int d = 0; d < dim; ++d) {
    stride /= n;
    for (Index i = 0; i < size_; ++i) {
      const int j = static_cast<int>((i / stride) % n);
      const int k = j < n / 2 ? j : j - n;
      lattice_[d][i] = k;
      xi_[d][i] = dk * k;
      x_[d][i] = -0.5 * length_ + j * h;
      if (3 * std::abs(k) > n) dealias_mask_[i] = 0.0;
    }
    xi2_ += xi_[d].square();
  }
  xi_abs_ = xi2_.sqrt();

  std::vector<int> dims(dim, n);
  std::vector<fftw_complex> scratch_in(size_), scratch_out(size_);
  std::lock_guard<std::mutex> lock(planner_mutex());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  plan_forward_ = fftw_plan_dft(dim, dims.data(), scratch_in.data(),
                                scratch_out.data(), FFTW_FORWARD, flags);
  plan_inverse_ = fftw_plan_dft(dim, dims.data(), scratch_in.data(),
                                scratch_out.data(), FFTW_BACKWARD, flags);
}

TorusGrid::~TorusGrid() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(plan_forward_));
  fftw_destroy_plan(static_cast<fftw_plan>(plan_inverse_));
}

double TorusGrid::cell_volume() const { return std::pow(dx(), dim_); }
double TorusGrid::volume() const { return std::pow(length_, dim_); }
double TorusGrid::nyquist() const { return std::numbers::pi * n_ / length_; }
double TorusGrid::frequency_step() const {
  return 2.0 * std::numbers::pi / length_;
}

std::vector<int> TorusGrid::unravel(Index i) const {
  std::vector<int> node(dim_);
  for (int d = dim_ - 1; d >= 0; --d) {
    node[d] = static_cast<int>(i % n_);
    i /= n_;
  }
  return node;
}

Index TorusGrid::ravel(const std::vector<int>& node) const {
  Index i = 0;
  for (int d = 0; d < dim_; ++d) i = i * n_ + ((node[d] % n_) + n_) % n_;
  return i;
}

void TorusGrid::forward(const cplx* in, cplx* out) const {
  fftw_execute_dft(static_cast<fftw_plan>(plan_forward_),
                   reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
  Eigen::Map<ArrayXcd>(out, size_) *= 1.0 / std::sqrt(double(size_));
}

void TorusGrid::inverse(const cplx* in, cplx* out) const {
  fftw_execute_dft(static_cast<fftw_plan>(plan_inverse_),
                   reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
  Eigen::Map<ArrayXcd>(out, size_) *= 1.0 / std::sqrt(double(size_));
}

GridPtr make_grid(int dim, int n, double box_length) {
  return std::make_shared<const TorusGrid>(dim, n, box_length);
}

// ---------------------------------------------------------------- Field

Field::Field(GridPtr grid) : grid_(std::move(grid)) {
  values_ = ArrayXcd::Zero(grid_->size());
  coeffs_ = ArrayXcd::Zero(grid_->size());
  has_values_ = has_coeffs_ = true;
}

Field Field::from_values(GridPtr grid, ArrayXcd values) {
  if (values.size() != grid->size())
    throw Error(ErrorCode::InvalidArgument, "value array size mismatch");
  Field f;
  f.grid_ = std::move(grid);
  f.values_ = std::move(values);
  f.has_values_ = true;
  return f;
}

Field Field::from_coefficients(GridPtr grid, ArrayXcd coefficients) {
  if (coefficients.size() != grid->size())
    throw Error(ErrorCode::InvalidArgument, "coefficient array size mismatch");
  Field f;
  f.grid_ = std::move(grid);
  f.coeffs_ = std::move(coefficients);
  f.has_coeffs_ = true;
  return f;
}

Field Field::from_real(GridPtr grid, const ArrayXd& values) {
  return from_values(std::move(grid), values.cast<cplx>());
}

const ArrayXcd& Field::values() const {
  if (!has_values_) {
    values_.resize(grid_->size());
    grid_->inverse(coeffs_.data(), values_.data());
    has_values_ = true;
  }
  return values_;
}

const ArrayXcd& Field::coefficients() const {
  if (!has_coeffs_) {
    coeffs_.resize(grid_->size());
    grid_->forward(values_.data(), coeffs_.data());
    has_coeffs_ = true;
  }
  return coeffs_;
}

ArrayXcd& Field::mutable_values() {
  values();
  has_coeffs_ = false;
  return values_;
}

ArrayXcd& Field::mutable_coefficients() {
  coefficients();
  has_values_ = false;
  return coeffs_;
}

Field operator+(const Field& a, const Field& b) {
  require_same_grid(a, b);
  return Field::from_values(a.grid_ptr(), a.values() + b.values());
}

Field operator-(const Field& a, const Field& b) {
  require_same_grid(a, b);
  return Field::from_values(a.grid_ptr(), a.values() - b.values());
}

Field operator*(double s, const Field& f) {
  return Field::from_values(f.grid_ptr(), s * f.values());
}

Field operator*(cplx s, const Field& f) {
  return Field::from_values(f.grid_ptr(), s * f.values());
}

Field real_part(const Field& f) {
  return Field::from_real(f.grid_ptr(), f.values().real());
}

VectorField::VectorField(GridPtr grid) {
  for (int d = 0; d < grid->dim(); ++d) components_.emplace_back(grid);
}

VectorField::VectorField(std::vector<Field> components)
    : components_(std::move(components)) {
  if (components_.empty())
    throw Error(ErrorCode::InvalidArgument, "vector field needs components");
  for (const auto& c : components_)
    if (c.grid_ptr() != components_.front().grid_ptr())
      throw Error(ErrorCode::InvalidArgument,
                  "vector components must share one grid");
}

VectorField operator+(const VectorField& a, const VectorField& b) {
  std::vector<Field> out;
  for (int d = 0; d < a.dim(); ++d) out.push_back(a[d] + b[d]);
  return VectorField(std::move(out));
}

VectorField operator-(const VectorField& a, const VectorField& b) {
  std::vector<Field> out;
  for (int d = 0; d < a.dim(); ++d) out.push_back(a[d] - b[d]);
  return VectorField(std::move(out));
}

VectorField operator*(double s, const VectorField& v) {
  std::vector<Field> out;
  for (int d = 0; d < v.dim(); ++d) out.push_back(s * v[d]);
  return VectorField(std::move(out));
}

// ---------------------------------------------------------- operators

Field apply_multiplier(Field f, const ArrayXcd& symbol) {
  const TorusGrid& g = f.grid();
  if (symbol.size() != g.size())
    throw Error(ErrorCode::InvalidArgument, "symbol size mismatch");
  if (!symbol.isFinite().all()) {
    Index bad = 0;
    while (std::isfinite(symbol[bad].real()) && std::isfinite(symbol[bad].imag()))
      ++bad;
    std::ostringstream os;
    os << "non-finite multiplier at xi = (";
    for (int d = 0; d < g.dim(); ++d) os << (d ? ", " : "") << g.xi(d)[bad];
    os << ")";
    throw Error(ErrorCode::NonFinite, os.str());
  }
  f.mutable_coefficients() *= symbol;
  return f;
}

ArrayXcd sample_symbol(const TorusGrid& g, const Symbol& symbol) {
  ArrayXcd m(g.size());
  Wavevector xi = Wavevector::Zero();
  for (Index i = 0; i < g.size(); ++i) {
    for (int d = 0; d < g.dim(); ++d) xi[d] = g.xi(d)[i];
    m[i] = symbol(xi);
  }
  return m;
}

Field apply_multiplier(Field f, const Symbol& symbol) {
  ArrayXcd m = sample_symbol(f.grid(), symbol);
  return apply_multiplier(std::move(f), m);
}

Field partial(const Field& f, int axis) {
  const TorusGrid& g = f.grid();
  if (axis < 0 || axis >= g.dim())
    throw Error(ErrorCode::InvalidArgument, "axis out of range");
  return apply_multiplier(f, cplx(0, 1) * g.xi(axis).cast<cplx>());
}

VectorField gradient(const Field& f) {
  std::vector<Field> out;
  for (int d = 0; d < f.grid().dim(); ++d) out.push_back(partial(f, d));
  return VectorField(std::move(out));
}

Field divergence(const VectorField& v) {
  const TorusGrid& g = v.grid();
  ArrayXcd acc = ArrayXcd::Zero(g.size());
  for (int d = 0; d < v.dim(); ++d)
    acc += cplx(0, 1) * g.xi(d) * v[d].coefficients();
  return Field::from_coefficients(v.grid_ptr(), std::move(acc));
}

Field laplacian(const Field& f) {
  return apply_multiplier(f, -f.grid().xi2());
}

AnyField differentiate(const AnyField& input, DiffMode mode) {
  if (mode == DiffMode::Divergence) {
    if (!std::holds_alternative<VectorField>(input))
      throw Error(ErrorCode::InvalidArgument,
                  "divergence requires a vector field");
    return divergence(std::get<VectorField>(input));
  }
  if (!std::holds_alternative<Field>(input))
    throw Error(ErrorCode::InvalidArgument,
                "gradient and laplacian require a scalar field");
  const Field& f = std::get<Field>(input);
  if (mode == DiffMode::Gradient) return gradient(f);
  return laplacian(f);
}

Field dealias(Field f) {
  f.mutable_coefficients() *= f.grid().dealias_mask();
  return f;
}

Field transform(const Field& f, Direction direction) {
  const TorusGrid& g = f.grid();
  ArrayXcd out(g.size());
  if (direction == Direction::Forward)
    g.forward(f.values().data(), out.data());
  else
    g.inverse(f.values().data(), out.data());
  return Field::from_values(f.grid_ptr(), std::move(out));
}

double l2_norm(const Field& f) {
  return std::sqrt(f.grid().cell_volume() * f.values().abs2().sum());
}

double l2_norm(const VectorField& v) {
  double s = 0.0;
  for (int d = 0; d < v.dim(); ++d) s += v[d].values().abs2().sum();
  return std::sqrt(v.grid().cell_volume() * s);
}

double sup_norm(const Field& f) { return f.values().abs().maxCoeff(); }

double sup_norm(const VectorField& v) {
  ArrayXd s = ArrayXd::Zero(v.grid().size());
  for (int d = 0; d < v.dim(); ++d) s += v[d].values().abs2();
  return std::sqrt(s.maxCoeff());
}

cplx integrate(const Field& f) {
  return f.grid().cell_volume() * f.values().sum();
}

// ----------------------------------------------------------- snapshots

namespace {

constexpr std::size_t kHeaderBytes = 64;

template <class T>
void put_le(std::string& buf, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big)
    std::reverse(bytes, bytes + sizeof(T));
  buf.append(reinterpret_cast<char*>(bytes), sizeof(T));
}

template <class T>
T get_le(const char* p) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big)
    std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

// Header: "GPWF", u32 dim, u32 n, u32 reserved, f64 L, f64 time, zero pad.
void write_snapshot(const std::string& path, const Field& f, double time) {
  const TorusGrid& g = f.grid();
  std::string buf("GPWF");
  put_le<std::uint32_t>(buf, g.dim());
  put_le<std::uint32_t>(buf, g.n());
  put_le<std::uint32_t>(buf, 0);
  put_le<double>(buf, g.box_length());
  put_le<double>(buf, time);
  buf.resize(kHeaderBytes, '\0');
  const ArrayXcd& v = f.values();
  buf.reserve(kHeaderBytes + 16 * v.size());
  for (Index i = 0; i < v.size(); ++i) {
    put_le<double>(buf, v[i].real());
    put_le<double>(buf, v[i].imag());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

Snapshot read_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path);
  std::string buf((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());
  if (buf.size() < kHeaderBytes || buf.compare(0, 4, "GPWF") != 0)
    throw Error(ErrorCode::Io, path + " is not a GPWF snapshot");
  const int dim = static_cast<int>(get_le<std::uint32_t>(buf.data() + 4));
  const int n = static_cast<int>(get_le<std::uint32_t>(buf.data() + 8));
  const double length = get_le<double>(buf.data() + 16);
  const double time = get_le<double>(buf.data() + 24);
  GridPtr grid = make_grid(dim, n, length);
  if (buf.size() != kHeaderBytes + 16 * std::size_t(grid->size()))
    throw Error(ErrorCode::Io, path + " has a truncated payload");
  ArrayXcd v(grid->size());
  const char* p = buf.data() + kHeaderBytes;
  for (Index i = 0; i < v.size(); ++i, p += 16)
    v[i] = cplx(get_le<double>(p), get_le<double>(p + 8));
  return {Field::from_values(grid, std::move(v)), time};
}

}  // namespace gpwave
