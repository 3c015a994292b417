#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace vortexlab {

using cplx = std::complex<double>;

struct Grid {
  int n_theta = 256;
  int n_r = 1024;
  double r_min = 0.05;
  double r_max = 16.0;
  double dealias_fraction = 2.0 / 3.0;

  void validate() const;
  int kmax() const;  // largest retained |k|
  double h() const { return (r_max - r_min) / (n_r - 1); }
  double r(int j) const { return r_min + j * h(); }
  std::vector<double> nodes() const;
  double dtheta() const;
  bool operator==(const Grid&) const = default;
};

// Half-spectrum storage: rows k = 0..kmax, negative k implied by conjugation.
class PolarField {
 public:
  PolarField() = default;
  explicit PolarField(const Grid& g);

  const Grid& grid() const { return grid_; }
  int kmax() const { return kmax_; }
  int n_r() const { return grid_.n_r; }

  cplx& at(int k, int j) { return data_[static_cast<std::size_t>(k) * grid_.n_r + j]; }
  const cplx& at(int k, int j) const { return data_[static_cast<std::size_t>(k) * grid_.n_r + j]; }
  // any k, with modes(-k) = conj(modes(k)) and zero beyond the cutoff
  cplx mode(int k, int j) const;

  std::span<cplx> row(int k) { return {data_.data() + static_cast<std::size_t>(k) * grid_.n_r, static_cast<std::size_t>(grid_.n_r)}; }
  std::span<const cplx> row(int k) const { return {data_.data() + static_cast<std::size_t>(k) * grid_.n_r, static_cast<std::size_t>(grid_.n_r)}; }
  std::vector<cplx>& data() { return data_; }
  const std::vector<cplx>& data() const { return data_; }

  double max_abs() const;
  // sqrt(sum_k sum_j |f_k|^2) over the full spectrum (k and -k)
  double l2() const;

  PolarField& operator+=(const PolarField& o);
  PolarField& operator*=(double s);

 private:
  Grid grid_{};
  int kmax_ = 0;
  std::vector<cplx> data_;
};

PolarField operator+(PolarField a, const PolarField& b);
PolarField operator*(double s, PolarField a);

// Cached FFTW plans for one grid.  Execution is thread-safe.
class AngularTransform {
 public:
  explicit AngularTransform(int n_theta);
  ~AngularTransform();
  AngularTransform(const AngularTransform&) = delete;
  AngularTransform& operator=(const AngularTransform&) = delete;

  int n() const { return n_; }
  // real samples (n) -> coefficients c_k = (1/n) sum f e^{-ik theta}, k = 0..kmax
  void forward(const double* in, cplx* out, int kmax) const;
  // coefficients k = 0..kmax -> real samples (n); Im c_0 ignored
  void inverse(const cplx* in, int kmax, double* out) const;

  static const AngularTransform& get(int n_theta);

 private:
  int n_;
  void* r2c_ = nullptr;
  void* c2r_ = nullptr;
};

// unnormalised forward complex DFT, X_m = sum_j x_j e^{-2 pi i j m / n}
void dft_inplace(std::span<cplx> x);

// physical samples laid out (theta, r) row-major: index i_theta * n_r + j
PolarField to_modes(const Grid& g, std::span<const double> samples);
std::vector<double> to_physical(const PolarField& f);

PolarField radial_derivative(const PolarField& f, int order);
// 4th-order stencils on a uniform grid with spacing h; n >= 9
void diff1(std::span<const cplx> f, double h, std::span<cplx> out);
void diff1(std::span<const double> f, double h, std::span<double> out);
void diff2(std::span<const cplx> f, double h, std::span<cplx> out);
void diff2(std::span<const double> f, double h, std::span<double> out);

struct VortexState {
  double P1 = 0.0, P2 = 0.0;
  double kappa = 1.0;
  double c0 = 0.0;
};

// .snap: one-line JSON header, newline, little-endian float64 payload
struct SnapHeader {
  int n_theta = 0;
  int n_r = 0;
  double r_min = 0.0;
  double r_max = 0.0;
  double time = 0.0;
  std::string quantity;
};

void write_snapshot(const std::string& path, const SnapHeader& h, std::span<const double> payload);
std::vector<double> read_snapshot(const std::string& path, SnapHeader& h);

}  // namespace vortexlab
