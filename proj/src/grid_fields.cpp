#include "vortexlab/grid_fields.hpp"

#include <fftw3.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

namespace vortexlab {

void Grid::validate() const {
  if (n_theta < 4 || !std::has_single_bit(static_cast<unsigned>(n_theta)))
    throw std::invalid_argument("n_theta must be a power of two >= 4");
  if (n_r < 9) throw std::invalid_argument("n_r must be >= 9");
  if (!(r_min > 0.0) || !(r_max > r_min)) throw std::invalid_argument("need 0 < r_min < r_max");
  if (!(dealias_fraction > 0.0 && dealias_fraction <= 1.0))
    throw std::invalid_argument("dealias_fraction must lie in (0,1]");
}

int Grid::kmax() const {
  // the Nyquist mode is never kept
  int k = static_cast<int>(std::floor(dealias_fraction * n_theta / 2.0 + 1e-12));
  return std::min(k, n_theta / 2 - 1);
}

std::vector<double> Grid::nodes() const {
  std::vector<double> r(n_r);
  for (int j = 0; j < n_r; ++j) r[j] = this->r(j);
  return r;
}

double Grid::dtheta() const { return 2.0 * std::numbers::pi / n_theta; }

PolarField::PolarField(const Grid& g) : grid_(g) {
  g.validate();
  kmax_ = g.kmax();
  data_.assign(static_cast<std::size_t>(kmax_ + 1) * g.n_r, cplx{});
}

cplx PolarField::mode(int k, int j) const {
  if (k > kmax_ || -k > kmax_) return {};
  return k >= 0 ? at(k, j) : std::conj(at(-k, j));
}

double PolarField::max_abs() const {
  double m = 0.0;
  for (const auto& c : data_) m = std::max(m, std::abs(c));
  return m;
}

double PolarField::l2() const {
  double s = 0.0;
  for (int k = 0; k <= kmax_; ++k)
    for (const auto& c : row(k)) s += (k == 0 ? 1.0 : 2.0) * std::norm(c);
  return std::sqrt(s);
}

PolarField& PolarField::operator+=(const PolarField& o) {
  if (!(grid_ == o.grid_)) throw std::invalid_argument("grid mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

PolarField& PolarField::operator*=(double s) {
  for (auto& c : data_) c *= s;
  return *this;
}

PolarField operator+(PolarField a, const PolarField& b) { return a += b; }
PolarField operator*(double s, PolarField a) { return a *= s; }

namespace {
std::mutex plan_mutex;
}

AngularTransform::AngularTransform(int n) : n_(n) {
  std::lock_guard lock(plan_mutex);
  std::vector<double> re(n);
  std::vector<fftw_complex> co(n / 2 + 1);
  unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  r2c_ = fftw_plan_dft_r2c_1d(n, re.data(), co.data(), flags);
  c2r_ = fftw_plan_dft_c2r_1d(n, co.data(), re.data(), flags);
}

AngularTransform::~AngularTransform() {
  std::lock_guard lock(plan_mutex);
  fftw_destroy_plan(static_cast<fftw_plan>(r2c_));
  fftw_destroy_plan(static_cast<fftw_plan>(c2r_));
}

const AngularTransform& AngularTransform::get(int n_theta) {
  static std::mutex m;
  static std::map<int, std::unique_ptr<AngularTransform>> cache;
  std::lock_guard lock(m);
  auto& p = cache[n_theta];
  if (!p) p = std::make_unique<AngularTransform>(n_theta);
  return *p;
}

void AngularTransform::forward(const double* in, cplx* out, int kmax) const {
  thread_local std::vector<double> re;
  thread_local std::vector<cplx> co;
  re.assign(in, in + n_);
  co.resize(n_ / 2 + 1);
  fftw_execute_dft_r2c(static_cast<fftw_plan>(r2c_), re.data(), reinterpret_cast<fftw_complex*>(co.data()));
  const double s = 1.0 / n_;
  for (int k = 0; k <= kmax; ++k) out[k] = co[k] * s;
  out[0] = {out[0].real(), 0.0};
}

void AngularTransform::inverse(const cplx* in, int kmax, double* out) const {
  thread_local std::vector<cplx> co;
  co.assign(n_ / 2 + 1, cplx{});
  for (int k = 0; k <= kmax; ++k) co[k] = in[k];
  co[0] = {co[0].real(), 0.0};
  fftw_execute_dft_c2r(static_cast<fftw_plan>(c2r_), reinterpret_cast<fftw_complex*>(co.data()), out);
}

void dft_inplace(std::span<cplx> x) {
  static std::mutex m;
  static std::map<std::size_t, fftw_plan> plans;
  fftw_plan p;
  {
    std::lock_guard lock(m);
    auto& q = plans[x.size()];
    if (!q) {
      std::lock_guard lock2(plan_mutex);
      std::vector<cplx> tmp(x.size());
      auto* t = reinterpret_cast<fftw_complex*>(tmp.data());
      q = fftw_plan_dft_1d(static_cast<int>(x.size()), t, t, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    p = q;
  }
  auto* d = reinterpret_cast<fftw_complex*>(x.data());
  fftw_execute_dft(p, d, d);
}

PolarField to_modes(const Grid& g, std::span<const double> samples) {
  PolarField f(g);
  if (samples.size() != static_cast<std::size_t>(g.n_theta) * g.n_r)
    throw std::invalid_argument("to_modes: sample count does not match grid");
  const auto& tr = AngularTransform::get(g.n_theta);
  const int kmax = f.kmax();
#pragma omp parallel
  {
    std::vector<double> col(g.n_theta);
    std::vector<cplx> c(kmax + 1);
#pragma omp for schedule(static)
    for (int j = 0; j < g.n_r; ++j) {
      for (int i = 0; i < g.n_theta; ++i) col[i] = samples[static_cast<std::size_t>(i) * g.n_r + j];
      tr.forward(col.data(), c.data(), kmax);
      for (int k = 0; k <= kmax; ++k) f.at(k, j) = c[k];
    }
  }
  return f;
}

std::vector<double> to_physical(const PolarField& f) {
  const Grid& g = f.grid();
  double im0 = 0.0;
  for (const auto& c : f.row(0)) im0 = std::max(im0, std::abs(c.imag()));
  if (im0 > 1e-12 * std::max(f.l2(), 1e-300) && im0 > 0.0)
    throw std::domain_error("to_physical: k=0 mode is not real (reality violated)");
  std::vector<double> out(static_cast<std::size_t>(g.n_theta) * g.n_r);
  const auto& tr = AngularTransform::get(g.n_theta);
  const int kmax = f.kmax();
#pragma omp parallel
  {
    std::vector<double> col(g.n_theta);
    std::vector<cplx> c(kmax + 1);
#pragma omp for schedule(static)
    for (int j = 0; j < g.n_r; ++j) {
      for (int k = 0; k <= kmax; ++k) c[k] = f.at(k, j);
      tr.inverse(c.data(), kmax, col.data());
      for (int i = 0; i < g.n_theta; ++i) out[static_cast<std::size_t>(i) * g.n_r + j] = col[i];
    }
  }
  return out;
}

namespace {

template <class T>
void diff1_impl(std::span<const T> f, double h, std::span<T> d) {
  const std::size_t n = f.size();
  if (n < 9) throw std::invalid_argument("radial derivative needs n_r >= 9");
  const double s = 1.0 / (12.0 * h);
  d[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) * s;
  d[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) * s;
  for (std::size_t j = 2; j + 2 < n; ++j) d[j] = (f[j - 2] - 8.0 * f[j - 1] + 8.0 * f[j + 1] - f[j + 2]) * s;
  const std::size_t m = n - 1;
  d[m] = -(-25.0 * f[m] + 48.0 * f[m - 1] - 36.0 * f[m - 2] + 16.0 * f[m - 3] - 3.0 * f[m - 4]) * s;
  d[m - 1] = -(-3.0 * f[m] - 10.0 * f[m - 1] + 18.0 * f[m - 2] - 6.0 * f[m - 3] + f[m - 4]) * s;
}

template <class T>
void diff2_impl(std::span<const T> f, double h, std::span<T> d) {
  const std::size_t n = f.size();
  if (n < 9) throw std::invalid_argument("radial derivative needs n_r >= 9");
  const double s = 1.0 / (12.0 * h * h);
  d[0] = (45.0 * f[0] - 154.0 * f[1] + 214.0 * f[2] - 156.0 * f[3] + 61.0 * f[4] - 10.0 * f[5]) * s;
  d[1] = (10.0 * f[0] - 15.0 * f[1] - 4.0 * f[2] + 14.0 * f[3] - 6.0 * f[4] + f[5]) * s;
  for (std::size_t j = 2; j + 2 < n; ++j)
    d[j] = (-f[j - 2] + 16.0 * f[j - 1] - 30.0 * f[j] + 16.0 * f[j + 1] - f[j + 2]) * s;
  const std::size_t m = n - 1;
  d[m] = (45.0 * f[m] - 154.0 * f[m - 1] + 214.0 * f[m - 2] - 156.0 * f[m - 3] + 61.0 * f[m - 4] - 10.0 * f[m - 5]) * s;
  d[m - 1] = (10.0 * f[m] - 15.0 * f[m - 1] - 4.0 * f[m - 2] + 14.0 * f[m - 3] - 6.0 * f[m - 4] + f[m - 5]) * s;
}

}  // namespace

void diff1(std::span<const cplx> f, double h, std::span<cplx> out) { diff1_impl<cplx>(f, h, out); }
void diff1(std::span<const double> f, double h, std::span<double> out) { diff1_impl<double>(f, h, out); }
void diff2(std::span<const cplx> f, double h, std::span<cplx> out) { diff2_impl<cplx>(f, h, out); }
void diff2(std::span<const double> f, double h, std::span<double> out) { diff2_impl<double>(f, h, out); }

PolarField radial_derivative(const PolarField& f, int order) {
  if (order != 1 && order != 2) throw std::invalid_argument("radial_derivative: order must be 1 or 2");
  PolarField d(f.grid());
  const double h = f.grid().h();
#pragma omp parallel for schedule(static)
  for (int k = 0; k <= f.kmax(); ++k) {
    if (order == 1)
      diff1(f.row(k), h, d.row(k));
    else
      diff2(f.row(k), h, d.row(k));
  }
  return d;
}

void write_snapshot(const std::string& path, const SnapHeader& h, std::span<const double> payload) {
  if (payload.size() != static_cast<std::size_t>(h.n_theta) * h.n_r)
    throw std::invalid_argument("snapshot payload size does not match header");
  nlohmann::json j = {{"n_theta", h.n_theta}, {"n_r", h.n_r},   {"r_min", h.r_min},
                      {"r_max", h.r_max},     {"time", h.time}, {"quantity", h.quantity}};
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  os << j.dump() << '\n';
  static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);
  for (double x : payload) {
    auto u = std::bit_cast<std::uint64_t>(x);
    if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap64(u);
    os.write(reinterpret_cast<const char*>(&u), 8);
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

std::vector<double> read_snapshot(const std::string& path, SnapHeader& h) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::string line;
  std::getline(is, line);
  auto j = nlohmann::json::parse(line);
  h.n_theta = j.at("n_theta");
  h.n_r = j.at("n_r");
  h.r_min = j.at("r_min");
  h.r_max = j.at("r_max");
  h.time = j.at("time");
  h.quantity = j.at("quantity");
  std::vector<double> v(static_cast<std::size_t>(h.n_theta) * h.n_r);
  for (auto& x : v) {
    std::uint64_t u;
    is.read(reinterpret_cast<char*>(&u), 8);
    if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap64(u);
    x = std::bit_cast<double>(u);
  }
  if (!is) throw std::runtime_error("truncated snapshot " + path);
  return v;
}

}  // namespace vortexlab
