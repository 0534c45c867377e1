#pragma once

// Periodic torus lattice plus the FFTW plans that go with it.
//
// Coefficient convention: u(x) = sum_k uhat(k) exp(i k.x), so
// uhat(k) = N^{-1} sum_x u(x) exp(-i k.x) and the L2 norm squared of u is
// V * sum_k |uhat(k)|^2 (V = L^dim, N = n^dim).
//
// Storage is row-major in the lattice index (ix, iy[, iz]); index i maps to
// the signed wavenumber m = i for i < n/2 and m = i - n otherwise, so the
// Nyquist index n/2 carries m = -n/2.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <vector>

#include <fftw3.h>

#include "bf/error.hpp"

namespace bf {

using cplx = std::complex<double>;
using Lattice = std::array<int, 3>;

namespace detail {

// FFTW's planner is not re-entrant; execution on distinct arrays is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

class FftPlans {
 public:
  FftPlans(int dim, int n) {
    std::array<int, 3> dims{n, n, n};
    std::size_t total = 1;
    for (int d = 0; d < dim; ++d) total *= static_cast<std::size_t>(n);
    std::vector<cplx> a(total);
    auto* pa = reinterpret_cast<fftw_complex*>(a.data());
    // FFTW_UNALIGNED keeps the codelet choice independent of where the caller's
    // buffers live, so repeated runs are bit-identical. Plans are in-place, and
    // new-array execution must be in-place too.
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    std::lock_guard lock(fftw_planner_mutex());
    forward_ = fftw_plan_dft(dim, dims.data(), pa, pa, FFTW_FORWARD, flags);
    backward_ = fftw_plan_dft(dim, dims.data(), pa, pa, FFTW_BACKWARD, flags);
    if (forward_ == nullptr || backward_ == nullptr)
      throw NumericalFailure("FFTW planning failed");
  }
  FftPlans(const FftPlans&) = delete;
  FftPlans& operator=(const FftPlans&) = delete;
  ~FftPlans() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }

  void forward(cplx* data) const {
    auto* p = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(forward_, p, p);
  }
  void backward(cplx* data) const {
    auto* p = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(backward_, p, p);
  }

 private:
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

}  // namespace detail

class Grid {
 public:
  Grid(int dim, int n, double length) : dim_(dim), n_(n), length_(length) {
    if (dim != 2 && dim != 3) throw ContractViolation("grid dim must be 2 or 3");
    if (n < 4 || (n & (n - 1)) != 0)
      throw ContractViolation("grid n must be a power of two >= 4");
    if (!(length > 0.0) || !std::isfinite(length))
      throw ContractViolation("grid length must be positive and finite");
    size_ = 1;
    for (int d = 0; d < dim; ++d) size_ *= static_cast<std::size_t>(n);
    k0_ = 2.0 * std::numbers::pi / length;

    lattice_.resize(size_);
    ksq_.resize(size_);
    kderiv_.resize(size_);
    conj_.resize(size_);
    band_.resize(size_);
    for (std::size_t idx = 0; idx < size_; ++idx) {
      std::size_t rem = idx;
      Lattice m{0, 0, 0};
      for (int d = dim - 1; d >= 0; --d) {
        const int i = static_cast<int>(rem % static_cast<std::size_t>(n));
        rem /= static_cast<std::size_t>(n);
        m[static_cast<std::size_t>(d)] = i < n / 2 ? i : i - n;
      }
      lattice_[idx] = m;
      double s = 0.0;
      bool inband = true;
      std::array<double, 3> kd{0.0, 0.0, 0.0};
      for (int d = 0; d < dim; ++d) {
        const int md = m[static_cast<std::size_t>(d)];
        s += static_cast<double>(md) * md;
        if (3 * std::abs(md) > n) inband = false;
        // Odd derivatives of the Nyquist mode are set to zero so they map
        // real fields to real fields.
        kd[static_cast<std::size_t>(d)] = (2 * std::abs(md) == n) ? 0.0 : k0_ * md;
      }
      ksq_[idx] = s * k0_ * k0_;
      kderiv_[idx] = kd;
      band_[idx] = inband;
      conj_[idx] = index_of({-m[0], -m[1], -m[2]});
    }
    plans_ = std::make_shared<detail::FftPlans>(dim, n);
  }

  int dim() const noexcept { return dim_; }
  int n() const noexcept { return n_; }
  double length() const noexcept { return length_; }
  std::size_t size() const noexcept { return size_; }
  double volume() const noexcept { return std::pow(length_, dim_); }
  /// Wavenumber unit 2 pi / L.
  double k0() const noexcept { return k0_; }
  /// Smallest nonzero |k|^2 on the lattice, i.e. the first Stokes eigenvalue.
  double lambda1() const noexcept { return k0_ * k0_; }

  const Lattice& lattice(std::size_t idx) const { return lattice_[idx]; }
  /// Physical |k|^2.
  double ksq(std::size_t idx) const { return ksq_[idx]; }
  const std::vector<double>& ksq() const noexcept { return ksq_; }
  /// Physical wavevector used for first derivatives (Nyquist component zeroed).
  const std::array<double, 3>& kderiv(std::size_t idx) const { return kderiv_[idx]; }
  /// Index of the lattice point -m.
  std::size_t conjugate_index(std::size_t idx) const { return conj_[idx]; }
  /// True when every |m_i| <= n/3 (two-thirds rule).
  bool in_band(std::size_t idx) const { return band_[idx]; }

  std::size_t index_of(const Lattice& m) const {
    std::size_t idx = 0;
    for (int d = 0; d < dim_; ++d) {
      int i = m[static_cast<std::size_t>(d)] % n_;
      if (i < 0) i += n_;
      idx = idx * static_cast<std::size_t>(n_) + static_cast<std::size_t>(i);
    }
    return idx;
  }

  /// Physical coordinate of collocation point idx along axis d.
  double coordinate(std::size_t idx, int d) const {
    std::size_t rem = idx;
    for (int e = dim_ - 1; e > d; --e) rem /= static_cast<std::size_t>(n_);
    return length_ * static_cast<double>(rem % static_cast<std::size_t>(n_)) / n_;
  }

  bool same_as(const Grid& other) const noexcept {
    return dim_ == other.dim_ && n_ == other.n_ && length_ == other.length_;
  }

  /// Physical values (complex buffer) to normalized coefficients, in place.
  void forward(std::span<cplx> data) const {
    plans_->forward(data.data());
    const double scale = 1.0 / static_cast<double>(size_);
    for (auto& c : data) c *= scale;
  }
  /// Coefficients to physical values, in place.
  void backward(std::span<cplx> data) const { plans_->backward(data.data()); }

 private:
  int dim_;
  int n_;
  double length_;
  std::size_t size_ = 0;
  double k0_ = 0.0;
  std::vector<Lattice> lattice_;
  std::vector<double> ksq_;
  std::vector<std::array<double, 3>> kderiv_;
  std::vector<std::size_t> conj_;
  std::vector<bool> band_;
  std::shared_ptr<const detail::FftPlans> plans_;
};

using GridPtr = std::shared_ptr<const Grid>;

inline GridPtr make_grid(int dim, int n, double length) {
  return std::make_shared<const Grid>(dim, n, length);
}

}  // namespace bf
