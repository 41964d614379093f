#pragma once

#include <fftw3.h>

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <new>
#include <utility>

namespace lcpa::fft {

// Thin RAII layer over FFTW's real-to-complex transforms. Plans are built
// once per size with FFTW_ESTIMATE and cached; execution goes through the
// new-array interface, which FFTW guarantees to be thread-safe as long as
// buffers come from fftw_malloc (same alignment as at planning time).
// Transforms run in place to halve the working set.

template <typename Real>
struct Api;

template <>
struct Api<float> {
  using complex = fftwf_complex;
  using plan = fftwf_plan;
  static plan forward(int n, float* in, complex* out) { return fftwf_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE); }
  static plan backward(int n, complex* in, float* out) { return fftwf_plan_dft_c2r_1d(n, in, out, FFTW_ESTIMATE); }
  static void run(plan p, float* in, complex* out) { fftwf_execute_dft_r2c(p, in, out); }
  static void run(plan p, complex* in, float* out) { fftwf_execute_dft_c2r(p, in, out); }
  static void destroy(plan p) { fftwf_destroy_plan(p); }
};

template <>
struct Api<double> {
  using complex = fftw_complex;
  using plan = fftw_plan;
  static plan forward(int n, double* in, complex* out) { return fftw_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE); }
  static plan backward(int n, complex* in, double* out) { return fftw_plan_dft_c2r_1d(n, in, out, FFTW_ESTIMATE); }
  static void run(plan p, double* in, complex* out) { fftw_execute_dft_r2c(p, in, out); }
  static void run(plan p, complex* in, double* out) { fftw_execute_dft_c2r(p, in, out); }
  static void destroy(plan p) { fftw_destroy_plan(p); }
};

// Scratch memory from fftw_malloc, so it has the alignment FFTW planned
// with. Grows on demand and keeps its pages between uses.
class Scratch {
 public:
  Scratch() = default;
  ~Scratch() { fftw_free(data_); }
  Scratch(Scratch&& o) noexcept : data_(std::exchange(o.data_, nullptr)), bytes_(std::exchange(o.bytes_, 0)) {}
  Scratch& operator=(Scratch&& o) noexcept {
    std::swap(data_, o.data_);
    std::swap(bytes_, o.bytes_);
    return *this;
  }

  template <typename T>
  T* get(std::size_t count) {
    const std::size_t need = sizeof(T) * (count == 0 ? 1 : count);
    if (need > bytes_) {
      fftw_free(data_);
      data_ = nullptr;
      bytes_ = 0;
      data_ = fftw_malloc(need);
      if (data_ == nullptr) throw std::bad_alloc();
      bytes_ = need;
    }
    return static_cast<T*>(data_);
  }

 private:
  void* data_ = nullptr;
  std::size_t bytes_ = 0;
};

// Reals needed for an in-place r2c transform of n points.
inline constexpr std::size_t inplace_reals(std::size_t n) { return 2 * (n / 2 + 1); }

// In-place real transforms of one size: the spectrum overwrites the input
// buffer, which must hold inplace_reals(n) values.
template <typename Real>
class Plan {
 public:
  using complex = typename Api<Real>::complex;

  explicit Plan(std::size_t n) : n_(n) {
    Scratch probe;
    Real* buf = probe.get<Real>(inplace_reals(n));
    auto* spec = reinterpret_cast<complex*>(buf);
    forward_ = Api<Real>::forward(static_cast<int>(n), buf, spec);
    backward_ = Api<Real>::backward(static_cast<int>(n), spec, buf);
  }
  ~Plan() {
    Api<Real>::destroy(forward_);
    Api<Real>::destroy(backward_);
  }
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;

  std::size_t size() const noexcept { return n_; }

  void forward(Real* buf) const { Api<Real>::run(forward_, buf, reinterpret_cast<complex*>(buf)); }
  // Unnormalized: the result is N times the inverse DFT.
  void backward(Real* buf) const { Api<Real>::run(backward_, reinterpret_cast<complex*>(buf), buf); }

  static const Plan& cached(std::size_t n) {
    static std::mutex mu;
    static std::map<std::size_t, std::unique_ptr<Plan>> cache;
    std::lock_guard lock(mu);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<Plan>(n);
    return *slot;
  }

 private:
  std::size_t n_;
  typename Api<Real>::plan forward_{};
  typename Api<Real>::plan backward_{};
};

}  // namespace lcpa::fft
