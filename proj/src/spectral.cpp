#include "spectral.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <thread>
#include <utility>

namespace vsoliton::spectral {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

void init_threads_once() {
#ifdef VSOLITON_FFTW_THREADS
  static const bool done = [] {
    fftw_init_threads();
    unsigned hw = std::thread::hardware_concurrency();
    fftw_plan_with_nthreads(hw == 0 ? 1 : static_cast<int>(hw));
    return true;
  }();
  (void)done;
#endif
}

}  // namespace

struct Plans::Impl {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

Plans::Plans(const GridSpec& grid) : impl_(new Impl) {
  const int d = grid.dims();
  int shape[4];
  for (int a = 0; a < d; ++a) shape[a] = grid.N();
  const std::size_t n_real = grid.size();
  const std::size_t n_half = half_size(grid);

  // Plan on scratch buffers with the same alignment as field storage.
  AlignedVector<double> real_buf(n_real);
  AlignedVector<cplx> half_buf(n_half);
  AlignedVector<cplx> full_a(n_real);
  AlignedVector<cplx> full_b(n_real);
  auto* half = reinterpret_cast<fftw_complex*>(half_buf.data());
  auto* fa = reinterpret_cast<fftw_complex*>(full_a.data());
  auto* fb = reinterpret_cast<fftw_complex*>(full_b.data());
  const unsigned flags = FFTW_ESTIMATE;
  impl_->r2c = fftw_plan_dft_r2c(d, shape, real_buf.data(), half, flags);
  impl_->c2r = fftw_plan_dft_c2r(d, shape, half, real_buf.data(), flags);
  impl_->fwd = fftw_plan_dft(d, shape, fa, fb, FFTW_FORWARD, flags);
  impl_->bwd = fftw_plan_dft(d, shape, fa, fb, FFTW_BACKWARD, flags);
}

Plans::~Plans() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(impl_->r2c);
  fftw_destroy_plan(impl_->c2r);
  fftw_destroy_plan(impl_->fwd);
  fftw_destroy_plan(impl_->bwd);
  delete impl_;
}

const Plans& Plans::get(const GridSpec& grid) {
  static std::map<std::pair<int, int>, std::unique_ptr<Plans>> cache;
  std::lock_guard<std::mutex> lock(planner_mutex());
  init_threads_once();
  auto key = std::make_pair(grid.n(), grid.N());
  auto it = cache.find(key);
  if (it == cache.end()) {
    it = cache.emplace(key, std::unique_ptr<Plans>(new Plans(grid))).first;
  }
  return *it->second;
}

void Plans::r2c(const double* in, cplx* out) const {
  fftw_execute_dft_r2c(impl_->r2c, const_cast<double*>(in), reinterpret_cast<fftw_complex*>(out));
}

void Plans::c2r(cplx* in, double* out) const {
  fftw_execute_dft_c2r(impl_->c2r, reinterpret_cast<fftw_complex*>(in), out);
}

void Plans::forward(const cplx* in, cplx* out) const {
  fftw_execute_dft(impl_->fwd, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

void Plans::backward(const cplx* in, cplx* out) const {
  fftw_execute_dft(impl_->bwd, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

std::size_t half_size(const GridSpec& grid) {
  return grid.size() / static_cast<std::size_t>(grid.N()) * static_cast<std::size_t>(grid.N() / 2 + 1);
}

std::vector<double> axis_wavenumbers(const GridSpec& grid) {
  const int N = grid.N();
  const double base = 2.0 * std::numbers::pi / grid.period();
  std::vector<double> k(N);
  for (int i = 0; i < N; ++i) {
    k[i] = (i == N / 2) ? 0.0 : base * signed_mode(i, N);
  }
  return k;
}

Spectrum forward_real(const RealField& f) {
  Spectrum out(half_size(f.grid()));
  Plans::get(f.grid()).r2c(f.data(), out.data());
  return out;
}

Spectrum forward_complex(const ComplexField& f) {
  Spectrum out(f.size());
  Plans::get(f.grid()).forward(f.data(), out.data());
  return out;
}

ComplexField wirtinger(const GridSpec& grid, const Spectrum& full, std::initializer_list<int> holo,
                       std::initializer_list<int> anti) {
  return inverse_complex(grid, full, [&](const double* k) {
    cplx s = 1.0;
    for (int j : holo) s *= dz_symbol(k, j);
    for (int j : anti) s *= dzbar_symbol(k, j);
    return s;
  });
}

HermitianField ddbar_from_spectrum(const GridSpec& grid, const Spectrum& fhat) {
  HermitianField h(grid);
  Spectrum scratch(fhat.size());
  for (std::size_t c = 0; c < h.num_components(); ++c) {
    const int comp = static_cast<int>(c);
    inverse_real_into(
        grid, fhat, [comp](const double* k) { return ddbar_component_symbol(k, comp); }, scratch,
        h.raw(c).data());
  }
  return h;
}

}  // namespace vsoliton::spectral
