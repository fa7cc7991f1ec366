#include "wcomm/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <mutex>
#include <stdexcept>

namespace wcomm {

namespace {

// FFTW planning is not thread-safe; execution on distinct buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n) : ptr(fftw_alloc_complex(n)), size(n) {
    if (!ptr) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(ptr); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  fftw_complex* ptr;
  std::size_t size;
};

}  // namespace

void dft_inplace(std::vector<Complex>& data, std::span<const int> dims, int sign) {
  std::size_t total = 1;
  for (int d : dims) total *= static_cast<std::size_t>(d);
  if (total != data.size()) throw std::invalid_argument("DFT size mismatch");
  FftwBuffer buf(total);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), buf.ptr, buf.ptr,
                         sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  if (!plan) throw std::runtime_error("FFTW planning failed");
  std::memcpy(buf.ptr, data.data(), total * sizeof(fftw_complex));
  fftw_execute(plan);
  std::memcpy(static_cast<void*>(data.data()), buf.ptr, total * sizeof(fftw_complex));
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(plan);
}

int centered_frequency(int index, int N) { return index <= N / 2 ? index : index - N; }

GridFunction apply_multiplier(const GridFunction& f, const std::function<Complex(const IVec&)>& symbol) {
  const TorusGrid& g = f.grid();
  std::vector<int> dims(g.dim(), g.side());
  std::vector<Complex> data(f.values().begin(), f.values().end());
  dft_inplace(data, dims, -1);
  for (std::size_t c = 0; c < data.size(); ++c) {
    IVec idx = g.unflatten(c);
    for (int i = 0; i < g.dim(); ++i) idx[i] = centered_frequency(idx[i], g.side());
    data[c] *= symbol(idx);
  }
  dft_inplace(data, dims, +1);
  GridFunction out(g);
  const double scale = 1.0 / static_cast<double>(data.size());
  for (std::size_t c = 0; c < data.size(); ++c) out[c] = data[c].real() * scale;
  return out;
}

GridFunction circular_convolution(const GridFunction& f, std::span<const double> kernel) {
  const TorusGrid& g = f.grid();
  if (kernel.size() != f.size()) throw std::invalid_argument("kernel size mismatch");
  std::vector<int> dims(g.dim(), g.side());
  std::vector<Complex> a(f.values().begin(), f.values().end());
  std::vector<Complex> k(kernel.begin(), kernel.end());
  dft_inplace(a, dims, -1);
  dft_inplace(k, dims, -1);
  for (std::size_t c = 0; c < a.size(); ++c) a[c] *= k[c];
  dft_inplace(a, dims, +1);
  GridFunction out(g);
  const double scale = g.cell_volume() / static_cast<double>(a.size());
  for (std::size_t c = 0; c < a.size(); ++c) out[c] = a[c].real() * scale;
  return out;
}

}  // namespace wcomm
