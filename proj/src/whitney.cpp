#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "wcomm/operators.hpp"

namespace wcomm {

namespace {

double smooth_step(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / u);
  const double b = std::exp(-1.0 / (1.0 - u));
  return a / (a + b);
}

// One-dimensional window: 1 on [-1/2, 1/2], 0 outside [-(1+eps)/2, (1+eps)/2].
double window(double t, double eps) { return 1.0 - smooth_step((std::abs(t) - 0.5) / (0.5 * eps)); }

}  // namespace

Complex WhitneyCoefficients::at(std::span<const int> l) const {
  const int width = 2 * max_frequency + 1;
  std::size_t flat = 0;
  for (int v : l) {
    if (std::abs(v) > max_frequency) throw std::out_of_range("frequency outside the table");
    flat = flat * width + static_cast<std::size_t>(v + max_frequency);
  }
  return upsilon[flat];
}

std::vector<double> WhitneyCoefficients::shell(int radius) const {
  const int width = 2 * max_frequency + 1;
  std::vector<double> out;
  for (std::size_t flat = 0; flat < upsilon.size(); ++flat) {
    std::size_t rest = flat;
    int linf = 0;
    for (int c = 0; c < 2 * n; ++c) {
      linf = std::max(linf, std::abs(static_cast<int>(rest % width) - max_frequency));
      rest /= width;
    }
    if (linf == radius) out.push_back(std::abs(upsilon[flat]));
  }
  return out;
}

WhitneyCoefficients whitney_kernel_coefficients(const WhitneyPair& pair, int direction, int max_frequency,
                                                double enlargement, int samples,
                                                RieszSpec::Normalization norm) {
  const DyadicCube& q = pair.first;
  const DyadicCube& r = pair.second;
  const int n = q.n;
  if (direction < 1 || direction > n) throw std::invalid_argument("Riesz direction out of range");
  if (!(enlargement > 0.0)) throw std::invalid_argument("window enlargement must be positive");
  if (2 * max_frequency + 1 > samples) throw std::invalid_argument("too few quadrature samples");

  const double side = q.length();
  const double win = (1.0 + enlargement) * side;
  // Lift the second cube to the translate nearest the first and work in R^n.
  std::array<double, kMaxDim> cq{}, cr{};
  double sep_inf = 0.0;
  for (int i = 0; i < n; ++i) {
    cq[i] = (q.anchor[i] + 0.5 * q.side) / q.grid_side;
    double d = (r.anchor[i] + 0.5 * r.side) / r.grid_side - cq[i];
    d -= std::round(d);
    cr[i] = cq[i] + d;
    sep_inf = std::max(sep_inf, std::abs(d));
  }
  if (sep_inf <= win) throw std::invalid_argument("enlarged windows overlap the diagonal");

  const int dims2 = 2 * n;
  std::vector<int> dims(dims2, samples);
  std::size_t total = 1;
  for (int i = 0; i < dims2; ++i) total *= static_cast<std::size_t>(samples);

  auto node = [&](int a) { return (a + 0.5) / samples - 0.5; };
  std::vector<Complex> data(total);
  std::vector<double> kernel(total);
  std::vector<char> interior(total);
  std::array<double, kMaxDim> disp{};
  double direct_sum = 0.0;
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rest = flat;
    std::array<int, 2 * kMaxDim> a{};
    for (int c = dims2 - 1; c >= 0; --c) {
      a[c] = static_cast<int>(rest % samples);
      rest /= samples;
    }
    double eta = 1.0;
    bool inside = true;
    for (int i = 0; i < n; ++i) {
      const double tx = node(a[i]);
      const double ty = node(a[n + i]);
      disp[i] = (cq[i] + win * tx) - (cr[i] + win * ty);
      eta *= window((1.0 + enlargement) * tx, enlargement) * window((1.0 + enlargement) * ty, enlargement);
      inside = inside && std::abs((1.0 + enlargement) * tx) <= 0.5 && std::abs((1.0 + enlargement) * ty) <= 0.5;
    }
    const double k = riesz_kernel(std::span<const double>(disp.data(), n), direction, norm);
    kernel[flat] = k;
    interior[flat] = inside;
    data[flat] = k * eta;
    direct_sum += k * eta;
  }

  std::vector<Complex> spectrum = data;
  dft_inplace(spectrum, dims, -1);
  const double inv_total = 1.0 / static_cast<double>(total);

  WhitneyCoefficients out;
  out.max_frequency = max_frequency;
  out.n = n;
  out.enlargement = enlargement;
  out.zero_mode_average = direct_sum * inv_total;
  const int width = 2 * max_frequency + 1;
  std::size_t table = 1;
  for (int c = 0; c < dims2; ++c) table *= static_cast<std::size_t>(width);
  out.upsilon.resize(table);
  const double scale = std::sqrt(q.volume()) * std::sqrt(r.volume());

  std::vector<Complex> truncated(total, 0.0);
  for (std::size_t t = 0; t < table; ++t) {
    std::size_t rest = t;
    std::array<int, 2 * kMaxDim> l{};
    for (int c = dims2 - 1; c >= 0; --c) {
      l[c] = static_cast<int>(rest % width) - max_frequency;
      rest /= width;
    }
    std::size_t idx = 0;
    double phase = 0.0;
    for (int c = 0; c < dims2; ++c) {
      idx = idx * samples + static_cast<std::size_t>((l[c] + samples) % samples);
      phase += l[c] * (0.5 / samples - 0.5);
    }
    const Complex raw = spectrum[idx] * inv_total;
    const Complex coeff = raw * std::polar(1.0, -2.0 * std::numbers::pi * phase);
    out.upsilon[t] = scale * coeff;
    truncated[idx] = raw;
  }

  dft_inplace(truncated, dims, +1);
  double err = 0.0, ref = 0.0;
  for (std::size_t flat = 0; flat < total; ++flat) {
    if (!interior[flat]) continue;
    const double d = truncated[flat].real() - kernel[flat];
    err += d * d;
    ref += kernel[flat] * kernel[flat];
  }
  out.reconstruction_error = ref > 0.0 ? std::sqrt(err / ref) : 0.0;
  return out;
}

}  // namespace wcomm
