#include "wcomm/function_spaces.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wcomm/fft.hpp"
#include "wcomm/haar.hpp"

namespace wcomm {

std::string to_string(OscVariant v) {
  switch (v) {
    case OscVariant::l1_nu: return "L1-nu";
    case OscVariant::l2_lambda_mu: return "L2-lambda-over-mu";
    case OscVariant::l2_muinv_lambdainv: return "L2-muinv-over-lambdainv";
  }
  return "unknown";
}

std::string to_string(BesovForm f) {
  switch (f) {
    case BesovForm::average: return "average";
    case BesovForm::haar: return "haar";
    case BesovForm::martingale_l1_nu: return "martingale-L1nu";
    case BesovForm::martingale_l2_lambda_mu: return "martingale-L2lambda-mu";
    case BesovForm::martingale_l2_muinv_lambdainv: return "martingale-L2muinv-lambdainv";
  }
  return "unknown";
}

namespace {

void require_grid(const GridFunction& b, const TorusGrid& g) {
  if (!(b.grid() == g)) throw std::invalid_argument("grid mismatch");
}

struct WindowStats {
  double l1 = 0.0;         // integral of |b - avg|
  double l2_lambda = 0.0;  // integral of |b - avg|^2 lambda
  double l2_muinv = 0.0;   // integral of |b - avg|^2 mu^{-1}
};

WindowStats window_stats(const GridFunction& b, const std::vector<std::size_t>& cells,
                         const WeightPair* weights) {
  double mean = 0.0;
  for (std::size_t c : cells) mean += b[c];
  mean /= static_cast<double>(cells.size());
  const double vol = b.grid().cell_volume();
  WindowStats s;
  for (std::size_t c : cells) {
    const double d = b[c] - mean;
    s.l1 += std::abs(d);
    if (weights) {
      s.l2_lambda += d * d * weights->lambda[c];
      s.l2_muinv += d * d * weights->mu_inv[c];
    }
  }
  s.l1 *= vol;
  s.l2_lambda *= vol;
  s.l2_muinv *= vol;
  return s;
}

}  // namespace

OscillationReport oscillation_sequence(const GridFunction& b, const WeightPair& weights,
                                       const DyadicSystem& system, double c, OscVariant variant) {
  require_grid(b, system.grid());
  require_grid(weights.mu.as_function(), system.grid());
  std::vector<double> values;
  values.reserve(system.count());
  for (const auto& q : system.all()) {
    const Region window = enlarge(q, c, system.grid());
    const auto cells = window.cells();
    const WindowStats s = window_stats(b, cells, &weights);
    switch (variant) {
      case OscVariant::l1_nu: values.push_back(s.l1 / weights.nu.mass(window)); break;
      case OscVariant::l2_lambda_mu: values.push_back(std::sqrt(s.l2_lambda / weights.mu.mass(window))); break;
      case OscVariant::l2_muinv_lambdainv:
        values.push_back(std::sqrt(s.l2_muinv / weights.lambda_inv.mass(window)));
        break;
    }
  }
  return OscillationReport{variant, c, IndexedSequence::over(system, std::move(values))};
}

IndexedSequence l1_oscillation(const GridFunction& b, const Weight& nu, const DyadicSystem& system,
                               double c) {
  require_grid(b, system.grid());
  std::vector<double> values;
  values.reserve(system.count());
  for (const auto& q : system.all()) {
    const Region window = enlarge(q, c, system.grid());
    values.push_back(window_stats(b, window.cells(), nullptr).l1 / nu.mass(window));
  }
  return IndexedSequence::over(system, std::move(values));
}

IndexedSequence holder_gap(const WeightPair& weights, const DyadicSystem& system, double c) {
  std::vector<double> values;
  values.reserve(system.count());
  for (const auto& q : system.all()) {
    const Region window = enlarge(q, c, system.grid());
    values.push_back(std::sqrt(weights.mu.mass(window) * weights.lambda_inv.mass(window)) /
                     weights.nu.mass(window));
  }
  return IndexedSequence::over(system, std::move(values));
}

CubeNormalisations cube_normalisations(const WeightPair& w, const DyadicCube& q) {
  const double vol = q.volume();
  const double nu = w.nu.mass(q);
  const double nu_inv = w.nu_inv.mass(q);
  CubeNormalisations r;
  r.volume_over_nu = vol / nu;
  r.volume_over_geometric = vol / (std::sqrt(w.lambda_inv.mass(q)) * std::sqrt(w.mu.mass(q)));
  r.nuinv_over_volume = nu_inv / vol;
  r.geometric_inv_over_volume = std::sqrt(w.lambda.mass(q)) * std::sqrt(w.mu_inv.mass(q)) / vol;
  r.nu_product_over_volume_sq = nu * nu_inv / (vol * vol);
  return r;
}

namespace {

double pick(const CubeNormalisations& r, HaarNormalisation which) {
  switch (which) {
    case HaarNormalisation::volume_over_nu: return r.volume_over_nu;
    case HaarNormalisation::volume_over_geometric: return r.volume_over_geometric;
    case HaarNormalisation::nuinv_over_volume: return r.nuinv_over_volume;
    case HaarNormalisation::geometric_inv_over_volume: return r.geometric_inv_over_volume;
  }
  throw std::invalid_argument("unknown normalisation");
}

}  // namespace

std::vector<double> besov_level_sums(const GridFunction& b, const WeightPair& w, double p,
                                     BesovForm form, const DyadicSystem& system,
                                     HaarNormalisation normalisation) {
  if (!(p > 0.0)) throw std::invalid_argument("Besov exponent must be positive");
  require_grid(b, system.grid());
  const int L = system.depth();
  const int n = system.grid().dim();
  const double vol = system.grid().cell_volume();
  std::vector<double> sums(L + 1, 0.0);
  const auto avg = cube_averages(b, system);

  if (form == BesovForm::average) {
    for (int k = 0; k <= L; ++k) {
      std::vector<double> dev(system.count_at(k), 0.0);
      const auto own = system.owners(k);
      for (std::size_t c = 0; c < b.size(); ++c) dev[own[c]] += std::abs(b[c] - avg[k][own[c]]);
      for (const auto& q : system.level_cubes(k))
        sums[k] += std::pow(dev[q.flat_m] * vol / w.nu.mass(q), p);
    }
    return sums;
  }

  if (form == BesovForm::haar) {
    const HaarCoefficients coeffs = analyze(b, system);
    const unsigned per = static_cast<unsigned>(Signature::cancellative_count(n));
    for (int k = 0; k < L; ++k)
      for (const auto& q : system.level_cubes(k)) {
        const double r = pick(cube_normalisations(w, q), normalisation) / std::sqrt(q.volume());
        for (unsigned e = 0; e < per; ++e)
          sums[k] += std::pow(std::abs(coeffs.at(k, q.flat_m, e)) * r, p);
      }
    return sums;
  }

  const unsigned nchild = 1u << n;
  for (int k = 0; k < L; ++k)
    for (const auto& q : system.level_cubes(k)) {
      double acc = 0.0;
      for (unsigned t = 0; t < nchild; ++t) {
        const DyadicCube& child = system.child_at(q, t);
        const double d = avg[k + 1][child.flat_m] - avg[k][q.flat_m];
        switch (form) {
          case BesovForm::martingale_l1_nu: acc += std::abs(d) * child.volume(); break;
          case BesovForm::martingale_l2_lambda_mu: acc += d * d * w.lambda.mass(child); break;
          case BesovForm::martingale_l2_muinv_lambdainv: acc += d * d * w.mu_inv.mass(child); break;
          default: throw std::invalid_argument("unknown Besov form");
        }
      }
      switch (form) {
        case BesovForm::martingale_l1_nu: sums[k] += std::pow(acc / w.nu.mass(q), p); break;
        case BesovForm::martingale_l2_lambda_mu: sums[k] += std::pow(acc / w.mu.mass(q), 0.5 * p); break;
        default: sums[k] += std::pow(acc / w.lambda_inv.mass(q), 0.5 * p); break;
      }
    }
  return sums;
}

double besov_norm(const GridFunction& b, const WeightPair& w, double p, const BesovOptions& opt) {
  if (!(p > 0.0)) throw std::invalid_argument("Besov exponent must be positive");
  auto one = [&](const DyadicSystem& sys) {
    const auto sums = besov_level_sums(b, w, p, opt.form, sys, opt.normalisation);
    double total = 0.0;
    for (int k = 0; k <= sys.depth(); ++k)
      if (opt.max_level < 0 || k <= opt.max_level) total += sums[k];
    return std::pow(total, 1.0 / p);
  };
  if (!opt.scope.intersection)
    return one(DyadicSystem(b.grid(), Shift::from_index(b.grid().dim(), opt.scope.omega)));
  double total = 0.0;
  for (const auto& sys : all_systems(b.grid())) total += one(sys);
  return total;
}

double wnu_norm(const GridFunction& b, const Weight& nu, const DyadicSystem& system, double c) {
  return lorentz_norm(l1_oscillation(b, nu, system, c), system.grid().dim(), kInfinity);
}

BmoProfile bmo_vmo_profile(const GridFunction& b, const Weight& w, const DyadicSystem& system,
                           double c) {
  const IndexedSequence osc = l1_oscillation(b, w, system, c);
  BmoProfile out;
  out.per_level.assign(system.depth() + 1, 0.0);
  for (std::size_t i = 0; i < osc.size(); ++i) {
    const int k = system.at_ordinal(i).level;
    out.per_level[k] = std::max(out.per_level[k], osc.values[i]);
    out.bmo = std::max(out.bmo, osc.values[i]);
  }
  return out;
}

SlobodeckiiResult slobodeckii_norm(const GridFunction& b, const Weight& mu, const Weight& lambda, double p) {
  if (!(p > 0.0)) throw std::invalid_argument("exponent must be positive");
  const TorusGrid& g = b.grid();
  require_grid(mu.as_function(), g);
  require_grid(lambda.as_function(), g);
  const int n = g.dim();
  std::vector<IVec> idx(g.cell_count());
  for (std::size_t c = 0; c < idx.size(); ++c) idx[c] = g.unflatten(c);
  double total = 0.0;
  for (std::size_t x = 0; x < idx.size(); ++x) {
    double row = 0.0;
    for (std::size_t y = 0; y < idx.size(); ++y) {
      if (x == y) continue;
      double d2 = 0.0;
      for (int i = 0; i < n; ++i) {
        const double d = g.min_image(idx[x][i] - idx[y][i]) * g.h();
        d2 += d * d;
      }
      row += std::pow(std::abs(b[x] - b[y]), p) * std::pow(d2, -static_cast<double>(n)) / mu[y];
    }
    total += row * lambda[x];
  }
  total *= g.cell_volume() * g.cell_volume();
  return {std::pow(total, 1.0 / p), p < 2.0};
}

double median_value(const GridFunction& b, const Region& r) {
  require_grid(b, r.grid());
  const auto cells = r.cells();
  if (cells.empty()) throw std::invalid_argument("median of an empty region");
  std::vector<double> v;
  v.reserve(cells.size());
  for (std::size_t c : cells) v.push_back(b[c]);
  std::sort(v.begin(), v.end());
  return v[(v.size() - 1) / 2];
}

GridFunction mollify(const GridFunction& b, double eps) {
  if (!(eps > 0.0 && eps < 0.25)) throw std::invalid_argument("mollification scale must lie in (0, 1/4)");
  const TorusGrid& g = b.grid();
  std::vector<double> kernel(g.cell_count(), 0.0);
  double mass = 0.0;
  for (std::size_t c = 0; c < kernel.size(); ++c) {
    const IVec idx = g.unflatten(c);
    double r2 = 0.0;
    for (int i = 0; i < g.dim(); ++i) {
      const double d = g.min_image(idx[i]) * g.h() / eps;
      r2 += d * d;
    }
    if (r2 < 1.0) kernel[c] = std::exp(-1.0 / (1.0 - r2));
    mass += kernel[c];
  }
  mass *= g.cell_volume();
  for (double& k : kernel) k /= mass;
  return circular_convolution(b, kernel);
}

}  // namespace wcomm
