#pragma once

#include <span>
#include <string>
#include <vector>

#include "wcomm/grid.hpp"
#include "wcomm/seq_norms.hpp"
#include "wcomm/weights.hpp"

namespace wcomm {

enum class OscVariant { l1_nu, l2_lambda_mu, l2_muinv_lambdainv };
std::string to_string(OscVariant v);

// Default enlargement of the oscillation windows.
inline constexpr double kDefaultEnlargement = 3.0;

struct OscillationReport {
  OscVariant variant = OscVariant::l1_nu;
  double factor = kDefaultEnlargement;
  IndexedSequence values;

  double norm(double p, double q) const { return lorentz_norm(values, p, q); }
};

OscillationReport oscillation_sequence(const GridFunction& b, const WeightPair& weights,
                                       const DyadicSystem& system, double c, OscVariant variant);
// L1 oscillation normalised by a single weight.
IndexedSequence l1_oscillation(const GridFunction& b, const Weight& nu, const DyadicSystem& system,
                               double c);

// Ratio (mu(cQ) lambda^{-1}(cQ))^{1/2} / nu(cQ) >= 1 that makes the per-window
// Cauchy-Schwarz chain between the three oscillation variants exact.
IndexedSequence holder_gap(const WeightPair& weights, const DyadicSystem& system, double c);

enum class BesovForm { average, haar, martingale_l1_nu, martingale_l2_lambda_mu, martingale_l2_muinv_lambdainv };
std::string to_string(BesovForm f);

// The four interchangeable cube normalisations of the Haar form.
enum class HaarNormalisation { volume_over_nu, volume_over_geometric, nuinv_over_volume, geometric_inv_over_volume };

struct BesovScope {
  bool intersection = false;
  int omega = 0;  // used when intersection is false

  static BesovScope one(int omega) { return {false, omega}; }
  static BesovScope all() { return {true, 0}; }
};

struct BesovOptions {
  BesovForm form = BesovForm::average;
  BesovScope scope = BesovScope::one(0);
  HaarNormalisation normalisation = HaarNormalisation::volume_over_nu;
  int max_level = -1;  // restricts the cube sum to levels <= max_level when >= 0
};

double besov_norm(const GridFunction& b, const WeightPair& weights, double p, const BesovOptions& opt);

// p-th powers of the Besov terms summed per level (one system), for partial-sum studies.
std::vector<double> besov_level_sums(const GridFunction& b, const WeightPair& weights, double p,
                                     BesovForm form, const DyadicSystem& system,
                                     HaarNormalisation norm = HaarNormalisation::volume_over_nu);

// Per-cube normalisations of the Haar form, used by the equivalence chain checks.
struct CubeNormalisations {
  double volume_over_nu;
  double volume_over_geometric;
  double nuinv_over_volume;
  double geometric_inv_over_volume;
  double nu_product_over_volume_sq;  // nu(Q) nu^{-1}(Q) / |Q|^2
};
CubeNormalisations cube_normalisations(const WeightPair& weights, const DyadicCube& q);

double wnu_norm(const GridFunction& b, const Weight& nu, const DyadicSystem& system,
                double c = kDefaultEnlargement);

struct BmoProfile {
  double bmo = 0.0;
  std::vector<double> per_level;
};
BmoProfile bmo_vmo_profile(const GridFunction& b, const Weight& w, const DyadicSystem& system,
                           double c = 1.0);

struct SlobodeckiiResult {
  double value = 0.0;
  bool below_range = false;  // p < 2
};
SlobodeckiiResult slobodeckii_norm(const GridFunction& b, const Weight& mu, const Weight& lambda, double p);

double median_value(const GridFunction& b, const Region& r);

GridFunction mollify(const GridFunction& b, double eps);

}  // namespace wcomm
