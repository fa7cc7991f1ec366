#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wcomm/function_spaces.hpp"
#include "wcomm/operators.hpp"
#include "wcomm/weights.hpp"

namespace wcomm {

struct SymbolSpec {
  enum class Kind { haar_atom, haar_polynomial, bump, lipschitz_bump, mollified_indicator, samples };
  std::string id;
  Kind kind = Kind::bump;
  // haar_atom
  int level = 0;
  std::vector<int> m;
  unsigned epsilon = 0;
  // haar_polynomial: coefficient scale at level k is decay^k
  double decay = 0.5;
  // bumps
  std::vector<double> center;
  double radius = 0.3;
  // mollified indicator of [lo, hi)
  std::vector<double> lo, hi;
  double smoothing = 0.125;
  // samples
  int samples_depth = 0;
  std::vector<double> values;
};

struct WeightPairSpec {
  std::string id;
  WeightSpec mu;
  WeightSpec lambda;
};

struct ExperimentConfig {
  int n = 2;
  int direction = 1;
  double enlargement = kDefaultEnlargement;
  std::uint64_t seed = 20240601;
  int workers = 1;
  std::vector<WeightPairSpec> weights;
  std::vector<SymbolSpec> symbols;
  ShiftSpec shift;

  std::vector<int> equivalence_levels{2, 3, 4};
  std::vector<double> equivalence_p{4.0};

  int critical_depth = 6;
  std::vector<double> critical_p{2.0, 3.0};
  SymbolSpec critical_symbol;
  double critical_mollify = 0.0;  // 0 disables mollification

  std::vector<int> weak_levels{3, 4};
  SymbolSpec weak_symbol;
  std::vector<std::string> weak_weights{"power-half"};

  int wnu_depth = 4;
  std::vector<double> wnu_p{2.0};
  std::vector<double> wnu_q{kInfinity};
  std::vector<std::string> wnu_symbols;  // empty = every symbol

  std::filesystem::path out = "out";
  std::vector<std::string> svg;  // experiments that also get an SVG plot
};

ExperimentConfig default_config();
ExperimentConfig load_config(const nlohmann::json& doc);
ExperimentConfig load_config_file(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& cfg);

GridFunction make_symbol(const SymbolSpec& spec, const TorusGrid& grid, std::uint64_t seed);
WeightPair make_weight_pair(const WeightPairSpec& spec, const TorusGrid& grid);
const WeightPairSpec& find_weight_pair(const ExperimentConfig& cfg, const std::string& id);

struct ReportRow {
  std::string experiment;
  std::string symbol_id;
  std::string weight_id;
  int n = 0;
  int L = 0;
  double p = 0.0;
  double q = 0.0;
  std::string form;
  std::string scope;
  double value = 0.0;
  std::string ratio_partner;
  std::optional<double> ratio;
};

struct ExperimentReport {
  std::vector<ReportRow> rows;
  void append(const ExperimentReport& other) { rows.insert(rows.end(), other.rows.begin(), other.rows.end()); }
};

ExperimentReport run_equivalence(const ExperimentConfig& cfg);
ExperimentReport run_critical(const ExperimentConfig& cfg);
ExperimentReport run_weak_schatten(const ExperimentConfig& cfg);
ExperimentReport run_wnu_equivalence(const ExperimentConfig& cfg);

inline const std::vector<std::string> kCsvColumns{"experiment", "symbol_id", "weight_id", "n",     "L",
                                                  "p",          "q",         "form",      "scope", "value",
                                                  "ratio_partner", "ratio"};

std::string format_number(double v);
std::string to_csv(const ExperimentReport& report);
void emit_csv(const ExperimentReport& report, const std::filesystem::path& path);
// Log-scale plot of value against L, one polyline per (symbol, weight, form, scope).
void emit_svg(const ExperimentReport& report, const std::filesystem::path& path);

// Dumps for external inspection.
void export_operator(const DenseOperator& op, const std::filesystem::path& stem, const nlohmann::json& meta);
void export_spectrum(const std::vector<double>& values, const std::filesystem::path& path);
void export_coefficients(const HaarCoefficients& c, const DyadicSystem& system, const std::filesystem::path& path);
void export_oscillation(const OscillationReport& r, const std::filesystem::path& path);

}  // namespace wcomm
