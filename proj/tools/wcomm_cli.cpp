#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "wcomm/harness.hpp"
#include "wcomm/schatten.hpp"

namespace fs = std::filesystem;
using namespace wcomm;

namespace {

struct ExportRequest {
  std::string symbol;
  std::string weight;
  int level = 3;
};

void export_cell(const ExperimentConfig& cfg, const ExportRequest& req, const fs::path& dir) {
  const SymbolSpec* spec = nullptr;
  for (const auto& s : cfg.symbols)
    if (s.id == req.symbol) spec = &s;
  if (!spec) throw std::invalid_argument("unknown symbol: " + req.symbol);
  const TorusGrid grid(cfg.n, req.level);
  const GridFunction b = make_symbol(*spec, grid, cfg.seed);
  const WeightPair w = make_weight_pair(find_weight_pair(cfg, req.weight), grid);
  const DyadicSystem sys(grid, Shift::from_index(cfg.n, 0));
  const DenseOperator op = weighted_conjugate(commutator_matrix(b, RieszSpec{cfg.direction}), w.lambda, w.mu);
  const std::string stem = req.symbol + "_" + req.weight + "_L" + std::to_string(req.level);
  export_operator(op, dir / stem, {{"symbol", req.symbol}, {"weight", req.weight}, {"n", cfg.n}, {"L", req.level},
                                   {"direction", cfg.direction}});
  export_spectrum(singular_values(op).values, dir / (stem + "_spectrum.csv"));
  export_coefficients(analyze(b, sys), sys, dir / (stem + "_haar.csv"));
  export_oscillation(oscillation_sequence(b, w, sys, cfg.enlargement, OscVariant::l1_nu),
                     dir / (stem + "_oscillation.csv"));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted commutator Schatten-class experiments on the periodic grid"};
  std::string config_path, experiment = "all", out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::vector<std::string> export_specs;
  bool print_config = false;
  app.add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--experiment", experiment, "Experiment to run")
      ->check(CLI::IsMember({"equivalence", "critical", "weak", "wnu", "all"}));
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--seed", seed, "Random seed for Haar polynomial symbols");
  app.add_option("--workers", workers, "Concurrent experiment cells")->check(CLI::PositiveNumber);
  app.add_option("--export", export_specs, "Dump operator, spectrum and coefficients for SYMBOL:WEIGHT:L");
  app.add_flag("--print-config", print_config, "Print the effective configuration and exit");
  CLI11_PARSE(app, argc, argv);

  try {
    ExperimentConfig cfg = config_path.empty() ? default_config() : load_config_file(config_path);
    if (seed) cfg.seed = *seed;
    if (workers) cfg.workers = *workers;
    if (!out_dir.empty()) cfg.out = out_dir;
    if (print_config) {
      std::cout << to_json(cfg).dump(2) << '\n';
      return 0;
    }
    fs::create_directories(cfg.out);

    using Runner = ExperimentReport (*)(const ExperimentConfig&);
    const std::vector<std::pair<std::string, Runner>> runners{{"equivalence", run_equivalence},
                                                              {"critical", run_critical},
                                                              {"weak", run_weak_schatten},
                                                              {"wnu", run_wnu_equivalence}};
    for (const auto& [name, run] : runners) {
      if (experiment != "all" && experiment != name) continue;
      const ExperimentReport report = run(cfg);
      emit_csv(report, cfg.out / (name + ".csv"));
      if (std::find(cfg.svg.begin(), cfg.svg.end(), name) != cfg.svg.end())
        emit_svg(report, cfg.out / (name + ".svg"));
      std::cerr << name << ": " << report.rows.size() << " rows\n";
    }
    for (const auto& text : export_specs) {
      const auto a = text.find(':'), b = text.rfind(':');
      if (a == std::string::npos || a == b) throw std::invalid_argument("--export expects SYMBOL:WEIGHT:L");
      export_cell(cfg, {text.substr(0, a), text.substr(a + 1, b - a - 1), std::stoi(text.substr(b + 1))}, cfg.out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
