#include "wcomm/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "wcomm/haar.hpp"
#include "wcomm/schatten.hpp"

namespace wcomm {

using nlohmann::json;

namespace {

const std::vector<double> kOffCenter{1.0 / 3.0, 0.25};

SymbolSpec atom(const std::string& id, int level, std::vector<int> m, unsigned eps) {
  SymbolSpec s;
  s.id = id;
  s.kind = SymbolSpec::Kind::haar_atom;
  s.level = level;
  s.m = std::move(m);
  s.epsilon = eps;
  return s;
}

SymbolSpec polynomial(const std::string& id) {
  SymbolSpec s;
  s.id = id;
  s.kind = SymbolSpec::Kind::haar_polynomial;
  s.decay = 0.5;
  return s;
}

SymbolSpec bump(const std::string& id, SymbolSpec::Kind kind, std::vector<double> center, double radius) {
  SymbolSpec s;
  s.id = id;
  s.kind = kind;
  s.center = std::move(center);
  s.radius = radius;
  return s;
}

std::vector<double> filled(int n, double v) { return std::vector<double>(static_cast<std::size_t>(n), v); }

}  // namespace

ExperimentConfig default_config() {
  ExperimentConfig cfg;
  const int n = cfg.n;
  std::vector<double> x0 = kOffCenter;
  cfg.weights = {
      {"unweighted", WeightSpec::constant(1.0), WeightSpec::constant(1.0)},
      {"power-half", WeightSpec::power(0.5, x0), WeightSpec::power(-0.5, x0)},
      {"power-one", WeightSpec::power(1.0, x0), WeightSpec::constant(1.0)},
  };
  SymbolSpec mollified;
  mollified.id = "mollified-indicator";
  mollified.kind = SymbolSpec::Kind::mollified_indicator;
  mollified.lo = filled(n, 0.25);
  mollified.hi = filled(n, 0.75);
  mollified.smoothing = 0.125;
  cfg.symbols = {
      atom("atom-l0", 0, {0, 0}, 0),
      atom("atom-l1", 1, {1, 0}, 1),
      atom("atom-l2", 2, {1, 2}, 2),
      atom("atom-l3", 3, {5, 2}, 0),
      polynomial("haar-poly-1"),
      polynomial("haar-poly-2"),
      bump("smooth-bump", SymbolSpec::Kind::bump, {0.55, 0.45}, 0.3),
      mollified,
  };
  cfg.critical_symbol = bump("critical-bump", SymbolSpec::Kind::bump, filled(n, 0.5), 0.35);
  cfg.weak_symbol = bump("lipschitz-bump", SymbolSpec::Kind::lipschitz_bump, filled(n, 0.5), 0.3);
  return cfg;
}

namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

double parse_q(const json& v) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "infinity") return kInfinity;
    throw std::invalid_argument("q must be a number or \"inf\"");
  }
  return v.get<double>();
}

WeightSpec parse_weight(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "constant") return WeightSpec::constant(get_or(j, "value", 1.0));
  if (kind == "power") return WeightSpec::power(j.at("alpha").get<double>(), j.at("center").get<std::vector<double>>());
  if (kind == "samples") return WeightSpec::sampled(j.at("values").get<std::vector<double>>());
  throw std::invalid_argument("unknown weight kind: " + kind);
}

json weight_json(const WeightSpec& w) {
  switch (w.kind) {
    case WeightSpec::Kind::constant: return {{"kind", "constant"}, {"value", w.value}};
    case WeightSpec::Kind::power: return {{"kind", "power"}, {"alpha", w.alpha}, {"center", w.center}};
    case WeightSpec::Kind::samples: return {{"kind", "samples"}, {"values", w.samples}};
  }
  return {};
}

const std::map<std::string, SymbolSpec::Kind>& symbol_kinds() {
  static const std::map<std::string, SymbolSpec::Kind> kinds{
      {"haar-atom", SymbolSpec::Kind::haar_atom},
      {"haar-polynomial", SymbolSpec::Kind::haar_polynomial},
      {"bump", SymbolSpec::Kind::bump},
      {"lipschitz-bump", SymbolSpec::Kind::lipschitz_bump},
      {"mollified-indicator", SymbolSpec::Kind::mollified_indicator},
      {"samples", SymbolSpec::Kind::samples},
  };
  return kinds;
}

SymbolSpec parse_symbol(const json& j, int n) {
  SymbolSpec s;
  s.id = j.at("id").get<std::string>();
  const auto kind = j.at("kind").get<std::string>();
  const auto it = symbol_kinds().find(kind);
  if (it == symbol_kinds().end()) throw std::invalid_argument("unknown symbol kind: " + kind);
  s.kind = it->second;
  s.level = get_or(j, "level", 0);
  s.m = get_or(j, "m", std::vector<int>(static_cast<std::size_t>(n), 0));
  s.epsilon = get_or(j, "epsilon", 0u);
  s.decay = get_or(j, "decay", 0.5);
  s.center = get_or(j, "center", filled(n, 0.5));
  s.radius = get_or(j, "radius", 0.3);
  s.lo = get_or(j, "lo", filled(n, 0.25));
  s.hi = get_or(j, "hi", filled(n, 0.75));
  s.smoothing = get_or(j, "smoothing", 0.125);
  s.samples_depth = get_or(j, "L", 0);
  s.values = get_or(j, "values", std::vector<double>{});
  if (static_cast<int>(s.m.size()) != n || static_cast<int>(s.center.size()) != n ||
      static_cast<int>(s.lo.size()) != n || static_cast<int>(s.hi.size()) != n)
    throw std::invalid_argument("symbol " + s.id + " has coordinates of the wrong dimension");
  if (s.kind == SymbolSpec::Kind::samples && s.values.empty())
    throw std::invalid_argument("symbol " + s.id + " needs sample values");
  return s;
}

json symbol_json(const SymbolSpec& s) {
  std::string kind;
  for (const auto& [name, k] : symbol_kinds())
    if (k == s.kind) kind = name;
  json j{{"id", s.id}, {"kind", kind}};
  switch (s.kind) {
    case SymbolSpec::Kind::haar_atom:
      j["level"] = s.level;
      j["m"] = s.m;
      j["epsilon"] = s.epsilon;
      break;
    case SymbolSpec::Kind::haar_polynomial: j["decay"] = s.decay; break;
    case SymbolSpec::Kind::bump:
    case SymbolSpec::Kind::lipschitz_bump:
      j["center"] = s.center;
      j["radius"] = s.radius;
      break;
    case SymbolSpec::Kind::mollified_indicator:
      j["lo"] = s.lo;
      j["hi"] = s.hi;
      j["smoothing"] = s.smoothing;
      break;
    case SymbolSpec::Kind::samples:
      j["L"] = s.samples_depth;
      j["values"] = s.values;
      break;
  }
  return j;
}

ShiftSpec parse_shift(const json& j) {
  ShiftSpec s;
  const auto child = get_or(j, "child", std::string("smallest-index"));
  if (child == "smallest-index") {
    s.child = ShiftSpec::Child::smallest_index;
  } else if (child == "position") {
    s.child = ShiftSpec::Child::position;
    s.position = j.at("position").get<unsigned>();
  } else {
    throw std::invalid_argument("unknown child selector: " + child);
  }
  s.signature_map = get_or(j, "signature_map", std::vector<int>{});
  return s;
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.n < 1 || cfg.n > 3) throw std::invalid_argument("n must be 1, 2 or 3");
  if (cfg.direction < 1 || cfg.direction > cfg.n) throw std::invalid_argument("direction out of range");
  if (!(cfg.enlargement >= 1.0)) throw std::invalid_argument("enlargement must be at least 1");
  if (cfg.workers < 1) throw std::invalid_argument("workers must be positive");
  if (cfg.weights.empty()) throw std::invalid_argument("at least one weight pair is required");
  for (int L : cfg.equivalence_levels)
    if (L < 1 || L > 4) throw std::invalid_argument("SVD experiments are limited to 1 <= L <= 4");
  for (int L : cfg.weak_levels)
    if (L < 1 || L > 4) throw std::invalid_argument("SVD experiments are limited to 1 <= L <= 4");
  if (cfg.critical_depth < 1 || cfg.critical_depth > 6) throw std::invalid_argument("critical depth must be in [1, 6]");
  if (cfg.wnu_depth < 1 || cfg.wnu_depth > 6) throw std::invalid_argument("wnu depth must be in [1, 6]");
  for (const auto& id : cfg.weak_weights) find_weight_pair(cfg, id);
  const std::size_t per = (1u << cfg.n) - 1;
  if (!cfg.shift.signature_map.empty() && cfg.shift.signature_map.size() != per)
    throw std::invalid_argument("signature map must list every cancellative signature");
  for (int v : cfg.shift.signature_map)
    if (v < -1 || v >= static_cast<int>(per)) throw std::invalid_argument("signature map entry out of range");
  if (cfg.shift.child == ShiftSpec::Child::position && cfg.shift.position >= (1u << cfg.n))
    throw std::invalid_argument("child position out of range");
}

}  // namespace

ExperimentConfig load_config(const json& doc) {
  ExperimentConfig cfg = default_config();
  cfg.n = get_or(doc, "n", cfg.n);
  if (cfg.n != 2 && (!doc.contains("symbols") || !doc.contains("weights")))
    throw std::invalid_argument("non-default dimension requires explicit symbols and weights");
  cfg.direction = get_or(doc, "direction", cfg.direction);
  cfg.enlargement = get_or(doc, "enlargement", cfg.enlargement);
  cfg.seed = get_or(doc, "seed", cfg.seed);
  cfg.workers = get_or(doc, "workers", cfg.workers);
  if (doc.contains("out")) cfg.out = doc.at("out").get<std::string>();
  if (doc.contains("svg")) cfg.svg = doc.at("svg").get<std::vector<std::string>>();
  if (doc.contains("weights")) {
    cfg.weights.clear();
    for (const auto& w : doc.at("weights"))
      cfg.weights.push_back({w.at("id").get<std::string>(), parse_weight(w.at("mu")), parse_weight(w.at("lambda"))});
  }
  if (doc.contains("symbols")) {
    cfg.symbols.clear();
    for (const auto& s : doc.at("symbols")) cfg.symbols.push_back(parse_symbol(s, cfg.n));
  }
  if (doc.contains("shift")) cfg.shift = parse_shift(doc.at("shift"));
  if (doc.contains("equivalence")) {
    const auto& e = doc.at("equivalence");
    cfg.equivalence_levels = get_or(e, "levels", cfg.equivalence_levels);
    cfg.equivalence_p = get_or(e, "p", cfg.equivalence_p);
  }
  if (doc.contains("critical")) {
    const auto& c = doc.at("critical");
    cfg.critical_depth = get_or(c, "L", cfg.critical_depth);
    cfg.critical_p = get_or(c, "p", cfg.critical_p);
    cfg.critical_mollify = get_or(c, "mollify", cfg.critical_mollify);
    if (c.contains("symbol")) cfg.critical_symbol = parse_symbol(c.at("symbol"), cfg.n);
  }
  if (doc.contains("weak")) {
    const auto& w = doc.at("weak");
    cfg.weak_levels = get_or(w, "levels", cfg.weak_levels);
    cfg.weak_weights = get_or(w, "weights", cfg.weak_weights);
    if (w.contains("symbol")) cfg.weak_symbol = parse_symbol(w.at("symbol"), cfg.n);
  }
  if (doc.contains("wnu")) {
    const auto& w = doc.at("wnu");
    cfg.wnu_depth = get_or(w, "L", cfg.wnu_depth);
    cfg.wnu_p = get_or(w, "p", cfg.wnu_p);
    if (w.contains("q")) {
      cfg.wnu_q.clear();
      for (const auto& q : w.at("q")) cfg.wnu_q.push_back(parse_q(q));
    }
    cfg.wnu_symbols = get_or(w, "symbols", cfg.wnu_symbols);
  }
  if (cfg.n != 2) {
    cfg.critical_symbol.center = filled(cfg.n, 0.5);
    cfg.weak_symbol.center = filled(cfg.n, 0.5);
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  return load_config(json::parse(in));
}

json to_json(const ExperimentConfig& cfg) {
  json j;
  j["n"] = cfg.n;
  j["direction"] = cfg.direction;
  j["enlargement"] = cfg.enlargement;
  j["seed"] = cfg.seed;
  j["workers"] = cfg.workers;
  j["out"] = cfg.out.string();
  j["weights"] = json::array();
  for (const auto& w : cfg.weights)
    j["weights"].push_back({{"id", w.id}, {"mu", weight_json(w.mu)}, {"lambda", weight_json(w.lambda)}});
  j["symbols"] = json::array();
  for (const auto& s : cfg.symbols) j["symbols"].push_back(symbol_json(s));
  j["shift"] = {{"child", cfg.shift.child == ShiftSpec::Child::position ? "position" : "smallest-index"},
                {"position", cfg.shift.position},
                {"signature_map", cfg.shift.signature_map}};
  j["equivalence"] = {{"levels", cfg.equivalence_levels}, {"p", cfg.equivalence_p}};
  j["critical"] = {{"L", cfg.critical_depth}, {"p", cfg.critical_p}, {"mollify", cfg.critical_mollify},
                   {"symbol", symbol_json(cfg.critical_symbol)}};
  j["weak"] = {{"levels", cfg.weak_levels}, {"weights", cfg.weak_weights}, {"symbol", symbol_json(cfg.weak_symbol)}};
  json qs = json::array();
  for (double q : cfg.wnu_q) qs.push_back(std::isinf(q) ? json("inf") : json(q));
  j["wnu"] = {{"L", cfg.wnu_depth}, {"p", cfg.wnu_p}, {"q", qs}, {"symbols", cfg.wnu_symbols}};
  j["svg"] = cfg.svg;
  return j;
}

GridFunction make_symbol(const SymbolSpec& spec, const TorusGrid& grid, std::uint64_t seed) {
  const int n = grid.dim();
  switch (spec.kind) {
    case SymbolSpec::Kind::haar_atom: {
      const DyadicSystem sys(grid, Shift::from_index(n, 0));
      const int level = std::min(spec.level, grid.depth() - 1);
      IVec m{};
      for (int i = 0; i < n; ++i) m[i] = ((spec.m[i] % (1 << level)) + (1 << level)) % (1 << level);
      std::int64_t flat = 0;
      for (int i = 0; i < n; ++i) flat = flat * (1 << level) + m[i];
      const unsigned eps = spec.epsilon % static_cast<unsigned>(Signature::cancellative_count(n));
      return haar_function(sys.cube(level, flat), Signature{eps, n}, grid);
    }
    case SymbolSpec::Kind::haar_polynomial: {
      const DyadicSystem sys(grid, Shift::from_index(n, 0));
      std::vector<std::uint32_t> material{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                                          static_cast<std::uint32_t>(grid.depth()), static_cast<std::uint32_t>(n)};
      for (char ch : spec.id) material.push_back(static_cast<unsigned char>(ch));
      std::seed_seq seq(material.begin(), material.end());
      std::mt19937_64 rng(seq);
      std::normal_distribution<double> normal(0.0, 1.0);
      HaarCoefficients c = HaarCoefficients::zero(sys);
      for (int k = 0; k < grid.depth(); ++k) {
        const double scale = std::pow(spec.decay, k);
        for (const auto& q : sys.level_cubes(k))
          for (unsigned e = 0; e < static_cast<unsigned>(Signature::cancellative_count(n)); ++e)
            c.coeff(q, e) = scale * normal(rng);
      }
      return synthesize(c, sys);
    }
    case SymbolSpec::Kind::bump:
    case SymbolSpec::Kind::lipschitz_bump: {
      const bool smooth = spec.kind == SymbolSpec::Kind::bump;
      return GridFunction::from(grid, [&](std::span<const double> x) {
        double r2 = 0.0;
        for (int i = 0; i < n; ++i) {
          double d = x[i] - spec.center[i];
          d -= std::round(d);
          r2 += d * d;
        }
        const double t = std::sqrt(r2) / spec.radius;
        if (t >= 1.0) return 0.0;
        return smooth ? std::exp(1.0 - 1.0 / (1.0 - t * t)) : 1.0 - t;
      });
    }
    case SymbolSpec::Kind::mollified_indicator: {
      const GridFunction box = GridFunction::from(grid, [&](std::span<const double> x) {
        for (int i = 0; i < n; ++i)
          if (x[i] < spec.lo[i] || x[i] >= spec.hi[i]) return 0.0;
        return 1.0;
      });
      return mollify(box, spec.smoothing);
    }
    case SymbolSpec::Kind::samples:
      if (spec.samples_depth != grid.depth())
        throw std::invalid_argument("sampled symbol " + spec.id + " was given for a different depth");
      return GridFunction(grid, spec.values);
  }
  throw std::invalid_argument("unknown symbol kind");
}

WeightPair make_weight_pair(const WeightPairSpec& spec, const TorusGrid& grid) {
  return WeightPair::from(make_weight(grid, spec.mu), make_weight(grid, spec.lambda));
}

const WeightPairSpec& find_weight_pair(const ExperimentConfig& cfg, const std::string& id) {
  for (const auto& w : cfg.weights)
    if (w.id == id) return w;
  throw std::invalid_argument("unknown weight pair: " + id);
}

namespace {

// Runs independent cells on a worker pool; rows are concatenated in cell order.
ExperimentReport run_cells(std::size_t count, int workers,
                           const std::function<ExperimentReport(std::size_t)>& cell) {
  std::vector<ExperimentReport> parts(count);
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        parts[i] = cell(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int threads = std::max(1, std::min<int>(workers, static_cast<int>(count)));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  ExperimentReport out;
  for (const auto& p : parts) out.append(p);
  return out;
}

bool is_constant(const GridFunction& b) {
  const auto [lo, hi] = std::minmax_element(b.values().begin(), b.values().end());
  return *hi - *lo <= 1e-14 * std::max(1.0, std::abs(*hi));
}

ReportRow row(const std::string& experiment, const std::string& symbol, const std::string& weight, int n, int L,
              double p, double q, const std::string& form, const std::string& scope, double value) {
  return ReportRow{experiment, symbol, weight, n, L, p, q, form, scope, value, "", std::nullopt};
}

std::optional<double> safe_ratio(double num, double den) {
  if (!(num > 0.0) || !(den > 0.0)) return std::nullopt;
  return num / den;
}

const std::vector<BesovForm> kForms{BesovForm::average, BesovForm::haar, BesovForm::martingale_l1_nu,
                                    BesovForm::martingale_l2_lambda_mu, BesovForm::martingale_l2_muinv_lambdainv};

void require_riesz_dimension(const ExperimentConfig& cfg) {
  if (cfg.n < 2) throw std::invalid_argument("Riesz commutator experiments need n >= 2");
}

void add_spread(ExperimentReport& report, const std::string& experiment, const std::string& weight, int n,
                double p, double q, const std::string& form, const std::string& scope,
                const std::vector<double>& ratios) {
  if (ratios.empty()) return;
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  report.rows.push_back(row(experiment, "*", weight, n, 0, p, q, "spread:" + form, scope, *hi / *lo));
}

}  // namespace

ExperimentReport run_equivalence(const ExperimentConfig& cfg) {
  require_riesz_dimension(cfg);
  for (double p : cfg.equivalence_p)
    if (!(p > cfg.n)) throw std::invalid_argument("equivalence needs p > n; use the critical experiment for p <= n");

  struct Cell {
    std::size_t weight, symbol;
    int L;
  };
  std::vector<Cell> cells;
  for (std::size_t w = 0; w < cfg.weights.size(); ++w)
    for (std::size_t s = 0; s < cfg.symbols.size(); ++s)
      for (int L : cfg.equivalence_levels) cells.push_back({w, s, L});

  const RieszSpec riesz{cfg.direction};
  ExperimentReport report = run_cells(cells.size(), cfg.workers, [&](std::size_t i) {
    const Cell& c = cells[i];
    const auto& wspec = cfg.weights[c.weight];
    const auto& sspec = cfg.symbols[c.symbol];
    const TorusGrid grid(cfg.n, c.L);
    const GridFunction b = make_symbol(sspec, grid, cfg.seed);
    const WeightPair w = make_weight_pair(wspec, grid);
    const bool degenerate = is_constant(b);
    const SingularSpectrum spectrum =
        singular_values(weighted_conjugate(commutator_matrix(b, riesz), w.lambda, w.mu));
    ExperimentReport out;
    for (double p : cfg.equivalence_p) {
      const double sp = schatten_lorentz_norm(spectrum, p, p);
      const std::string partner = "schatten-S" + format_number(p);
      out.rows.push_back(row("equivalence", sspec.id, wspec.id, cfg.n, c.L, p, p, "schatten", "-", sp));
      if (degenerate)
        out.rows.push_back(row("equivalence", sspec.id, wspec.id, cfg.n, c.L, p, p, "degenerate", "-", 1.0));
      for (BesovForm form : kForms)
        for (bool inter : {true, false}) {
          BesovOptions opt;
          opt.form = form;
          opt.scope = inter ? BesovScope::all() : BesovScope::one(0);
          const double bv = besov_norm(b, w, p, opt);
          ReportRow r = row("equivalence", sspec.id, wspec.id, cfg.n, c.L, p, p, "besov-" + to_string(form),
                            inter ? "intersection" : "omega-0", bv);
          r.ratio_partner = partner;
          r.ratio = degenerate ? std::nullopt : safe_ratio(sp, bv);
          out.rows.push_back(r);
        }
    }
    return out;
  });

  for (std::size_t w = 0; w < cfg.weights.size(); ++w)
    for (double p : cfg.equivalence_p)
      for (BesovForm form : kForms)
        for (const char* scope : {"intersection", "omega-0"}) {
          std::vector<double> ratios;
          for (const auto& r : report.rows)
            if (r.weight_id == cfg.weights[w].id && r.p == p && r.form == "besov-" + to_string(form) &&
                r.scope == scope && r.ratio)
              ratios.push_back(*r.ratio);
          add_spread(report, "equivalence", cfg.weights[w].id, cfg.n, p, p, "besov-" + to_string(form), scope, ratios);
        }
  return report;
}

ExperimentReport run_critical(const ExperimentConfig& cfg) {
  const TorusGrid grid(cfg.n, cfg.critical_depth);
  GridFunction b = make_symbol(cfg.critical_symbol, grid, cfg.seed);
  if (cfg.critical_mollify > 0.0) b = mollify(b, cfg.critical_mollify);
  const Weight one = make_weight(grid, WeightSpec::constant(1.0));
  const WeightPair w = WeightPair::from(one, one);
  const DyadicSystem sys(grid, Shift::from_index(cfg.n, 0));
  const std::string& id = cfg.critical_symbol.id;
  const int L = cfg.critical_depth;

  ExperimentReport report;
  if (is_constant(b)) report.rows.push_back(row("critical", id, "unweighted", cfg.n, L, 0, 0, "degenerate", "-", 1.0));
  for (double p : cfg.critical_p) {
    const auto sums = besov_level_sums(b, w, p, BesovForm::average, sys);
    double partial = 0.0;
    for (int k = 0; k <= L; ++k) {
      partial += sums[k];
      report.rows.push_back(row("critical", id, "unweighted", cfg.n, k, p, p, "partial-sum", "omega-0", partial));
      report.rows.push_back(row("critical", id, "unweighted", cfg.n, k, p, p, "increment", "omega-0", sums[k]));
    }
    if (p <= cfg.n) {
      bool linear = true;
      for (int k = std::min(3, L); k <= L; ++k) {
        if (!(sums[k] > 0.0)) linear = false;
        if (k > 0 && sums[k - 1] > 0.0) {
          const double r = sums[k] / sums[k - 1];
          if (r < 0.5 || r > 2.0) linear = false;
        }
      }
      report.rows.push_back(row("critical", id, "unweighted", cfg.n, L, p, p, "linear-growth", "omega-0", linear ? 1 : 0));
    } else {
      const bool decays = L >= 2 && sums[L] <= 0.5 * sums[L - 2];
      report.rows.push_back(row("critical", id, "unweighted", cfg.n, L, p, p, "geometric-decay", "omega-0", decays ? 1 : 0));
    }
  }
  return report;
}

ExperimentReport run_weak_schatten(const ExperimentConfig& cfg) {
  require_riesz_dimension(cfg);
  struct Cell {
    std::string weight;
    int L;
  };
  std::vector<Cell> cells;
  for (const auto& wid : cfg.weak_weights)
    for (int L : cfg.weak_levels) cells.push_back({wid, L});
  const double n = cfg.n;
  const RieszSpec riesz{cfg.direction};
  const std::string& id = cfg.weak_symbol.id;

  ExperimentReport report = run_cells(cells.size(), cfg.workers, [&](std::size_t i) {
    const Cell& c = cells[i];
    const TorusGrid grid(cfg.n, c.L);
    const GridFunction b = make_symbol(cfg.weak_symbol, grid, cfg.seed);
    const WeightPair w = make_weight_pair(find_weight_pair(cfg, c.weight), grid);
    const SingularSpectrum s = singular_values(weighted_conjugate(commutator_matrix(b, riesz), w.lambda, w.mu));
    const double weak = schatten_lorentz_norm(s, n, kInfinity);
    const double strong = schatten_lorentz_norm(s, n, n);
    const double wnu = wnu_norm(b, w.nu, DyadicSystem(grid, Shift::from_index(cfg.n, 0)), cfg.enlargement);
    ExperimentReport out;
    out.rows.push_back(row("weak", id, c.weight, cfg.n, c.L, n, kInfinity, "schatten-weak", "-", weak));
    out.rows.push_back(row("weak", id, c.weight, cfg.n, c.L, n, n, "schatten", "-", strong));
    ReportRow r = row("weak", id, c.weight, cfg.n, c.L, n, kInfinity, "wnu", "omega-0", wnu);
    r.ratio_partner = "schatten-weak";
    r.ratio = safe_ratio(weak, wnu);
    out.rows.push_back(r);
    out.rows.push_back(row("weak", id, c.weight, cfg.n, c.L, n, kInfinity, "weak-below-strong", "-",
                           weak <= strong * (1 + 1e-12) ? 1 : 0));
    return out;
  });

  for (const auto& wid : cfg.weak_weights) {
    std::vector<std::pair<int, double>> by_level;
    for (const auto& r : report.rows)
      if (r.weight_id == wid && r.form == "wnu" && r.ratio) by_level.emplace_back(r.L, *r.ratio);
    if (by_level.size() >= 2) {
      std::sort(by_level.begin(), by_level.end());
      ReportRow r = row("weak", id, wid, cfg.n, by_level.back().first, n, kInfinity, "stability", "omega-0",
                        by_level.back().second / by_level.front().second);
      r.ratio_partner = "L" + std::to_string(by_level.front().first);
      report.rows.push_back(r);
    }
  }
  return report;
}

ExperimentReport run_wnu_equivalence(const ExperimentConfig& cfg) {
  std::vector<std::size_t> chosen;
  for (std::size_t s = 0; s < cfg.symbols.size(); ++s)
    if (cfg.wnu_symbols.empty() ||
        std::find(cfg.wnu_symbols.begin(), cfg.wnu_symbols.end(), cfg.symbols[s].id) != cfg.wnu_symbols.end())
      chosen.push_back(s);
  struct Cell {
    std::size_t weight, symbol;
  };
  std::vector<Cell> cells;
  for (std::size_t w = 0; w < cfg.weights.size(); ++w)
    for (std::size_t s : chosen) cells.push_back({w, s});
  const int L = cfg.wnu_depth;
  const double n = cfg.n;
  const std::vector<OscVariant> variants{OscVariant::l1_nu, OscVariant::l2_lambda_mu, OscVariant::l2_muinv_lambdainv};

  ExperimentReport report = run_cells(cells.size(), cfg.workers, [&](std::size_t i) {
    const auto& wspec = cfg.weights[cells[i].weight];
    const auto& sspec = cfg.symbols[cells[i].symbol];
    const TorusGrid grid(cfg.n, L);
    const GridFunction b = make_symbol(sspec, grid, cfg.seed);
    const WeightPair w = make_weight_pair(wspec, grid);
    const DyadicSystem sys(grid, Shift::from_index(cfg.n, 0));
    std::vector<OscillationReport> osc;
    for (OscVariant v : variants) osc.push_back(oscillation_sequence(b, w, sys, cfg.enlargement, v));
    const IndexedSequence gap = holder_gap(w, sys, cfg.enlargement);

    ExperimentReport out;
    std::vector<double> weak;
    for (std::size_t v = 0; v < variants.size(); ++v) {
      weak.push_back(osc[v].norm(n, kInfinity));
      out.rows.push_back(row("wnu", sspec.id, wspec.id, cfg.n, L, n, kInfinity, "osc-" + to_string(variants[v]),
                             "omega-0", weak.back()));
      for (double p : cfg.wnu_p)
        for (double q : cfg.wnu_q)
          out.rows.push_back(row("wnu", sspec.id, wspec.id, cfg.n, L, p, q, "osc-" + to_string(variants[v]),
                                 "omega-0", osc[v].norm(p, q)));
    }
    const std::vector<std::pair<int, int>> pairs{{0, 1}, {0, 2}, {1, 2}};
    for (auto [a, c] : pairs) {
      ReportRow r = row("wnu", sspec.id, wspec.id, cfg.n, L, n, kInfinity,
                        "ratio:" + to_string(variants[a]) + "/" + to_string(variants[c]), "omega-0", weak[a]);
      r.ratio_partner = "osc-" + to_string(variants[c]);
      r.ratio = safe_ratio(weak[a], weak[c]);
      out.rows.push_back(r);
    }
    double literal = 0.0, exact = 0.0;
    for (std::size_t k = 0; k < osc[0].values.size(); ++k) {
      const double geo = std::sqrt(osc[1].values.values[k] * osc[2].values.values[k]);
      const double l1 = osc[0].values.values[k];
      if (l1 == 0.0) continue;
      literal = std::max(literal, geo > 0.0 ? l1 / geo : kInfinity);
      exact = std::max(exact, geo > 0.0 ? l1 / (gap.values[k] * geo) : kInfinity);
    }
    out.rows.push_back(row("wnu", sspec.id, wspec.id, cfg.n, L, n, kInfinity, "holder-max-l1-over-geomean", "omega-0", literal));
    out.rows.push_back(row("wnu", sspec.id, wspec.id, cfg.n, L, n, kInfinity, "holder-max-l1-over-gap-geomean", "omega-0", exact));
    return out;
  });

  for (std::size_t w = 0; w < cfg.weights.size(); ++w) {
    std::map<std::string, std::vector<double>> groups;
    for (const auto& r : report.rows)
      if (r.weight_id == cfg.weights[w].id && r.ratio && r.form.rfind("ratio:", 0) == 0) groups[r.form].push_back(*r.ratio);
    for (const auto& [form, ratios] : groups)
      add_spread(report, "wnu", cfg.weights[w].id, cfg.n, n, kInfinity, form.substr(6), "omega-0", ratios);
  }
  return report;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string to_csv(const ExperimentReport& report) {
  std::ostringstream os;
  for (std::size_t i = 0; i < kCsvColumns.size(); ++i) os << (i ? "," : "") << kCsvColumns[i];
  os << '\n';
  for (const auto& r : report.rows) {
    os << r.experiment << ',' << r.symbol_id << ',' << r.weight_id << ',' << r.n << ',' << r.L << ','
       << format_number(r.p) << ',' << format_number(r.q) << ',' << r.form << ',' << r.scope << ','
       << format_number(r.value) << ',' << r.ratio_partner << ',' << (r.ratio ? format_number(*r.ratio) : "")
       << '\n';
  }
  return os.str();
}

void emit_csv(const ExperimentReport& report, const std::filesystem::path& path) {
  if (report.rows.empty()) throw std::invalid_argument("refusing to emit an empty report");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_csv(report);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

void emit_svg(const ExperimentReport& report, const std::filesystem::path& path) {
  if (report.rows.empty()) throw std::invalid_argument("refusing to emit an empty report");
  std::map<std::string, std::map<int, double>> series;
  for (const auto& r : report.rows) {
    if (!(r.value > 0.0) || r.form.rfind("spread:", 0) == 0) continue;
    series[r.symbol_id + " " + r.weight_id + " " + r.form + " " + r.scope + " p=" + format_number(r.p)][r.L] = r.value;
  }
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (auto it = series.begin(); it != series.end();) {
    if (it->second.size() < 2) {
      it = series.erase(it);
      continue;
    }
    for (const auto& [L, v] : it->second) {
      xmin = std::min<double>(xmin, L);
      xmax = std::max<double>(xmax, L);
      ymin = std::min(ymin, std::log10(v));
      ymax = std::max(ymax, std::log10(v));
    }
    ++it;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const double W = 900, H = 600, pad = 60;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (series.empty()) {
    out << "<text x=\"20\" y=\"40\">no multi-level series</text>\n</svg>\n";
    return;
  }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  auto sx = [&](double x) { return pad + (x - xmin) / (xmax - xmin) * (W - 2 * pad); };
  auto sy = [&](double y) { return H - pad - (y - ymin) / (ymax - ymin) * (H - 2 * pad); };
  out << "<line x1=\"" << pad << "\" y1=\"" << H - pad << "\" x2=\"" << W - pad << "\" y2=\"" << H - pad
      << "\" stroke=\"black\"/>\n<line x1=\"" << pad << "\" y1=\"" << pad << "\" x2=\"" << pad << "\" y2=\"" << H - pad
      << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"" << H - 15 << "\">L</text>\n";
  out << "<text x=\"10\" y=\"" << pad - 20 << "\">log10 value [" << format_number(ymin) << ", " << format_number(ymax)
      << "]</text>\n";
  const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  std::size_t idx = 0;
  for (const auto& [name, pts] : series) {
    out << "<polyline fill=\"none\" stroke=\"" << colors[idx % 8] << "\" points=\"";
    for (const auto& [L, v] : pts) out << sx(L) << ',' << sy(std::log10(v)) << ' ';
    out << "\"><title>" << name << "</title></polyline>\n";
    ++idx;
  }
  out << "</svg>\n";
}

void export_operator(const DenseOperator& op, const std::filesystem::path& stem, const json& meta) {
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = op.matrix;
  std::filesystem::path bin = stem;
  bin += ".bin";
  std::ofstream out(bin, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + bin.string());
  out.write(reinterpret_cast<const char*>(rm.data()), static_cast<std::streamsize>(rm.size() * sizeof(double)));
  json side = meta;
  side["rows"] = op.matrix.rows();
  side["cols"] = op.matrix.cols();
  side["dtype"] = "float64";
  side["order"] = "row-major";
  side["source_weight"] = op.source_weight;
  side["target_weight"] = op.target_weight;
  side["data"] = bin.filename().string();
  std::filesystem::path js = stem;
  js += ".json";
  std::ofstream sj(js);
  if (!sj) throw std::runtime_error("cannot write " + js.string());
  sj << side.dump(2) << '\n';
}

void export_spectrum(const std::vector<double>& values, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "k,s_k\n";
  for (std::size_t k = 0; k < values.size(); ++k) out << k + 1 << ',' << format_number(values[k]) << '\n';
}

void export_coefficients(const HaarCoefficients& c, const DyadicSystem& system, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const int n = system.grid().dim();
  out << "omega,level,m,epsilon,value\n";
  for (int k = 0; k < system.depth(); ++k)
    for (const auto& q : system.level_cubes(k))
      for (unsigned e = 0; e < static_cast<unsigned>(Signature::cancellative_count(n)); ++e) {
        std::string bits;
        for (int i = 0; i < n; ++i) bits += Signature{e, n}.component(i) ? '1' : '0';
        out << system.omega() << ',' << k << ',' << q.flat_m << ',' << bits << ',' << format_number(c.coeff(q, e))
            << '\n';
      }
}

void export_oscillation(const OscillationReport& r, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "omega,level,m,variant,value\n";
  for (std::size_t i = 0; i < r.values.size(); ++i) {
    const CubeKey& k = r.values.keys[i];
    out << k.omega << ',' << k.level << ',' << k.m << ',' << to_string(r.variant) << ','
        << format_number(r.values.values[i]) << '\n';
  }
}

}  // namespace wcomm
