#include "effstat/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>

#include "effstat/coverage.hpp"
#include "effstat/error.hpp"
#include "effstat/intervals.hpp"
#include "effstat/output.hpp"
#include "effstat/parallel.hpp"
#include "effstat/probability.hpp"
#include "effstat/variance.hpp"

namespace effstat::cli {

namespace {

double parse_number(std::string_view text) {
  const std::string s(text);
  char* end = nullptr;
  const double value = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw UsageError("not a number: '" + s + "'");
  return value;
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.emplace_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::int64_t as_count(double value, const char* name) {
  if (!(value >= 0) || value != std::floor(value) || value > 9e15)
    throw UsageError(std::string("--") + name + " must be a non-negative integer");
  return static_cast<std::int64_t>(value);
}

std::string join_inputs(std::initializer_list<std::pair<const char*, double>> items) {
  std::string text;
  for (const auto& [name, value] : items) {
    if (!text.empty()) text += ';';
    text += std::string(name) + '=' + format_number(value);
  }
  return text;
}

XScenario parse_scenario(const std::string& spec) {
  if (spec == "cubic") return XScenario::cubic_weight();
  const auto parts = split(spec, ':');
  if (parts[0] == "constant" && (parts.size() == 2 || parts.size() == 3)) {
    const double p = parse_number(parts[1]);
    const double w = parts.size() == 3 ? parse_number(parts[2]) : 1.0;
    try {
      return XScenario::constant(p, w);
    } catch (const DomainError& e) {
      throw UsageError(e.what());
    }
  }
  throw UsageError("unknown scenario '" + spec + "' (expected cubic or constant:p[:w])");
}

Distribution parse_weights(const std::string& spec) {
  try {
    Distribution d = parse_distribution(spec);
    validate(d);
    return d;
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
}

std::vector<double> grid_option(const std::string& spec, const char* name) {
  try {
    return parse_grid(spec);
  } catch (const UsageError& e) {
    throw UsageError(std::string("--") + name + ": " + e.what());
  }
}

struct Globals {
  std::string format = "csv";
  std::string output;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

// ---------------------------------------------------------------------------

struct IntervalArgs {
  std::string method;
  std::optional<double> k, n;
  double level = 0.6827;
  std::string fn_mode = "blend";
  std::string events;
  std::optional<double> p_hat, n_eff;
  std::optional<double> n1, n2, var1, var2, var_n;
  double rho = 0;
};

void check_level(double level) {
  if (!(level > 0 && level < 1)) throw UsageError("--level must lie in (0, 1)");
}

OutputRecord cmd_interval(const IntervalArgs& a) {
  check_level(a.level);
  OutputRecord record({"method", "inputs", "p_hat", "lower", "upper", "level", "z", "clipped"});
  Interval iv;
  std::string inputs;
  double p_hat = 0;

  if (a.method == "wilson-weighted") {
    WeightedEstimate est;
    if (!a.events.empty()) {
      std::ifstream in(a.events, std::ios::binary);
      if (!in) throw UsageError("cannot open events file '" + a.events + "'");
      est = estimate_weighted(read_events(in));
      inputs = "events=" + a.events;
    } else if (a.p_hat && a.n_eff) {
      if (!(*a.n_eff > 0)) throw UsageError("--n-eff must be positive");
      est.p_hat = *a.p_hat;
      est.n_eff_hat = *a.n_eff;
      est.sum_w = *a.n_eff;
      est.sum_w2 = *a.n_eff;
      inputs = join_inputs({{"p_hat", *a.p_hat}, {"n_eff", *a.n_eff}});
    } else {
      throw UsageError("wilson-weighted needs --events or both --p-hat and --n-eff");
    }
    iv = wilson_weighted(est, a.level);
    p_hat = est.p_hat;
  } else if (a.method == "wilson-extra") {
    if (!a.n1 || !a.var1) throw UsageError("wilson-extra needs --n1 and --var1");
    ExtraFluctuationInputs in;
    if (a.n2 && a.var2) {
      in = ExtraFluctuationInputs::from_n1_n2(*a.n1, *a.n2, *a.var1, *a.var2, a.rho);
      inputs = join_inputs({{"n1", *a.n1}, {"n2", *a.n2}, {"var1", *a.var1}, {"var2", *a.var2},
                            {"rho", a.rho}});
      p_hat = *a.n1 / (*a.n1 + *a.n2);
    } else if (a.n && a.var_n) {
      in = ExtraFluctuationInputs::from_n1_n(*a.n1, *a.n, *a.var1, *a.var_n, a.rho);
      inputs = join_inputs({{"n1", *a.n1}, {"n", *a.n}, {"var1", *a.var1}, {"var_n", *a.var_n},
                            {"rho", a.rho}});
      p_hat = *a.n1 / *a.n;
    } else {
      throw UsageError("wilson-extra needs --n2 and --var2, or --n and --var-n");
    }
    iv = wilson_extra(in, a.level);
  } else {
    if (!a.k || !a.n) throw UsageError(a.method + " needs --k and --n");
    const std::int64_t k = as_count(*a.k, "k");
    const std::int64_t n = as_count(*a.n, "n");
    if (k > n) throw UsageError("--k must not exceed --n");
    std::string name = a.method;
    if (name == "wilson-poisson") name += ":" + a.fn_mode;
    CountMethod method;
    try {
      method = count_method(name);
    } catch (const DomainError& e) {
      throw UsageError(e.what());
    }
    const EfficiencyCounts counts{k, n - k};
    iv = method.build(counts, a.level);
    p_hat = estimate(counts);
    inputs = join_inputs({{"k", static_cast<double>(k)}, {"n", static_cast<double>(n)}});
    if (a.method == "wilson-poisson") inputs += ";fn_mode=" + a.fn_mode;
  }
  record.add_row({to_string(iv.method), inputs, p_hat, iv.lower, iv.upper, a.level,
                  z_from_level(a.level), iv.clipped});
  return record;
}

// ---------------------------------------------------------------------------

struct FnTableArgs {
  std::string grid = "log:0.1:100:400";
  std::string modes = "exact,large-n,small-n,blend";
  double tol = 1e-12;
};

OutputRecord cmd_fn_table(const FnTableArgs& a) {
  const auto grid = grid_option(a.grid, "grid");
  std::vector<std::string> columns{"n"};
  std::vector<std::function<double(double)>> fns;
  for (const auto& mode : split(a.modes, ',')) {
    if (mode == "exact") {
      if (!(a.tol > 0 && a.tol <= 1e-3)) throw UsageError("--tol must lie in (0, 1e-3]");
      const double tol = a.tol;
      columns.push_back("f_exact");
      fns.emplace_back([tol](double n) { return f_exact(n, tol); });
    } else if (mode == "large-n") {
      columns.push_back("f_large_n");
      fns.emplace_back(f_large_n);
    } else if (mode == "small-n") {
      columns.push_back("f_small_n");
      fns.emplace_back(f_small_n);
    } else if (mode == "blend") {
      columns.push_back("f_approx");
      fns.emplace_back(f_approx);
    } else {
      throw UsageError("unknown f(n) mode '" + mode + "'");
    }
  }
  for (const double n : grid)
    if (!(n > 0)) throw UsageError("--grid values must be positive");
  OutputRecord record(columns);
  for (const double n : grid) {
    std::vector<Cell> row{n};
    for (const auto& fn : fns) row.emplace_back(fn(n));
    record.add_row(std::move(row));
  }
  return record;
}

// ---------------------------------------------------------------------------

struct CoverageArgs {
  std::vector<std::string> methods;
  std::string p_grid = "lin:0.01:0.99:99";
  std::string n_grid;
  double level = 0.6827;
  std::string sampling = "poisson";
  bool average = false;
  int grid = 1000;
  std::string weights;
  std::optional<double> bkg;
  std::optional<std::int64_t> reps;
};

bool is_mc_method(const std::string& name) {
  return name == "wilson-weighted" || name == "wilson-extra";
}

OutputRecord cmd_coverage(const CoverageArgs& a, const Globals& g) {
  check_level(a.level);
  const Sampling sampling = [&] {
    try {
      return parse_sampling(a.sampling);
    } catch (const DomainError& e) {
      throw UsageError(e.what());
    }
  }();
  const auto n_grid = grid_option(a.n_grid, "n-grid");
  std::vector<CountMethod> exact;
  std::vector<std::string> mc;
  for (const auto& name : a.methods) {
    if (is_mc_method(name)) {
      mc.push_back(name);
      continue;
    }
    try {
      exact.push_back(count_method(name));
    } catch (const DomainError& e) {
      throw UsageError(e.what());
    }
  }
  const unsigned threads = resolve_threads(g.threads);

  if (a.average) {
    if (!mc.empty()) throw UsageError("--average supports exact methods only");
    if (a.grid < 100) throw UsageError("--grid must be at least 100");
    OutputRecord record({"method", "n", "level", "sampling", "grid", "average_coverage", "error"});
    for (const auto& cell : average_scan(exact, n_grid, a.level, sampling, a.grid, threads))
      record.add_row({cell.method, cell.n, cell.level, to_string(cell.sampling),
                      static_cast<std::int64_t>(cell.grid), cell.average, cell.error});
    return record;
  }

  const auto p_grid = grid_option(a.p_grid, "p-grid");
  OutputRecord record({"method", "p", "n", "level", "sampling", "mode", "coverage",
                       "truncation_bound", "reps", "error"});
  double worst_bound = 0;
  if (!exact.empty()) {
    for (const auto& cell : scan_grid(exact, p_grid, n_grid, a.level, sampling, threads)) {
      worst_bound = std::max(worst_bound, cell.truncation_bound);
      record.add_row({cell.method, cell.p, cell.n, cell.level, to_string(cell.sampling),
                      std::string("exact"), cell.coverage, cell.truncation_bound,
                      std::int64_t{0}, cell.error});
    }
  }
  if (!mc.empty()) {
    if (sampling != Sampling::Poisson)
      throw UsageError("Monte-Carlo methods use Poisson sampling only");
    if (!a.reps) throw UsageError("Monte-Carlo methods need --reps");
    std::optional<Distribution> weights;
    const RngStream base(g.seed);
    std::uint64_t cell_index = 0;
    for (const auto& name : mc) {
      if (name == "wilson-weighted") {
        if (a.weights.empty()) throw UsageError("wilson-weighted coverage needs --weights");
        weights = parse_weights(a.weights);
      } else if (!a.bkg) {
        throw UsageError("wilson-extra coverage needs --bkg");
      }
      for (const double p : p_grid) {
        for (const double n : n_grid) {
          RngStream stream = base.derive(cell_index++);
          double coverage = std::nan("");
          std::string error;
          try {
            if (name == "wilson-weighted") {
              coverage = coverage_weighted_mc(*weights, p, n, a.level, *a.reps, stream, threads);
            } else {
              const auto scenario = ScenarioExtra::with_background(n, p, *a.bkg, *a.reps);
              coverage = simulate_extra(scenario, a.level, stream, threads).wilson_extra_coverage;
            }
          } catch (const std::exception& e) {
            error = e.what();
          }
          record.add_row({name, p, n, a.level, std::string("poisson"), std::string("monte-carlo"),
                          coverage, 0.0, *a.reps, error});
        }
      }
    }
    record.set_meta("seed", std::to_string(g.seed));
    if (!a.weights.empty()) record.set_meta("weights", a.weights);
    if (a.bkg) record.set_meta("background_fraction", format_number(*a.bkg));
  }
  record.set_meta("max_truncation_bound", format_number(worst_bound));
  return record;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::vector<std::string> dists;
  std::string n = "100";
  std::string p = "0.5";
  std::optional<std::int64_t> reps;
  std::string scenario = "cubic";
  int bins = 20;
  int bootstrap = 100;
  double bkg = 0.2;
  double level = 0.6827;
};

std::int64_t reps_or(const SimulateArgs& a, std::int64_t fallback) {
  const std::int64_t reps = a.reps.value_or(fallback);
  if (reps < 1) throw UsageError("--reps must be positive");
  return reps;
}

OutputRecord sim_weighted(const SimulateArgs& a, const Globals& g) {
  if (a.dists.empty()) throw UsageError("simulate weighted needs --dist");
  std::vector<Distribution> dists;
  for (const auto& spec : a.dists) dists.push_back(parse_weights(spec));
  const auto n_grid = grid_option(a.n, "n");
  const auto p_grid = grid_option(a.p, "p");
  const auto reps = reps_or(a, 100000);
  OutputRecord record({"dist", "p", "n", "reps_used", "skipped", "mc_variance", "mc_variance_se",
                       "mean_p_hat", "ratio_unity", "ratio_large_n_count", "ratio_large_n_eff",
                       "ratio_blend_eff", "min_neff_ratio", "max_neff_ratio"});
  const RngStream base(g.seed);
  std::uint64_t index = 0;
  for (std::size_t d = 0; d < dists.size(); ++d) {
    for (const double p : p_grid) {
      for (const double n : n_grid) {
        RngStream stream = base.derive(index++);
        const auto s = simulate_weighted_variance(dists[d], p, n, reps, stream, g.threads);
        record.add_row({to_string(dists[d]), p, n, s.reps_used, s.skipped, s.mc_variance,
                        s.mc_variance_se, s.mean_p_hat, s.ratio(WeightedEstimator::Unity),
                        s.ratio(WeightedEstimator::LargeNCount),
                        s.ratio(WeightedEstimator::LargeNEffective),
                        s.ratio(WeightedEstimator::BlendEffective), s.min_neff_ratio,
                        s.max_neff_ratio});
      }
    }
  }
  return record;
}

OutputRecord sim_xdep(const SimulateArgs& a, const Globals& g) {
  const XScenario scenario = parse_scenario(a.scenario);
  const auto n_grid = grid_option(a.n, "n");
  const auto reps = reps_or(a, 1000);
  OutputRecord record({"scenario", "n", "p_bar", "mean_p_hat", "se_mean_p_hat", "pull",
                       "mc_variance", "mean_binned", "mean_bootstrap", "mean_wrong",
                       "ratio_binned", "ratio_bootstrap", "ratio_wrong", "reps_used",
                       "binned_failures"});
  const RngStream base(g.seed);
  XdepOptions options;
  options.bins = a.bins;
  options.bootstrap_replicas = a.bootstrap;
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    RngStream stream = base.derive(i);
    const auto s = simulate_xdep(scenario, n_grid[i], reps, stream, options, g.threads);
    record.add_row({a.scenario, n_grid[i], s.p_bar, s.mean_p_hat, s.se_mean_p_hat,
                    (s.mean_p_hat - s.p_bar) / s.se_mean_p_hat, s.mc_variance, s.mean_binned,
                    s.mean_bootstrap, s.mean_wrong, s.mean_binned / s.mc_variance,
                    s.mean_bootstrap / s.mc_variance, s.mean_wrong / s.mc_variance, s.reps_used,
                    s.binned_failures});
  }
  return record;
}

OutputRecord sim_extra(const SimulateArgs& a, const Globals& g) {
  const auto n_grid = grid_option(a.n, "n");
  const auto p_grid = grid_option(a.p, "p");
  const auto reps = reps_or(a, 10000);
  check_level(a.level);
  OutputRecord record({"p", "n", "bkg_sigma1", "bkg_sigma2", "mc_sd", "formula_sd",
                       "corrected_sd", "ratio_formula", "ratio_corrected", "mean_p_hat",
                       "wilson_extra_coverage", "degenerate_intervals", "redraws", "reps_used"});
  const RngStream base(g.seed);
  std::uint64_t index = 0;
  for (const double n : n_grid) {
    for (const double p : p_grid) {
      RngStream stream = base.derive(index++);
      const auto scenario = ScenarioExtra::with_background(n, p, a.bkg, reps);
      const auto s = simulate_extra(scenario, a.level, stream, g.threads);
      record.add_row({p, n, scenario.bkg_sigma1, scenario.bkg_sigma2, s.mc_sd, s.formula_sd,
                      s.corrected_sd, s.formula_sd / s.mc_sd, s.corrected_sd / s.mc_sd,
                      s.mean_p_hat, s.wilson_extra_coverage, s.degenerate_intervals, s.redraws,
                      s.reps_used});
    }
  }
  record.set_meta("background_fraction", format_number(a.bkg));
  return record;
}

OutputRecord sim_poisson(const SimulateArgs& a, const Globals& g) {
  const auto n_grid = grid_option(a.n, "n");
  const auto p_grid = grid_option(a.p, "p");
  const auto reps = reps_or(a, 1000000);
  OutputRecord record({"p", "n", "mc_variance", "std_error", "predicted", "pull", "reps_used",
                       "skipped"});
  const RngStream base(g.seed);
  std::uint64_t index = 0;
  for (const double p : p_grid) {
    for (const double n : n_grid) {
      RngStream stream = base.derive(index++);
      const auto s = simulate_poisson_trials(p, n, reps, stream, g.threads);
      record.add_row({p, n, s.mc_variance, s.std_error, s.predicted,
                      (s.mc_variance - s.predicted) / s.std_error, s.reps_used, s.skipped});
    }
  }
  return record;
}

OutputRecord sim_bias(const SimulateArgs& a, const Globals& g) {
  const XScenario scenario = parse_scenario(a.scenario);
  const auto n_grid = grid_option(a.n, "n");
  const auto reps = reps_or(a, 1000);
  if (reps > 1000000000) throw UsageError("--reps too large");
  RngStream stream(g.seed);
  const double target = effective_efficiency_target(scenario);
  OutputRecord record({"scenario", "n", "p_bar", "mean_p_hat", "std_error", "pull", "reps"});
  for (const auto& pt : bias_curve(scenario, n_grid, static_cast<int>(reps), stream))
    record.add_row({a.scenario, pt.n, target, pt.mean_p_hat, pt.std_error,
                    (pt.mean_p_hat - target) / pt.std_error, pt.reps});
  return record;
}

// Command line for the metadata header. Thread count and output path do not
// change results and are left out so outputs compare byte for byte.
std::string recorded_command(int argc, const char* const* argv) {
  std::string text = "effstat";
  for (int i = 1; i < argc; ++i) {
    const std::string_view arg = argv[i];
    if (arg == "--threads" || arg == "--output" || arg == "-o") {
      ++i;
      continue;
    }
    if (arg.starts_with("--threads=") || arg.starts_with("--output=")) continue;
    text += ' ';
    text += arg;
  }
  return text;
}

}  // namespace

std::vector<double> parse_grid(std::string_view spec) {
  if (spec.empty()) throw UsageError("empty grid");
  const auto parts = split(spec, ':');
  if (parts.size() == 4 && (parts[0] == "log" || parts[0] == "lin")) {
    const double a = parse_number(parts[1]);
    const double b = parse_number(parts[2]);
    const double count = parse_number(parts[3]);
    if (!(count >= 1) || count != std::floor(count) || count > 1e7)
      throw UsageError("grid point count must be a positive integer");
    if (!(std::isfinite(a) && std::isfinite(b) && b >= a)) throw UsageError("grid bounds must satisfy a <= b");
    const bool log = parts[0] == "log";
    if (log && !(a > 0)) throw UsageError("log grid needs positive bounds");
    const auto n = static_cast<std::size_t>(count);
    std::vector<double> grid(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
      grid[i] = log ? std::exp(std::log(a) + t * (std::log(b) - std::log(a))) : a + t * (b - a);
    }
    grid.back() = n == 1 ? a : b;
    return grid;
  }
  if (parts.size() != 1) throw UsageError("cannot parse grid '" + std::string(spec) + "'");
  std::vector<double> grid;
  for (const auto& item : split(spec, ',')) grid.push_back(parse_number(item));
  return grid;
}

WeightedObservations read_events(std::istream& in) {
  std::string line;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return true;
    }
    return false;
  };
  if (!next_line()) throw UsageError("events file is empty");
  if (line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
  const auto header = split(line, ',');
  const bool has_x = header.size() == 3 && header[2] == "x";
  if (header.size() < 2 || header[0] != "weight" || header[1] != "success" ||
      (header.size() == 3 && !has_x) || header.size() > 3)
    throw UsageError("events header must be weight,success[,x]");
  WeightedObservations events;
  std::size_t row = 1;
  while (next_line()) {
    ++row;
    const auto fields = split(line, ',');
    if (fields.size() != header.size())
      throw UsageError("events row " + std::to_string(row) + " has the wrong number of fields");
    WeightedEntry entry;
    try {
      entry.weight = parse_number(fields[0]);
    } catch (const UsageError&) {
      throw UsageError("events row " + std::to_string(row) + ": bad weight");
    }
    if (fields[1] == "1")
      entry.success = true;
    else if (fields[1] == "0")
      entry.success = false;
    else
      throw UsageError("events row " + std::to_string(row) + ": success must be 0 or 1");
    if (has_x) entry.x = parse_number(fields[2]);
    events.push_back(entry);
  }
  if (events.empty()) throw UsageError("events file has no rows");
  return events;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Efficiency estimates, confidence intervals and coverage studies", "effstat"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kVersion);

  Globals g;
  app.add_option("--format", g.format, "csv or json (JSON lines)")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("-o,--output", g.output, "write results to this file");
  app.add_option("--seed", g.seed, "64-bit seed for Monte-Carlo commands");
  app.add_option("--threads", g.threads, "worker threads, 0 = one per core");

  IntervalArgs ia;
  auto* interval = app.add_subcommand("interval", "confidence interval for one measurement");
  interval->add_option("--method", ia.method)
      ->required()
      ->check(CLI::IsMember({"wilson", "wilson-poisson", "wilson-weighted", "wilson-extra",
                             "clopper-pearson", "normal", "bayes-uniform", "bayes-jeffreys"}));
  interval->add_option("--k", ia.k, "successes");
  interval->add_option("--n", ia.n, "trials (total n in the n1/n form of wilson-extra)");
  interval->add_option("--level", ia.level);
  interval->add_option("--fn-mode", ia.fn_mode, "unity, exact[:tol], large-n, small-n, blend");
  interval->add_option("--events", ia.events, "CSV file with weight,success[,x]");
  interval->add_option("--p-hat", ia.p_hat);
  interval->add_option("--n-eff", ia.n_eff);
  interval->add_option("--n1", ia.n1);
  interval->add_option("--n2", ia.n2);
  interval->add_option("--var1", ia.var1);
  interval->add_option("--var2", ia.var2);
  interval->add_option("--var-n", ia.var_n);
  interval->add_option("--rho", ia.rho);

  FnTableArgs fa;
  auto* fn_table = app.add_subcommand("fn-table", "variance correction f(n) on a grid");
  fn_table->add_option("--grid", fa.grid, "log:a:b:N, lin:a:b:N or a comma list");
  fn_table->add_option("--modes", fa.modes, "comma list of exact, large-n, small-n, blend");
  fn_table->add_option("--tol", fa.tol, "relative tolerance of the exact series");

  CoverageArgs ca;
  auto* coverage = app.add_subcommand("coverage", "coverage probability scans");
  coverage->add_option("--method", ca.methods)->required();
  coverage->add_option("--p-grid", ca.p_grid);
  coverage->add_option("--n-grid", ca.n_grid)->required();
  coverage->add_option("--level", ca.level);
  coverage->add_option("--sampling", ca.sampling, "binomial or poisson");
  coverage->add_flag("--average", ca.average, "average over p with a uniform prior");
  coverage->add_option("--grid", ca.grid, "cells for --average");
  coverage->add_option("--weights", ca.weights, "weight distribution for wilson-weighted");
  coverage->add_option("--bkg", ca.bkg, "background variance per count, as a fraction of n");
  coverage->add_option("--reps", ca.reps);

  SimulateArgs sa;
  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo validation studies");
  simulate->require_subcommand(1);
  auto* sim_w = simulate->add_subcommand("weighted", "variance of weighted estimates");
  sim_w->add_option("--dist", sa.dists, "exp:m, normal:m:s, uniform:a:b, const:v, ...")->required();
  auto* sim_x = simulate->add_subcommand("xdep", "covariate-dependent weights and efficiency");
  sim_x->add_option("--scenario", sa.scenario, "cubic or constant:p[:w]");
  sim_x->add_option("--bins", sa.bins);
  sim_x->add_option("--bootstrap", sa.bootstrap, "bootstrap replicas per sample");
  auto* sim_e = simulate->add_subcommand("extra", "counts with extra fluctuations");
  sim_e->add_option("--bkg", sa.bkg, "background variance per count, as a fraction of n");
  sim_e->add_option("--level", sa.level);
  auto* sim_p = simulate->add_subcommand("poisson", "Poisson-distributed trial counts");
  auto* sim_b = simulate->add_subcommand("bias", "mean estimate against n");
  sim_b->add_option("--scenario", sa.scenario, "cubic or constant:p[:w]");
  for (auto* sub : {sim_w, sim_x, sim_e, sim_p, sim_b}) {
    sub->add_option("--n", sa.n, "expected count grid");
    sub->add_option("--reps", sa.reps);
  }
  for (auto* sub : {sim_w, sim_e, sim_p}) sub->add_option("--p", sa.p, "efficiency grid");
  sa.p = "0.5";

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }
  if (sim_e->parsed() && sim_e->count("--p") == 0) sa.p = "lin:0.1:0.9:9";

  try {
    std::unique_ptr<OutputRecord> record;
    if (interval->parsed()) {
      record = std::make_unique<OutputRecord>(cmd_interval(ia));
    } else if (fn_table->parsed()) {
      record = std::make_unique<OutputRecord>(cmd_fn_table(fa));
    } else if (coverage->parsed()) {
      record = std::make_unique<OutputRecord>(cmd_coverage(ca, g));
    } else {
      if (sa.bins < 2) throw UsageError("--bins must be at least 2");
      if (sa.bootstrap < 100) throw UsageError("--bootstrap must be at least 100");
      if (sim_w->parsed()) record = std::make_unique<OutputRecord>(sim_weighted(sa, g));
      if (sim_x->parsed()) record = std::make_unique<OutputRecord>(sim_xdep(sa, g));
      if (sim_e->parsed()) record = std::make_unique<OutputRecord>(sim_extra(sa, g));
      if (sim_p->parsed()) record = std::make_unique<OutputRecord>(sim_poisson(sa, g));
      if (sim_b->parsed()) record = std::make_unique<OutputRecord>(sim_bias(sa, g));
      record->set_meta("seed", std::to_string(g.seed));
    }

    OutputRecord& r = *record;
    std::vector<std::pair<std::string, std::string>> meta = r.metadata();
    OutputRecord final_record(r.columns());
    final_record.set_meta("tool", std::string("effstat ") + kVersion);
    final_record.set_meta("command", recorded_command(argc, argv));
    final_record.set_meta("poisson_tail_cut", format_number(kPoissonTail));
    final_record.set_meta("zero_total_convention",
                          "samples with no trials are skipped; probabilities renormalized by 1-exp(-n)");
    for (auto& [key, value] : meta) final_record.set_meta(key, value);
    for (const auto& row : r.rows()) final_record.add_row(row);

    const OutputFormat format = parse_output_format(g.format);
    if (g.output.empty()) {
      final_record.write(out, format);
    } else {
      std::ofstream file(g.output, std::ios::binary);
      if (!file) throw UsageError("cannot write '" + g.output + "'");
      final_record.write(file, format);
    }
  } catch (const UsageError& e) {
    err << "effstat: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "effstat: " << e.what() << '\n';
    return kExitDomain;
  } catch (const NumericError& e) {
    err << "effstat: " << e.what() << '\n';
    return kExitDomain;
  } catch (const std::exception& e) {
    err << "effstat: internal error: " << e.what() << '\n';
    return 1;
  }
  return kExitOk;
}

}  // namespace effstat::cli
