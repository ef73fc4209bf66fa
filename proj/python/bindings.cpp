#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "effstat/cli.hpp"
#include "effstat/coverage.hpp"
#include "effstat/error.hpp"
#include "effstat/intervals.hpp"
#include "effstat/output.hpp"
#include "effstat/probability.hpp"
#include "effstat/variance.hpp"

namespace py = pybind11;
using namespace effstat;

namespace {

WeightedObservations observations(const std::vector<double>& weights,
                                  const std::vector<bool>& successes) {
  if (weights.size() != successes.size())
    throw DomainError("weights and successes must have the same length");
  WeightedObservations obs(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) obs[i] = {weights[i], successes[i], std::nullopt};
  return obs;
}

py::dict weighted_dict(const WeightedStudy& s) {
  py::dict d;
  d["mc_variance"] = s.mc_variance;
  d["mc_variance_se"] = s.mc_variance_se;
  d["mean_p_hat"] = s.mean_p_hat;
  for (std::size_t i = 0; i < kWeightedEstimators; ++i) {
    const auto e = static_cast<WeightedEstimator>(i);
    d[("ratio_" + to_string(e)).c_str()] = s.ratio(e);
  }
  d["min_neff_ratio"] = s.min_neff_ratio;
  d["max_neff_ratio"] = s.max_neff_ratio;
  d["reps_used"] = s.reps_used;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Efficiency estimates, confidence intervals and coverage studies";
  m.attr("__version__") = kVersion;

  auto domain = py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_RuntimeError);
  py::register_exception<DegenerateInterval>(m, "DegenerateInterval", domain.ptr());

  py::class_<Interval>(m, "Interval")
      .def_readonly("lower", &Interval::lower)
      .def_readonly("upper", &Interval::upper)
      .def_readonly("level", &Interval::level)
      .def_readonly("clipped", &Interval::clipped)
      .def_property_readonly("method", [](const Interval& iv) { return to_string(iv.method); })
      .def("contains", &Interval::contains)
      .def("width", &Interval::width)
      .def("__repr__", [](const Interval& iv) {
        std::ostringstream s;
        s << "Interval(" << to_string(iv.method) << ", " << iv.lower << ", " << iv.upper << ")";
        return s.str();
      });

  py::class_<WeightedEstimate>(m, "WeightedEstimate")
      .def_readonly("p_hat", &WeightedEstimate::p_hat)
      .def_readonly("n_eff_hat", &WeightedEstimate::n_eff_hat)
      .def_readonly("sum_w", &WeightedEstimate::sum_w)
      .def_readonly("sum_w2", &WeightedEstimate::sum_w2)
      .def_readonly("out_of_range", &WeightedEstimate::out_of_range)
      .def_readonly("negative_total", &WeightedEstimate::negative_total);

  m.def("f_exact", &f_exact, py::arg("n"), py::arg("tol") = 1e-12);
  m.def("f_large_n", &f_large_n, py::arg("n"));
  m.def("f_small_n", &f_small_n, py::arg("n"));
  m.def("f_approx", &f_approx, py::arg("n"));
  m.def("q_log", &q_log, py::arg("x"), py::arg("q"));
  m.def("z_from_level", &z_from_level, py::arg("level"));
  m.def("quantile_beta", &quantile_beta, py::arg("q"), py::arg("a"), py::arg("b"));

  m.def("var_binomial", &var_binomial, py::arg("p"), py::arg("n"));
  m.def(
      "var_poisson_trials",
      [](double p, double n, const std::string& mode) {
        return var_poisson_trials(p, n, parse_fn_mode(mode));
      },
      py::arg("p"), py::arg("n"), py::arg("mode") = "exact");
  m.def(
      "effective_count", [](const std::vector<double>& w) { return effective_count(w); },
      py::arg("weights"));
  m.def(
      "var_weighted",
      [](double p, double n_eff, const std::string& mode) {
        return var_weighted(p, n_eff, parse_fn_mode(mode));
      },
      py::arg("p"), py::arg("n_eff"), py::arg("mode") = "large-n");
  m.def(
      "var_extra",
      [](double n1, double n2, double var1, double var2, double rho) {
        const auto r = var_extra(ExtraFluctuationInputs::from_n1_n2(n1, n2, var1, var2, rho));
        return py::make_tuple(r.value, r.fluctuation_artifact);
      },
      py::arg("n1"), py::arg("n2"), py::arg("var1"), py::arg("var2"), py::arg("rho") = 0.0,
      "Variance of n1/(n1+n2) with count variances var1, var2. Returns (value, inconsistent).");
  m.def(
      "var_extra_total",
      [](double n1, double n, double var1, double var_n, double rho) {
        const auto r = var_extra(ExtraFluctuationInputs::from_n1_n(n1, n, var1, var_n, rho));
        return py::make_tuple(r.value, r.fluctuation_artifact);
      },
      py::arg("n1"), py::arg("n"), py::arg("var1"), py::arg("var_n"), py::arg("rho") = 0.0);

  m.def(
      "estimate_weighted",
      [](const std::vector<double>& w, const std::vector<bool>& s) {
        return estimate_weighted(observations(w, s));
      },
      py::arg("weights"), py::arg("successes"));

  m.def(
      "interval",
      [](const std::string& method, std::int64_t k, std::int64_t n, double level) {
        if (k < 0 || k > n) throw DomainError("need 0 <= k <= n");
        return count_method(method).build({k, n - k}, level);
      },
      py::arg("method"), py::arg("k"), py::arg("n"), py::arg("level") = 0.6827,
      "Interval for k successes in n trials. Methods as in count_method_names().");
  m.def("count_method_names", &count_method_names);
  m.def(
      "wilson_weighted",
      [](const std::vector<double>& w, const std::vector<bool>& s, double level) {
        return wilson_weighted(estimate_weighted(observations(w, s)), level);
      },
      py::arg("weights"), py::arg("successes"), py::arg("level") = 0.6827);
  m.def(
      "wilson_weighted_summary",
      [](double p_hat, double n_eff, double level) {
        return wilson_weighted({p_hat, n_eff, n_eff, n_eff, false, false}, level);
      },
      py::arg("p_hat"), py::arg("n_eff"), py::arg("level") = 0.6827);
  m.def(
      "wilson_extra",
      [](double n1, double n2, double var1, double var2, double level) {
        return wilson_extra(ExtraFluctuationInputs::from_n1_n2(n1, n2, var1, var2), level);
      },
      py::arg("n1"), py::arg("n2"), py::arg("var1"), py::arg("var2"), py::arg("level") = 0.6827);

  m.def(
      "coverage_binomial",
      [](const std::string& method, double p, std::int64_t n, double level) {
        return coverage_binomial(count_method(method), p, n, level);
      },
      py::arg("method"), py::arg("p"), py::arg("n"), py::arg("level") = 0.6827);
  m.def(
      "coverage_poisson",
      [](const std::string& method, double p, double n, double level) {
        const auto r = coverage_poisson(count_method(method), p, n, level);
        return py::make_tuple(r.coverage, r.truncation_bound);
      },
      py::arg("method"), py::arg("p"), py::arg("n"), py::arg("level") = 0.6827,
      "Returns (coverage, truncation_bound).");
  m.def(
      "average_coverage",
      [](const std::string& method, double n, double level, int grid, const std::string& sampling) {
        return average_coverage(count_method(method), n, level, grid, parse_sampling(sampling));
      },
      py::arg("method"), py::arg("n"), py::arg("level") = 0.6827, py::arg("grid") = 1000,
      py::arg("sampling") = "poisson");

  m.def(
      "simulate_poisson_trials",
      [](double p, double n, std::int64_t reps, std::uint64_t seed, unsigned threads) {
        RngStream rng(seed);
        PoissonTrialStudy s;
        {
          py::gil_scoped_release release;
          s = simulate_poisson_trials(p, n, reps, rng, threads);
        }
        py::dict d;
        d["mc_variance"] = s.mc_variance;
        d["std_error"] = s.std_error;
        d["predicted"] = s.predicted;
        d["reps_used"] = s.reps_used;
        return d;
      },
      py::arg("p"), py::arg("n"), py::arg("reps"), py::arg("seed") = 0, py::arg("threads") = 1);
  m.def(
      "simulate_weighted",
      [](const std::string& dist, double p, double n, std::int64_t reps, std::uint64_t seed,
         unsigned threads) {
        const Distribution d = parse_distribution(dist);
        RngStream rng(seed);
        WeightedStudy s;
        {
          py::gil_scoped_release release;
          s = simulate_weighted_variance(d, p, n, reps, rng, threads);
        }
        return weighted_dict(s);
      },
      py::arg("dist"), py::arg("p"), py::arg("n"), py::arg("reps"), py::arg("seed") = 0,
      py::arg("threads") = 1);
  m.def(
      "simulate_extra",
      [](double n, double p, double bkg, std::int64_t reps, std::uint64_t seed, double level,
         unsigned threads) {
        RngStream rng(seed);
        ExtraStudy s;
        {
          py::gil_scoped_release release;
          s = simulate_extra(ScenarioExtra::with_background(n, p, bkg, reps), level, rng, threads);
        }
        py::dict d;
        d["mc_sd"] = s.mc_sd;
        d["formula_sd"] = s.formula_sd;
        d["corrected_sd"] = s.corrected_sd;
        d["mean_p_hat"] = s.mean_p_hat;
        d["wilson_extra_coverage"] = s.wilson_extra_coverage;
        d["reps_used"] = s.reps_used;
        return d;
      },
      py::arg("n"), py::arg("p"), py::arg("bkg"), py::arg("reps"), py::arg("seed") = 0,
      py::arg("level") = 0.6827, py::arg("threads") = 1);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::vector<const char*> argv{"effstat"};
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run the command-line tool in-process. Returns (exit code, stdout, stderr).");
}
