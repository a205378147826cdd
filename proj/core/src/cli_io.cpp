#include "lsv/cli_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <set>
#include <stdexcept>
#include <vector>

#include "lsv/density.hpp"
#include "lsv/experiments.hpp"
#include "lsv/map.hpp"
#include "lsv/partition.hpp"
#include "lsv/renewal.hpp"

namespace lsv {

using nlohmann::json;

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) fail("unknown key '" + it.key() + "' in " + where);
  }
}

double get_num(const json& obj, const std::string& key, double lo, double hi) {
  if (!obj.contains(key)) fail("missing required field '" + key + "'");
  const json& v = obj.at(key);
  if (!v.is_number()) fail("field '" + key + "' must be a number");
  double x = v.get<double>();
  if (!(x >= lo && x <= hi))
    fail("field '" + key + "' = " + format_real(x) + " out of range [" + format_real(lo) +
         ", " + format_real(hi) + "]");
  return x;
}

double get_num(json& obj, const std::string& key, double lo, double hi, double def) {
  if (!obj.contains(key)) obj[key] = def;
  return get_num(obj, key, lo, hi);
}

long get_int(const json& obj, const std::string& key, long lo, long hi) {
  if (!obj.contains(key)) fail("missing required field '" + key + "'");
  const json& v = obj.at(key);
  if (!v.is_number_integer()) fail("field '" + key + "' must be an integer");
  long x = v.get<long>();
  if (x < lo || x > hi)
    fail("field '" + key + "' = " + std::to_string(x) + " out of range [" +
         std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return x;
}

long get_int(json& obj, const std::string& key, long lo, long hi, long def) {
  if (!obj.contains(key)) obj[key] = def;
  return get_int(obj, key, lo, hi);
}

std::string get_str(const json& obj, const std::string& key) {
  if (!obj.contains(key) || !obj.at(key).is_string())
    fail("missing or non-string field '" + key + "'");
  return obj.at(key).get<std::string>();
}

std::vector<double> get_num_array(const json& obj, const std::string& key, double lo,
                                  double hi) {
  if (!obj.contains(key) || !obj.at(key).is_array())
    fail("missing or non-array field '" + key + "'");
  std::vector<double> out;
  for (const json& v : obj.at(key)) {
    if (!v.is_number()) fail("field '" + key + "' must contain numbers");
    double x = v.get<double>();
    if (!(x >= lo && x <= hi)) fail("entry " + format_real(x) + " of '" + key + "' out of range");
    out.push_back(x);
  }
  if (out.empty()) fail("field '" + key + "' must be nonempty");
  return out;
}

std::vector<std::size_t> get_size_array(const json& obj, const std::string& key) {
  if (!obj.contains(key) || !obj.at(key).is_array())
    fail("missing or non-array field '" + key + "'");
  std::vector<std::size_t> out;
  for (const json& v : obj.at(key)) {
    if (!v.is_number_integer() || v.get<long>() < 1)
      fail("field '" + key + "' must contain positive integers");
    out.push_back(v.get<std::size_t>());
  }
  if (out.empty()) fail("field '" + key + "' must be nonempty");
  return out;
}

// ---- map / density / tail sub-specs ------------------------------------

ParameterSequence parse_map(json& spec) {
  if (!spec.is_object()) fail("'map' must be an object");
  std::string kind = get_str(spec, "kind");
  if (kind == "constant") {
    check_keys(spec, {"kind", "gamma", "length"}, "map");
    double g = get_num(spec, "gamma", 1e-6, 1.0 - 1e-9);
    long len = get_int(spec, "length", 1, 1L << 26);
    return ParameterSequence::constant(g, static_cast<std::size_t>(len), g);
  }
  if (kind == "list") {
    check_keys(spec, {"kind", "gammas"}, "map");
    std::vector<double> gs = get_num_array(spec, "gammas", 1e-6, 1.0 - 1e-9);
    double gstar = *std::max_element(gs.begin(), gs.end());
    return ParameterSequence::from_list(std::move(gs), gstar);
  }
  if (kind == "quasistatic") {
    check_keys(spec, {"kind", "gamma_lo", "gamma_hi", "level"}, "map");
    double lo = get_num(spec, "gamma_lo", 1e-6, 1.0 - 1e-9);
    double hi = get_num(spec, "gamma_hi", 1e-6, 1.0 - 1e-9);
    long n = get_int(spec, "level", 1, 1L << 26);
    double gstar = std::max(lo, hi);
    return quasistatic_sequence([lo, hi](double t) { return lo + (hi - lo) * t; }, gstar,
                                static_cast<std::size_t>(n));
  }
  fail("map kind '" + kind + "' not recognized (constant, list, quasistatic)");
}

GridDensity parse_density(json& spec, const std::vector<double>& edges, double gamma_star) {
  if (spec.is_string()) {
    std::string k = spec.get<std::string>();
    if (k == "uniform") return GridDensity::uniform(edges);
    fail("initial density '" + k + "' not recognized");
  }
  if (!spec.is_object()) fail("initial density must be a string or object");
  std::string kind = get_str(spec, "kind");
  if (kind == "uniform") {
    check_keys(spec, {"kind"}, "initial density");
    return GridDensity::uniform(edges);
  }
  if (kind == "power") {
    check_keys(spec, {"kind", "exponent"}, "initial density");
    double e = get_num(spec, "exponent", 0.0, std::max(0.0, gamma_star - 1e-9));
    return GridDensity::from_function(
        edges, [e](double x) { return std::pow(std::max(x, 1e-300), -e); }, true);
  }
  if (kind == "affine") {
    check_keys(spec, {"kind", "slope"}, "initial density");
    double s = get_num(spec, "slope", 0.0, 1.0);
    return GridDensity::from_function(
        edges, [s](double x) { return 1.0 + s * (0.5 - x); }, true);
  }
  fail("initial density kind '" + kind + "' not recognized (uniform, power, affine)");
}

ObservableSpec parse_observable(json& spec) {
  ObservableSpec out;
  if (spec.is_string()) {
    out.v = observable_by_name(spec.get<std::string>());
    return out;
  }
  if (!spec.is_object()) fail("'observable' must be a string or object");
  check_keys(spec, {"name", "kind", "weights"}, "observable");
  out.v = observable_by_name(get_str(spec, "name"));
  std::string kind = spec.value("kind", std::string("running_max"));
  spec["kind"] = kind;
  if (kind == "running_max")
    out.kind = ObservableKind::RunningMax;
  else if (kind == "birkhoff")
    out.kind = ObservableKind::Birkhoff;
  else if (kind == "weighted")
    out.kind = ObservableKind::WeightedBirkhoff;
  else
    fail("observable kind '" + kind + "' not recognized");
  if (out.kind == ObservableKind::WeightedBirkhoff)
    out.weights = get_num_array(spec, "weights", -1e12, 1e12);
  else if (spec.contains("weights"))
    fail("'weights' only applies to the weighted observable kind");
  return out;
}

TailFunction parse_tail(json& spec, const std::string& where) {
  if (!spec.is_object()) fail("'" + where + "' must be an object");
  std::string kind = get_str(spec, "kind");
  if (kind == "power") {
    check_keys(spec, {"kind", "beta", "length"}, where);
    double beta = get_num(spec, "beta", 1e-6, 64.0);
    long len = get_int(spec, "length", 1, 1L << 24, 1L << 16);
    return TailFunction::power(beta, static_cast<std::size_t>(len));
  }
  if (kind == "stretched") {
    check_keys(spec, {"kind", "c", "beta", "length", "scale"}, where);
    double c = get_num(spec, "c", 1e-12, 64.0);
    double beta = get_num(spec, "beta", 1e-6, 1.0);
    double scale = get_num(spec, "scale", 1e-12, 1e6, 1.0);
    long len = get_int(spec, "length", 1, 1L << 24, 1L << 16);
    return TailFunction::stretched_exp(c, beta, static_cast<std::size_t>(len), scale);
  }
  if (kind == "zero") {
    check_keys(spec, {"kind"}, where);
    return TailFunction::zero();
  }
  fail("tail kind '" + kind + "' in '" + where + "' not recognized (power, stretched, zero)");
}

// ---- output helpers -----------------------------------------------------

std::ofstream open_csv(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
  return out;
}

struct Assertion {
  std::string name;
  double value;
  bool pass;
};

struct Summary {
  json doc = json::object();
  std::vector<Assertion> assertions;

  void check(const std::string& name, double value, bool pass) {
    assertions.push_back({name, value, pass});
  }
  void check_slope(const json& cfg, const LogLogFit& fit, const std::string& prefix = "") {
    if (cfg.contains("assert_slope_min"))
      check(prefix + "slope >= min", fit.slope,
            fit.defined && fit.slope >= cfg.at("assert_slope_min").get<double>());
    if (cfg.contains("assert_slope_max"))
      check(prefix + "slope <= max", fit.slope,
            fit.defined && fit.slope <= cfg.at("assert_slope_max").get<double>());
  }
  bool pass() const {
    return std::all_of(assertions.begin(), assertions.end(),
                       [](const Assertion& a) { return a.pass; });
  }
  int finish(const RunConfig& config) {
    doc["experiment"] = config.experiment();
    doc["seed"] = config.seed();
    json checks = json::array();
    for (const Assertion& a : assertions) {
      checks.push_back({{"name", a.name}, {"value", a.value}, {"pass", a.pass}});
      std::cout << (a.pass ? "[pass] " : "[FAIL] ") << a.name
                << "  (value = " << format_real(a.value) << ")\n";
    }
    doc["assertions"] = checks;
    doc["pass"] = pass();
    std::ofstream out(config.output() + ".summary.json", std::ios::binary);
    if (out) out << doc.dump(2) << "\n";
    return pass() ? 0 : 1;
  }
};

json fit_json(const LogLogFit& fit) {
  return {{"slope", fit.slope},
          {"intercept", fit.intercept},
          {"r2", fit.r2},
          {"points_used", fit.points_used},
          {"defined", fit.defined}};
}

void write_series_csv(const std::string& path, const std::string& header,
                      const std::vector<std::pair<double, double>>& series) {
  std::ofstream out = open_csv(path);
  out << header << "\n";
  for (const auto& [x, y] : series) out << format_real(x) << "," << format_real(y) << "\n";
}

std::vector<std::size_t> default_n_grid(std::size_t n_max) {
  std::vector<std::size_t> grid;
  for (std::size_t n = 1; n < n_max; n *= 2) grid.push_back(n);
  grid.push_back(n_max);
  return grid;
}

// ---- per-experiment runners ----------------------------------------------

int run_partition(RunConfig config) {
  json& cfg = config.doc();
  check_keys(cfg,
             {"experiment", "seed", "output", "map", "count", "fit_lo", "fit_hi",
              "assert_slope_min", "assert_slope_max"},
             "partition config");
  ParameterSequence seq = parse_map(cfg.at("map"));
  long count = get_int(cfg, "count", 2, static_cast<long>(seq.size()));
  double fit_lo = get_num(cfg, "fit_lo", 1.0, 1e18, std::max(2.0, count / 4.0));
  double fit_hi = get_num(cfg, "fit_hi", fit_lo, 1e18, static_cast<double>(count));

  PartitionPoints entry = entry_partition(seq, static_cast<std::size_t>(count));
  PartitionPoints ret = return_partition(seq, static_cast<std::size_t>(count));

  std::ofstream out = open_csv(config.output());
  out << "n,x_n,y_n\n";
  std::vector<double> ns, xs;
  for (long n = 1; n <= count; ++n) {
    out << n << "," << format_real(entry.point(n)) << "," << format_real(ret.point(n)) << "\n";
    if (n >= static_cast<long>(fit_lo) && n <= static_cast<long>(fit_hi)) {
      ns.push_back(static_cast<double>(n));
      xs.push_back(entry.point(n));
    }
  }
  LogLogFit fit = slope_fit_or_undefined(ns, xs);
  std::cout << "entry partition x_n ~ n^" << format_real(fit.slope)
            << "  (r^2 = " << format_real(fit.r2) << ", window [" << fit_lo << ", " << fit_hi
            << "])\n";

  Summary summary;
  summary.doc["fit"] = fit_json(fit);
  bool ordered = true;
  for (long n = 2; n <= count; ++n)
    ordered = ordered && entry.point(n) < entry.point(n - 1) && ret.point(n) < ret.point(n - 1);
  summary.check("partitions strictly decreasing", ordered ? 1.0 : 0.0, ordered);
  summary.check_slope(cfg, fit);
  return summary.finish(config);
}

int run_density(RunConfig config) {
  json& cfg = config.doc();
  check_keys(cfg,
             {"experiment", "seed", "output", "gamma", "grid_size", "tol", "max_iterations",
              "cone_a"},
             "density config");
  double gamma = get_num(cfg, "gamma", 1e-6, 1.0 - 1e-9);
  long grid = get_int(cfg, "grid_size", 16, 1L << 22, 32768);
  double tol = get_num(cfg, "tol", 1e-15, 1.0, 1e-8);
  long max_iter = get_int(cfg, "max_iterations", 1, 100000000L, 100000);
  double cone_a = get_num(cfg, "cone_a", 1e-12, 1e12, cone_parameter_default(gamma));

  GridDensity rho = invariant_density(gamma, tol, static_cast<std::size_t>(grid),
                                      static_cast<std::size_t>(max_iter));
  std::ofstream out = open_csv(config.output());
  out << "x_lo,x_hi,value\n";
  for (std::size_t i = 0; i < rho.cells(); ++i)
    out << format_real(rho.edges()[i]) << "," << format_real(rho.edges()[i + 1]) << ","
        << format_real(rho.values()[i]) << "\n";

  ConeReport cone = cone_check(rho, gamma, cone_a);
  Summary summary;
  summary.doc["mass"] = rho.mass();
  summary.check("invariant density mass = 1", rho.mass(), std::abs(rho.mass() - 1.0) < 1e-9);
  summary.check("invariant density in cone", cone.worst_bound, cone.pass(1e-9));
  return summary.finish(config);
}

int run_memory_loss(RunConfig config) {
  json& cfg = config.doc();
  check_keys(cfg,
             {"experiment", "seed", "output", "map", "grid_size", "initial_f", "initial_g",
              "n_grid", "fit_lo", "fit_hi", "assert_slope_min", "assert_slope_max"},
             "memory-loss config");
  ParameterSequence seq = parse_map(cfg.at("map"));
  long grid = get_int(cfg, "grid_size", 16, 1L << 22, 32768);
  if (!cfg.contains("n_grid")) cfg["n_grid"] = default_n_grid(seq.size());
  std::vector<std::size_t> n_grid = get_size_array(cfg, "n_grid");
  double fit_lo = get_num(cfg, "fit_lo", 1.0, 1e18, static_cast<double>(n_grid.front()));
  double fit_hi = get_num(cfg, "fit_hi", fit_lo, 1e18, static_cast<double>(n_grid.back()));
  std::vector<double> edges = GridDensity::make_edges(static_cast<std::size_t>(grid));
  if (!cfg.contains("initial_f")) cfg["initial_f"] = "uniform";
  if (!cfg.contains("initial_g")) cfg["initial_g"] = {{"kind", "affine"}, {"slope", 0.5}};
  GridDensity f = parse_density(cfg.at("initial_f"), edges, seq.gamma_star());
  GridDensity g = parse_density(cfg.at("initial_g"), edges, seq.gamma_star());

  ExperimentReport report = memory_loss_experiment(seq, std::move(f), std::move(g), n_grid,
                                                   fit_lo, fit_hi);
  write_series_csv(config.output(), "n,tv", report.series);
  std::cout << "|T_n f - T_n g|_TV ~ n^" << format_real(report.fit.slope)
            << "  (r^2 = " << format_real(report.fit.r2) << ", window [" << fit_lo << ", "
            << fit_hi << "])\n";

  Summary summary;
  summary.doc["fit"] = fit_json(report.fit);
  bool monotone = true;
  for (std::size_t i = 1; i < report.series.size(); ++i)
    monotone = monotone && report.series[i].second <= report.series[i - 1].second + 1e-12;
  summary.check("TV distance nonincreasing", monotone ? 1.0 : 0.0, monotone);
  summary.check_slope(cfg, report.fit);
  return summary.finish(config);
}

int run_moments(RunConfig config) {
  json& cfg = config.doc();
  check_keys(cfg,
             {"experiment", "seed", "output", "map", "observable", "p_list", "n_grid",
              "samples", "fit_lo", "fit_hi", "assert_slope_min", "assert_slope_max"},
             "moments config");
  ParameterSequence seq = parse_map(cfg.at("map"));
  if (!cfg.contains("observable")) cfg["observable"] = "cos2pi";
  ObservableSpec obs = parse_observable(cfg.at("observable"));
  std::vector<double> p_list = get_num_array(cfg, "p_list", 1e-6, 64.0);
  if (!cfg.contains("n_grid")) cfg["n_grid"] = default_n_grid(seq.size());
  std::vector<std::size_t> n_grid = get_size_array(cfg, "n_grid");
  long samples = get_int(cfg, "samples", 1, 1L << 32, 100000);
  double fit_lo = get_num(cfg, "fit_lo", 1.0, 1e18, static_cast<double>(n_grid.front()));
  double fit_hi = get_num(cfg, "fit_hi", fit_lo, 1e18, static_cast<double>(n_grid.back()));

  std::vector<double> edges = GridDensity::make_edges();
  GridDensity mu = GridDensity::uniform(edges);
  MomentsReport report = moments_experiment(seq, mu, obs, p_list, n_grid,
                                            static_cast<std::size_t>(samples), config.seed(),
                                            fit_lo, fit_hi);

  std::ofstream out = open_csv(config.output());
  out << "p,n,value\n";
  for (const MomentSeries& m : report.moments)
    for (const auto& [n, v] : m.series)
      out << format_real(m.p) << "," << format_real(n) << "," << format_real(v) << "\n";

  Summary summary;
  json fits = json::array();
  std::vector<double> slope_min, slope_max;
  if (cfg.contains("assert_slope_min")) {
    slope_min = get_num_array(cfg, "assert_slope_min", -1e12, 1e12);
    if (slope_min.size() != p_list.size()) fail("'assert_slope_min' must match 'p_list'");
  }
  if (cfg.contains("assert_slope_max")) {
    slope_max = get_num_array(cfg, "assert_slope_max", -1e12, 1e12);
    if (slope_max.size() != p_list.size()) fail("'assert_slope_max' must match 'p_list'");
  }
  for (std::size_t i = 0; i < report.moments.size(); ++i) {
    const MomentSeries& m = report.moments[i];
    std::cout << "E (S_n*)^" << format_real(m.p) << " ~ n^" << format_real(m.fit.slope)
              << "  (r^2 = " << format_real(m.fit.r2) << ")\n";
    json f = fit_json(m.fit);
    f["p"] = m.p;
    fits.push_back(f);
    std::string tag = "p = " + format_real(m.p) + ": ";
    if (!slope_min.empty())
      summary.check(tag + "slope >= min", m.fit.slope,
                    m.fit.defined && m.fit.slope >= slope_min[i]);
    if (!slope_max.empty())
      summary.check(tag + "slope <= max", m.fit.slope,
                    m.fit.defined && m.fit.slope <= slope_max[i]);
  }
  summary.doc["fits"] = fits;
  return summary.finish(config);
}

int run_tails(RunConfig config) {
  json& cfg = config.doc();
  check_keys(cfg,
             {"experiment", "seed", "output", "map", "observable", "n", "t_grid", "samples",
              "assert_slope_min", "assert_slope_max"},
             "tails config");
  ParameterSequence seq = parse_map(cfg.at("map"));
  if (!cfg.contains("observable")) cfg["observable"] = "cos2pi";
  ObservableSpec obs = parse_observable(cfg.at("observable"));
  long n = get_int(cfg, "n", 1, static_cast<long>(seq.size()));
  std::vector<double> t_grid = get_num_array(cfg, "t_grid", 1e-300, 1e300);
  long samples = get_int(cfg, "samples", 1, 1L << 32, 100000);

  std::vector<double> edges = GridDensity::make_edges();
  GridDensity mu = GridDensity::uniform(edges);
  ExperimentReport report = tail_experiment(seq, mu, obs, static_cast<std::size_t>(n), t_grid,
                                            static_cast<std::size_t>(samples), config.seed());
  write_series_csv(config.output(), "t,tail", report.series);
  std::cout << "P(S_n* >= t) ~ t^" << format_real(report.fit.slope)
            << "  (r^2 = " << format_real(report.fit.r2) << ")\n";

  Summary summary;
  summary.doc["fit"] = fit_json(report.fit);
  summary.check_slope(cfg, report.fit);
  return summary.finish(config);
}

int run_deviations(RunConfig config) {
  json& cfg = config.doc();
  check_keys(cfg,
             {"experiment", "seed", "output", "map", "observable", "n_grid", "samples",
              "epsilon", "tau_exponent", "fit_lo", "fit_hi", "assert_slope_min",
              "assert_slope_max"},
             "deviations config");
  ParameterSequence seq = parse_map(cfg.at("map"));
  if (!cfg.contains("observable")) cfg["observable"] = "cos2pi";
  ObservableSpec obs = parse_observable(cfg.at("observable"));
  obs.kind = ObservableKind::Birkhoff;
  if (!cfg.contains("n_grid")) cfg["n_grid"] = default_n_grid(seq.size());
  std::vector<std::size_t> n_grid = get_size_array(cfg, "n_grid");
  long samples = get_int(cfg, "samples", 1, 1L << 32, 100000);
  double epsilon = get_num(cfg, "epsilon", 1e-12, 1e12);
  double tau = get_num(cfg, "tau_exponent", 0.0, 4.0, 1.0);
  double fit_lo = get_num(cfg, "fit_lo", 1.0, 1e18, static_cast<double>(n_grid.front()));
  double fit_hi = get_num(cfg, "fit_hi", fit_lo, 1e18, static_cast<double>(n_grid.back()));

  std::vector<double> edges = GridDensity::make_edges();
  GridDensity mu = GridDensity::uniform(edges);
  ExperimentReport report =
      deviation_check(seq, mu, obs, n_grid, static_cast<std::size_t>(samples), config.seed(),
                      epsilon, tau, fit_lo, fit_hi);
  write_series_csv(config.output(), "n,prob", report.series);
  std::cout << "P(|S_n| >= eps n^" << format_real(tau) << ") ~ n^" << format_real(report.fit.slope)
            << "  (r^2 = " << format_real(report.fit.r2) << ")\n";

  Summary summary;
  summary.doc["fit"] = fit_json(report.fit);
  summary.check_slope(cfg, report.fit);
  return summary.finish(config);
}

int run_counterexample(RunConfig config) {
  json& cfg = config.doc();
  check_keys(cfg, {"experiment", "seed", "output", "n", "paths", "initial"},
             "counterexample config");
  long n = get_int(cfg, "n", 1, 1L << 24, 1024);
  long paths = get_int(cfg, "paths", 1, 1L << 20, 256);
  if (!cfg.contains("initial")) cfg["initial"] = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  std::vector<double> initial = get_num_array(cfg, "initial", 0.0, 1.0);
  if (initial.size() != 3) fail("'initial' must list 3 state probabilities");

  std::vector<MarkovPath> out_paths = markov_counterexample(
      static_cast<std::size_t>(n), initial, static_cast<std::size_t>(paths), config.seed());

  std::ofstream out = open_csv(config.output());
  out << "path,start,s_n\n";
  bool exact = true;
  for (std::size_t i = 0; i < out_paths.size(); ++i) {
    const MarkovPath& p = out_paths[i];
    out << i << "," << p.start << "," << p.s.back() << "\n";
    for (std::size_t j = 0; j < p.s.size(); ++j)
      exact = exact && std::labs(p.s[j]) == static_cast<long>(j + 1);
  }
  Summary summary;
  summary.check("|S_n| = n along every path", exact ? 1.0 : 0.0, exact);
  return summary.finish(config);
}

int run_renewal_tails(RunConfig config) {
  json& cfg = config.doc();
  check_keys(cfg,
             {"experiment", "seed", "output", "mode", "theta", "n0", "beta", "beta_prime",
              "r_hat", "h", "c_h", "value_cap", "n_lo", "n_hi", "mc_samples"},
             "renewal-tails config");
  std::string mode = get_str(cfg, "mode");
  double theta = get_num(cfg, "theta", 1e-9, 1.0);
  long n0 = get_int(cfg, "n0", 1, 1L << 20);
  double beta = get_num(cfg, "beta", 1e-6, 64.0);
  double c_h = get_num(cfg, "c_h", 1e-12, 1e12, 1.0);
  long value_cap = get_int(cfg, "value_cap", 0, 1L << 24, 0);
  long n_hi = get_int(cfg, "n_hi", 2, 1L << 20, 2000);
  long n_lo = get_int(cfg, "n_lo", 1, n_hi, std::max(2L * n0, n_hi / 20));
  long mc_samples = get_int(cfg, "mc_samples", 0, 1L << 32, 0);
  if (!cfg.contains("r_hat")) fail("missing required field 'r_hat'");
  if (!cfg.contains("h")) fail("missing required field 'h'");
  TailFunction r_hat = parse_tail(cfg.at("r_hat"), "r_hat");
  TailFunction h = parse_tail(cfg.at("h"), "h");
  RenewalSpec spec(theta, static_cast<int>(n0), r_hat, h, c_h, static_cast<int>(value_cap));

  DpTails dp = exact_tail_dp(spec, static_cast<int>(n_hi));

  std::vector<double> mc_tail(static_cast<std::size_t>(n_hi),
                              std::numeric_limits<double>::quiet_NaN());
  if (mc_samples > 0) {
    BlockTailFamily family(spec.h, spec.c_h, 1 << 16);
    std::vector<long> counts(static_cast<std::size_t>(n_hi), 0);
    rng::Stream stream(config.seed(), 0);
    for (long i = 0; i < mc_samples; ++i) {
      long s = sample_S(spec, family, stream);
      if (s > n_hi) s = n_hi;
      counts[static_cast<std::size_t>(s - 1)] += 1;  // S >= 1 always (n0 >= 1)
    }
    double acc = 0.0;
    for (long i = n_hi - 1; i >= 0; --i) {
      acc += static_cast<double>(counts[static_cast<std::size_t>(i)]);
      mc_tail[static_cast<std::size_t>(i)] = acc / static_cast<double>(mc_samples);
    }
  }

  Summary summary;
  std::vector<double> bound(static_cast<std::size_t>(n_hi), 0.0);
  if (mode == "power") {
    double beta_prime = get_num(cfg, "beta_prime", 1e-6, 64.0);
    StabilityReport rep = verify_stail(spec, beta, beta_prime, static_cast<int>(n_lo),
                                       static_cast<int>(n_hi));
    double level = std::max(rep.early_max, rep.late_max);
    for (long n = 1; n <= n_hi; ++n)
      bound[static_cast<std::size_t>(n - 1)] = level * std::pow(static_cast<double>(n), -beta_prime);
    summary.doc["early_max"] = rep.early_max;
    summary.doc["late_max"] = rep.late_max;
    summary.check("n^beta' P(S >= n) stabilized", rep.late_max, rep.pass);
    std::cout << "sup n^" << format_real(beta_prime)
              << " P(S >= n): early " << format_real(rep.early_max) << ", late "
              << format_real(rep.late_max) << "\n";
  } else if (mode == "summable") {
    StailBReport rep = verify_stail_b(spec, beta, static_cast<int>(n_lo),
                                      static_cast<int>(n_hi));
    double tail_total = 0.0;
    for (long j = 0; j <= 1 << 16; ++j) tail_total += spec.r_hat.value(j);
    for (long n = 1; n <= n_hi; ++n)
      bound[static_cast<std::size_t>(n - 1)] =
          spec.r_hat.value(n / 2 - n0) +
          rep.fitted_c * std::pow(static_cast<double>(n), -beta) * tail_total;
    summary.doc["fitted_c"] = rep.fitted_c;
    summary.check("fitted constant stabilized", rep.late_max, rep.pass);
    std::cout << "fitted C = " << format_real(rep.fitted_c) << " (early "
              << format_real(rep.early_max) << ", late " << format_real(rep.late_max) << ")\n";
  } else if (mode == "stretched") {
    StretchedExpReport rep = verify_stail_exp(spec, beta, static_cast<int>(n_lo),
                                              static_cast<int>(n_hi));
    for (long n = 1; n <= n_hi; ++n)
      bound[static_cast<std::size_t>(n - 1)] =
          std::exp(rep.fit.intercept + rep.fit.slope * std::pow(static_cast<double>(n), beta));
    summary.doc["fit"] = fit_json(rep.fit);
    summary.check("log P(S >= n) linear in n^beta, negative slope", rep.fit.slope, rep.pass);
    std::cout << "log P(S >= n) ~ " << format_real(rep.fit.slope) << " n^" << format_real(beta)
              << "  (r^2 = " << format_real(rep.fit.r2) << ")\n";
  } else {
    fail("mode '" + mode + "' not recognized (power, summable, stretched)");
  }

  std::ofstream out = open_csv(config.output());
  out << "n,tail_exact,tail_mc,bound_value,ratio\n";
  for (long n = 1; n <= n_hi; ++n) {
    std::size_t i = static_cast<std::size_t>(n - 1);
    double ratio = bound[i] > 0.0 ? dp.tail[i] / bound[i]
                                  : std::numeric_limits<double>::quiet_NaN();
    out << n << "," << format_real(dp.tail[i]) << "," << format_real(mc_tail[i]) << ","
        << format_real(bound[i]) << "," << format_real(ratio) << "\n";
  }
  summary.doc["dp_residual"] = dp.residual;
  summary.doc["dp_overflow_mass"] = dp.overflow_mass;
  if (mc_samples > 0) {
    // crude agreement check: exact within 6 standard errors at n_lo
    std::size_t i = static_cast<std::size_t>(n_lo - 1);
    double p = dp.tail[i];
    double se = std::sqrt(std::max(p * (1 - p), 1e-300) / static_cast<double>(mc_samples));
    summary.check("Monte Carlo matches exact tail at n_lo", std::abs(mc_tail[i] - p),
                  std::abs(mc_tail[i] - p) <= 6.0 * se + dp.overflow_mass);
  }
  return summary.finish(config);
}

int run_qv_check(RunConfig config) {
  json& cfg = config.doc();
  check_keys(cfg, {"experiment", "seed", "output", "beta", "c_tau", "lengths", "draws"},
             "qv-check config");
  double beta = get_num(cfg, "beta", 1.0 + 1e-9, 64.0);
  double c_tau = get_num(cfg, "c_tau", 1e-12, 1e12, 1.0);
  if (!cfg.contains("lengths")) {
    json ls = json::array();
    for (std::size_t n = 64; n <= 65536; n *= 2) ls.push_back(n);
    cfg["lengths"] = ls;
  }
  std::vector<std::size_t> lengths = get_size_array(cfg, "lengths");
  long draws = get_int(cfg, "draws", 1, 1L << 24, 256);

  QvSeries series = qv_moment_check(beta, c_tau, lengths, static_cast<std::size_t>(draws),
                                    config.seed());
  std::ofstream out = open_csv(config.output());
  out << "N,sigma_ratio,omega_ratio\n";
  for (std::size_t i = 0; i < lengths.size(); ++i)
    out << lengths[i] << "," << format_real(series.sigma_ratio[i]) << ","
        << format_real(series.omega_ratio[i]) << "\n";

  Summary summary;
  summary.check("sigma ratio bounded in N",
                series.sigma_ratio.empty() ? 0.0 : series.sigma_ratio.back(),
                series.sigma_pass);
  summary.check("omega ratio bounded in N",
                series.omega_ratio.empty() ? 0.0 : series.omega_ratio.back(),
                series.omega_pass);
  return summary.finish(config);
}

}  // namespace

RunConfig RunConfig::parse(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  return from_json(std::move(doc));
}

RunConfig RunConfig::from_json(json doc) {
  if (!doc.is_object()) fail("config must be a JSON object");
  RunConfig config;
  config.experiment_ = get_str(doc, "experiment");
  static const std::set<std::string> known = {
      "partition",  "density",        "memory-loss",   "moments",  "tails",
      "deviations", "counterexample", "renewal-tails", "qv-check"};
  if (!known.count(config.experiment_))
    fail("experiment '" + config.experiment_ + "' not recognized");
  if (!doc.contains("seed")) doc["seed"] = 0;
  if (!doc.at("seed").is_number_integer() || doc.at("seed").get<std::int64_t>() < 0)
    fail("field 'seed' must be a nonnegative integer");
  if (!doc.contains("output") || !doc.at("output").is_string())
    fail("missing or non-string field 'output'");
  config.doc_ = std::move(doc);
  return config;
}

int run(const RunConfig& config) {
  const std::string& exp = config.experiment();
  if (exp == "partition") return run_partition(config);
  if (exp == "density") return run_density(config);
  if (exp == "memory-loss") return run_memory_loss(config);
  if (exp == "moments") return run_moments(config);
  if (exp == "tails") return run_tails(config);
  if (exp == "deviations") return run_deviations(config);
  if (exp == "counterexample") return run_counterexample(config);
  if (exp == "renewal-tails") return run_renewal_tails(config);
  if (exp == "qv-check") return run_qv_check(config);
  fail("experiment '" + exp + "' not recognized");
}

}  // namespace lsv
