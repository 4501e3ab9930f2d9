#include "sparsecert/pipeline.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <filesystem>
#include <fstream>

namespace sparsecert {

std::optional<std::uint64_t> seed_from_environment() {
  const char* raw = std::getenv("SPARSE_CERTIFY_SEED");
  if (!raw || !*raw) return std::nullopt;
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(raw, &end, 10);
  if (errno != 0 || *end != '\0' || raw[0] == '-') {
    throw ConfigError(std::string("SPARSE_CERTIFY_SEED must be a nonnegative integer, got '") + raw + "'");
  }
  return static_cast<std::uint64_t>(v);
}

CertifyOutcome run_certify(const ExperimentConfig& config) {
  if (config.truth.empty()) throw ConfigError("certify needs a nonempty ground truth");
  const ForwardModel model = config.model();
  const Observation y0 = model.apply(config.truth);
  DualOptions dual;
  dual.feas_tol = config.certify.feas_tol;
  dual.max_cuts = config.certify.max_cuts;
  CertifyOutcome out;
  out.estimate = estimate_minimal_norm_certificate(model, y0, config.certify.lambda_sequence, dual,
                                                   config.certify.cert_tol);
  MndscOptions mo;
  mo.sat_tol = config.certify.sat_tol;
  mo.margin_tol = config.certify.margin_tol;
  out.report = check_mndsc(config.truth, model.certificate(out.estimate.p0), config.certify.epsilon, mo);
  out.report.cauchy_gap = out.estimate.cauchy_gaps.back();
  if (!out.estimate.converged) {
    out.report.notes.push_back("certificate estimate not converged: last Cauchy gap above cert_tol");
  }
  return out;
}

SweepConfig make_sweep_config(const ExperimentConfig& config, const ForwardModel& model,
                              const MndscReport* report, const RunOptions& options) {
  if (!config.sweep) throw ConfigError("config has no sweep section");
  const SweepSection& s = *config.sweep;
  SweepConfig sc;
  if (s.alpha) {
    sc.alpha = *s.alpha;
  } else {
    if (!report) throw ConfigError("sweep.alpha is unset and no certificate report is available");
    sc.alpha = default_alpha(report->value_margin, adjoint_norm_estimate(model));
  }
  sc.lambda0 = s.lambda0;
  sc.lambda_grid = s.lambda_grid;
  sc.noise_fractions = s.noise_fractions;
  sc.seeds = s.seeds;
  sc.global_seed = options.seed.value_or(s.seed);
  sc.epsilon_match = s.epsilon_match;
  sc.solver = config.solver;
  sc.guaranteed = s.guaranteed;
  sc.threads = options.threads;
  return sc;
}

OracleComparison run_oracle_compare(const ExperimentConfig& config, double lambda,
                                    const GridDictionary* dictionary) {
  if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
  const ForwardModel model = config.model();
  std::optional<GridDictionary> own;
  if (!dictionary) {
    own = make_grid_dictionary(model, config.oracle.resolution);
    dictionary = &*own;
  }
  const Observation y = model.apply(config.truth);
  const SolveResult cont = solve(model, y, lambda, config.solver);
  const GridSolution grid = solve_grid(y, lambda, *dictionary);

  OracleComparison c;
  c.lambda = lambda;
  c.continuous_objective = cont.objective;
  c.grid_objective = grid.objective;
  c.gap = grid.objective - cont.objective;
  c.gap_bound = snapped_grid_objective(model, *dictionary, cont.element, y, lambda) - cont.objective;
  c.grid_kkt_residual = grid.kkt_residual;
  c.dominance = cont.objective <= grid.objective + 1e-9;
  c.within_bound = c.gap <= c.gap_bound + 1e-9;

  Json support = Json::array();
  for (const Atom& a : cont.element.atoms()) {
    const int k = nearest_grid_atom(*dictionary, a.point);
    const ExtremePoint& g = dictionary->atoms[static_cast<std::size_t>(k)];
    const double gc = grid.coefficients(k);
    support.push_back({{"atom", to_json(a.point)},
                       {"coef", a.coef},
                       {"nearest_grid_atom", to_json(g)},
                       {"distance", atom_distance(a.point, g)},
                       {"grid_coef_at_nearest", gc}});
  }
  c.document = {{"setting", to_string(config.setting.kind)},
                {"lambda", lambda},
                {"grid_resolution", dictionary->resolution},
                {"grid_atoms", dictionary->atoms.size()},
                {"continuous_objective", c.continuous_objective},
                {"continuous_converged", cont.converged},
                {"grid_objective", c.grid_objective},
                {"gap", c.gap},
                {"gap_bound", c.gap_bound},
                {"grid_kkt_residual", c.grid_kkt_residual},
                {"dominance", c.dominance},
                {"within_bound", c.within_bound},
                {"continuous_atoms", cont.element.size()},
                {"grid_support", grid.element.size()},
                {"support", support},
                {"grid_solution", to_json(grid.element)}};
  return c;
}

namespace {

std::string describe(const Json& v) { return v.dump(); }

}  // namespace

ScenarioCheck evaluate_check(const Json& outcome, const Json& check) {
  ScenarioCheck out;
  out.path = check.at("path").get<std::string>();
  const Json::json_pointer ptr(out.path);
  if (!outcome.contains(ptr)) {
    out.detail = "missing in outcome";
    return out;
  }
  const Json& v = outcome.at(ptr);
  out.pass = true;
  std::string why;
  auto number_ok = [&](const Json& x, const char* key, bool upper) {
    if (!check.contains(key)) return true;
    if (!x.is_number()) {
      why += " not a number";
      return false;
    }
    const double bound = check.at(key).get<double>();
    const bool ok = upper ? x.get<double>() <= bound : x.get<double>() >= bound;
    if (!ok) why += std::string(" ") + (upper ? "above " : "below ") + describe(check.at(key));
    return ok;
  };
  if (check.contains("equals") && v != check.at("equals")) {
    out.pass = false;
    why += " expected " + describe(check.at("equals"));
  }
  out.pass = number_ok(v, "min", false) && out.pass;
  out.pass = number_ok(v, "max", true) && out.pass;
  if (check.contains("contains_any")) {
    bool any = false;
    if (v.is_array()) {
      for (const Json& x : v) {
        for (const Json& want : check.at("contains_any")) any = any || x == want;
      }
    }
    if (!any) why += " contains none of " + describe(check.at("contains_any"));
    out.pass = out.pass && any;
  }
  if (check.contains("all_min") || check.contains("all_max")) {
    bool ok = v.is_array();
    if (ok) {
      for (const Json& x : v) {
        if (check.contains("all_min")) ok = ok && x.is_number() && x.get<double>() >= check.at("all_min").get<double>();
        if (check.contains("all_max")) ok = ok && x.is_number() && x.get<double>() <= check.at("all_max").get<double>();
      }
    }
    if (!ok) why += " element out of range";
    out.pass = out.pass && ok;
  }
  out.detail = "value " + describe(v) + (out.pass ? "" : ":" + why);
  return out;
}

namespace {

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("cannot parse '" + path + "': " + e.what());
  }
}

// Per-cell summaries of the guaranteed region used by the scenario checks.
Json sweep_digest(const SweepSummary& s, const SweepConfig& sc) {
  Json counts = Json::array();
  double param = 0.0, coef = 0.0, sat = 0.0;
  int matched = 0;
  for (const SweepRecord& r : s.records) {
    if (!r.guaranteed) continue;
    counts.push_back(r.count);
    param = std::max(param, r.max_param_err);
    coef = std::max(coef, r.max_coef_err);
    sat = std::max(sat, r.max_saturation_err);
    matched += r.matched ? 1 : 0;
  }
  return {{"alpha", s.alpha},
          {"guaranteed_cells", s.guaranteed_cells},
          {"guaranteed_matched", matched},
          {"guaranteed_all_recovered", s.guaranteed_all_recovered},
          {"guaranteed_counts", counts},
          {"guaranteed_max_param_err", param},
          {"guaranteed_max_coef_err", coef},
          {"guaranteed_max_saturation_err", sat},
          {"any_errors", s.any_errors},
          {"cells", s.records.size()},
          {"epsilon_match", sc.epsilon_match}};
}

}  // namespace

ScenarioResult run_scenario(const std::string& dir, const RunOptions& options) {
  namespace fs = std::filesystem;
  ScenarioResult result;
  result.name = fs::path(dir).filename().string();
  if (result.name.empty()) result.name = fs::path(dir).parent_path().filename().string();
  const std::string out = (fs::path(options.out_dir) / result.name).string();
  try {
    const ExperimentConfig config = load_config((fs::path(dir) / "config").string());
    const Json expected = read_json((fs::path(dir) / "expected.json").string());
    const ForwardModel model = config.model();

    const CertifyOutcome cert = run_certify(config);
    const Json report = mndsc_json(cert.report, &cert.estimate);
    write_text(out + "/mndsc_report.json", dump_json(report));
    result.outcome["certify"] = report;

    if (config.sweep) {
      const SweepConfig sc = make_sweep_config(config, model, &cert.report, options);
      const SweepSummary summary = run_sweep(model, config.truth, sc);
      write_text(out + "/sweep.csv", sweep_csv(summary.records, options.timing));
      write_text(out + "/sweep.json", dump_json(sweep_summary_json(summary, sc, options.timing)));
      write_text(out + "/phase.svg", phase_svg(summary, sc));
      write_text(out + "/errors.svg", errors_svg(summary, sc));
      result.outcome["sweep"] = sweep_digest(summary, sc);
    }

    if (expected.contains("oracle_lambdas")) {
      const GridDictionary dict = make_grid_dictionary(model, config.oracle.resolution);
      Json docs = Json::array();
      for (const Json& l : expected.at("oracle_lambdas")) {
        docs.push_back(run_oracle_compare(config, l.get<double>(), &dict).document);
      }
      write_text(out + "/oracle.json", dump_json({{"comparisons", docs}}));
      result.outcome["oracle"] = docs;
    }

    result.pass = true;
    for (const Json& check : expected.at("checks")) {
      result.checks.push_back(evaluate_check(result.outcome, check));
      result.pass = result.pass && result.checks.back().pass;
    }
  } catch (const std::exception& e) {
    result.pass = false;
    result.error = e.what();
  }
  Json checks = Json::array();
  for (const ScenarioCheck& c : result.checks) {
    checks.push_back({{"path", c.path}, {"pass", c.pass}, {"detail", c.detail}});
  }
  Json doc = {{"scenario", result.name}, {"pass", result.pass}, {"checks", checks}};
  if (!result.error.empty()) doc["error"] = result.error;
  try {
    write_text(out + "/scenario_result.json", dump_json(doc));
  } catch (const std::exception& e) {
    if (result.error.empty()) result.error = e.what();
    result.pass = false;
  }
  return result;
}

}  // namespace sparsecert
