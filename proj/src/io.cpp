#include "sparsecert/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace sparsecert {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_keys(const Json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

const Json& require(const Json& obj, const std::string& key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(where + ": missing key '" + key + "'");
  return *it;
}

double as_number(const Json& v, const std::string& where) {
  if (!v.is_number()) throw ConfigError(where + ": expected a number");
  return v.get<double>();
}

int as_int(const Json& v, const std::string& where) {
  if (!v.is_number_integer()) throw ConfigError(where + ": expected an integer");
  return v.get<int>();
}

template <typename T>
void read_opt(const Json& obj, const std::string& key, T& out, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  const std::string here = where + "." + key;
  if constexpr (std::is_same_v<T, bool>) {
    if (!it->is_boolean()) throw ConfigError(here + ": expected a boolean");
    out = it->get<bool>();
  } else if constexpr (std::is_same_v<T, int>) {
    out = as_int(*it, here);
  } else if constexpr (std::is_same_v<T, double>) {
    out = as_number(*it, here);
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!it->is_string()) throw ConfigError(here + ": expected a string");
    out = it->get<std::string>();
  } else if constexpr (std::is_same_v<T, std::uint64_t>) {
    if (!it->is_number_unsigned()) throw ConfigError(here + ": expected a nonnegative integer");
    out = it->get<std::uint64_t>();
  } else if constexpr (std::is_same_v<T, std::vector<double>>) {
    if (!it->is_array()) throw ConfigError(here + ": expected an array");
    out.clear();
    for (const Json& v : *it) out.push_back(as_number(v, here));
  } else if constexpr (std::is_same_v<T, std::vector<std::uint64_t>>) {
    if (!it->is_array()) throw ConfigError(here + ": expected an array");
    out.clear();
    for (const Json& v : *it) {
      if (!v.is_number_unsigned()) throw ConfigError(here + ": expected nonnegative integers");
      out.push_back(v.get<std::uint64_t>());
    }
  }
}

Json setting_json(const Setting& s) {
  Json j = {{"kind", to_string(s.kind)}};
  if (s.kind == SettingKind::BVIndicator) j["margin"] = s.margin;
  return j;
}

Setting setting_from_json(const Json& doc) {
  check_keys(doc, {"kind", "margin"}, "setting");
  const Json& kind = require(doc, "kind", "setting");
  if (!kind.is_string()) throw ConfigError("setting.kind: expected a string");
  try {
    switch (setting_kind_from_string(kind.get<std::string>())) {
      case SettingKind::RadonTV:
        if (doc.contains("margin")) throw ConfigError("setting: margin only applies to bv_indicator");
        return Setting::radon_tv();
      case SettingKind::BVIndicator:
        return Setting::bv_indicator(as_number(require(doc, "margin", "setting"), "setting.margin"));
      case SettingKind::PairedWasserstein:
        if (doc.contains("margin")) throw ConfigError("setting: margin only applies to bv_indicator");
        return Setting::paired_wasserstein();
    }
  } catch (const DomainError& e) {
    throw ConfigError(std::string("setting: ") + e.what());
  }
  return {};
}

Json solver_json(const SolveOptions& o) {
  return {{"max_iters", o.max_iters},       {"stop_tol", o.stop_tol},
          {"lmo_grid", o.lmo_grid},         {"newton_steps", o.newton_steps},
          {"sliding", o.sliding},           {"sliding_iters", o.sliding_iters},
          {"prune_tol", o.prune_tol},       {"merge_radius", o.merge_radius}};
}

SolveOptions solver_from_json(const Json& doc) {
  const std::string w = "solver";
  check_keys(doc, {"max_iters", "stop_tol", "lmo_grid", "newton_steps", "sliding", "sliding_iters",
                   "prune_tol", "merge_radius"},
             w);
  SolveOptions o;
  read_opt(doc, "max_iters", o.max_iters, w);
  read_opt(doc, "stop_tol", o.stop_tol, w);
  read_opt(doc, "lmo_grid", o.lmo_grid, w);
  read_opt(doc, "newton_steps", o.newton_steps, w);
  read_opt(doc, "sliding", o.sliding, w);
  read_opt(doc, "sliding_iters", o.sliding_iters, w);
  read_opt(doc, "prune_tol", o.prune_tol, w);
  read_opt(doc, "merge_radius", o.merge_radius, w);
  return o;
}

Json certify_json(const CertifyConfig& c) {
  return {{"epsilon", c.epsilon},   {"lambda_sequence", c.lambda_sequence},
          {"feas_tol", c.feas_tol}, {"max_cuts", c.max_cuts},
          {"cert_tol", c.cert_tol}, {"sat_tol", c.sat_tol},
          {"margin_tol", c.margin_tol}};
}

CertifyConfig certify_from_json(const Json& doc) {
  const std::string w = "certify";
  check_keys(doc, {"epsilon", "lambda_sequence", "feas_tol", "max_cuts", "cert_tol", "sat_tol", "margin_tol"},
             w);
  CertifyConfig c;
  read_opt(doc, "epsilon", c.epsilon, w);
  read_opt(doc, "lambda_sequence", c.lambda_sequence, w);
  read_opt(doc, "feas_tol", c.feas_tol, w);
  read_opt(doc, "max_cuts", c.max_cuts, w);
  read_opt(doc, "cert_tol", c.cert_tol, w);
  read_opt(doc, "sat_tol", c.sat_tol, w);
  read_opt(doc, "margin_tol", c.margin_tol, w);
  return c;
}

Json guaranteed_json(const GuaranteedRegion& g) {
  return {{"lambda_min", g.lambda_min},
          {"lambda_max", g.lambda_max},
          {"noise_fraction_max", g.noise_fraction_max},
          {"coef_tol", g.coef_tol},
          {"saturation_tol", g.saturation_tol}};
}

GuaranteedRegion guaranteed_from_json(const Json& doc) {
  const std::string w = "sweep.guaranteed";
  check_keys(doc, {"lambda_min", "lambda_max", "noise_fraction_max", "coef_tol", "saturation_tol"}, w);
  GuaranteedRegion g;
  read_opt(doc, "lambda_min", g.lambda_min, w);
  read_opt(doc, "lambda_max", g.lambda_max, w);
  read_opt(doc, "noise_fraction_max", g.noise_fraction_max, w);
  read_opt(doc, "coef_tol", g.coef_tol, w);
  read_opt(doc, "saturation_tol", g.saturation_tol, w);
  return g;
}

Json sweep_json(const SweepSection& s) {
  Json j = {{"alpha", nullptr},
            {"lambda0", s.lambda0},
            {"lambda_grid", s.lambda_grid},
            {"noise_fractions", s.noise_fractions},
            {"seeds", s.seeds},
            {"seed", s.seed},
            {"epsilon_match", s.epsilon_match},
            {"guaranteed", guaranteed_json(s.guaranteed)}};
  if (s.alpha) j["alpha"] = *s.alpha;
  return j;
}

SweepSection sweep_from_json(const Json& doc) {
  const std::string w = "sweep";
  check_keys(doc, {"alpha", "lambda0", "lambda_grid", "noise_fractions", "seeds", "seed",
                   "epsilon_match", "guaranteed"},
             w);
  SweepSection s;
  if (auto it = doc.find("alpha"); it != doc.end() && !it->is_null()) {
    s.alpha = as_number(*it, "sweep.alpha");
  }
  read_opt(doc, "lambda0", s.lambda0, w);
  require(doc, "lambda_grid", w);
  read_opt(doc, "lambda_grid", s.lambda_grid, w);
  require(doc, "noise_fractions", w);
  read_opt(doc, "noise_fractions", s.noise_fractions, w);
  require(doc, "seeds", w);
  read_opt(doc, "seeds", s.seeds, w);
  read_opt(doc, "seed", s.seed, w);
  read_opt(doc, "epsilon_match", s.epsilon_match, w);
  if (auto it = doc.find("guaranteed"); it != doc.end()) s.guaranteed = guaranteed_from_json(*it);
  return s;
}

void check_decreasing(const std::vector<double>& v, std::size_t min_size, const std::string& what) {
  if (v.size() < min_size) {
    throw ConfigError(what + " needs at least " + std::to_string(min_size) + " entries");
  }
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!(v[k] > 0.0)) throw ConfigError(what + " entries must be positive");
    if (k > 0 && !(v[k] < v[k - 1])) throw ConfigError(what + " must be strictly decreasing");
  }
}

}  // namespace

Json to_json(const ExtremePoint& e) {
  return std::visit(Overloaded{
                        [](const SignedDirac& d) -> Json {
                          return {{"x", d.x}, {"sign", static_cast<int>(d.sign)}};
                        },
                        [](const SignedIndicator& d) -> Json {
                          return {{"a", d.a}, {"b", d.b}, {"sign", static_cast<int>(d.sign)}};
                        },
                        [](const PairedDirac& d) -> Json { return {{"x", d.x}, {"x_bar", d.x_bar}}; },
                    },
                    e);
}

ExtremePoint extreme_point_from_json(const Json& doc, const Setting& setting) {
  const std::string w = "atom";
  auto sign = [&](const Json& d) {
    return sign_from_int(as_int(require(d, "sign", w), w + ".sign"));
  };
  try {
    switch (setting.kind) {
      case SettingKind::RadonTV:
        check_keys(doc, {"coef", "x", "sign"}, w);
        return normalized(SignedDirac{as_number(require(doc, "x", w), w + ".x"), sign(doc)}, setting);
      case SettingKind::BVIndicator:
        check_keys(doc, {"coef", "a", "b", "sign"}, w);
        return normalized(SignedIndicator{as_number(require(doc, "a", w), w + ".a"),
                                          as_number(require(doc, "b", w), w + ".b"), sign(doc)},
                          setting);
      case SettingKind::PairedWasserstein:
        check_keys(doc, {"coef", "x", "x_bar"}, w);
        return normalized(PairedDirac{as_number(require(doc, "x", w), w + ".x"),
                                      as_number(require(doc, "x_bar", w), w + ".x_bar")},
                          setting);
    }
  } catch (const DomainError& e) {
    throw ConfigError(w + ": " + e.what());
  }
  return SignedDirac{};
}

Json to_json(const SparseElement& u) {
  Json atoms = Json::array();
  for (const Atom& a : u.atoms()) {
    Json j = to_json(a.point);
    j["coef"] = a.coef;
    atoms.push_back(j);
  }
  return atoms;
}

Json to_json(const Kernel& k) {
  return std::visit(Overloaded{
                        [](const PeriodizedGaussian& g) -> Json {
                          return {{"name", "gaussian"}, {"width", g.width}, {"wrap_order", g.wrap_order}};
                        },
                        [](const RaisedCosine& r) -> Json {
                          return {{"name", "raised_cosine"}, {"cutoff", r.cutoff}};
                        },
                    },
                    k.spec());
}

Kernel kernel_from_json(const Json& doc) {
  const std::string w = "kernel";
  if (!doc.is_object()) throw ConfigError(w + ": expected an object");
  const Json& name = require(doc, "name", w);
  if (!name.is_string()) throw ConfigError(w + ".name: expected a string");
  try {
    if (name == "gaussian") {
      check_keys(doc, {"name", "width", "wrap_order"}, w);
      PeriodizedGaussian g;
      g.width = as_number(require(doc, "width", w), w + ".width");
      read_opt(doc, "wrap_order", g.wrap_order, w);
      return Kernel(g);
    }
    if (name == "raised_cosine") {
      check_keys(doc, {"name", "cutoff"}, w);
      return Kernel(RaisedCosine{as_int(require(doc, "cutoff", w), w + ".cutoff")});
    }
  } catch (const KernelError& e) {
    throw ConfigError(w + ": " + e.what());
  }
  throw ConfigError(w + ": unknown kernel '" + name.get<std::string>() + "'");
}

ForwardModel ExperimentConfig::model() const {
  return ForwardModel(setting, SampleGrid::for_setting(setting, grid_size), kernels);
}

void ExperimentConfig::validate() const {
  if (format_version != kFormatVersion) {
    throw ConfigError("unsupported format_version '" + format_version + "'");
  }
  if (static_cast<int>(kernels.size()) != setting.channels()) {
    throw ConfigError("setting " + to_string(setting.kind) + " needs " +
                      std::to_string(setting.channels()) + " kernel(s)");
  }
  if (grid_size < 16) throw ConfigError("grid_size must be >= 16");
  if (!(truth.setting() == setting)) throw ConfigError("truth does not match the setting");
  try {
    solver.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("solver: ") + e.what());
  }
  if (!(certify.epsilon > 0.0)) throw ConfigError("certify.epsilon must be positive");
  check_decreasing(certify.lambda_sequence, 3, "certify.lambda_sequence");
  if (!(certify.feas_tol > 0.0) || !(certify.cert_tol > 0.0) || !(certify.sat_tol > 0.0) ||
      !(certify.margin_tol >= 0.0)) {
    throw ConfigError("certify tolerances must be positive");
  }
  if (certify.max_cuts < 1) throw ConfigError("certify.max_cuts must be >= 1");
  if (sweep) {
    SweepConfig sc;
    sc.alpha = sweep->alpha.value_or(0.0);
    sc.lambda0 = sweep->lambda0;
    sc.lambda_grid = sweep->lambda_grid;
    sc.noise_fractions = sweep->noise_fractions;
    sc.seeds = sweep->seeds;
    sc.epsilon_match = sweep->epsilon_match;
    sc.solver = solver;
    try {
      sc.validate();
    } catch (const DomainError& e) {
      throw ConfigError(std::string("sweep: ") + e.what());
    }
  }
  if (oracle.resolution > 0 && oracle.resolution < 2) throw ConfigError("oracle.resolution must be >= 2");
}

ExperimentConfig parse_config(const Json& doc) {
  check_keys(doc, {"format_version", "setting", "kernels", "grid_size", "truth", "solver", "certify",
                   "sweep", "oracle", "output_dir"},
             "config");
  ExperimentConfig c;
  const Json& version = require(doc, "format_version", "config");
  if (!version.is_string()) throw ConfigError("format_version: expected a string");
  c.format_version = version.get<std::string>();
  c.setting = setting_from_json(require(doc, "setting", "config"));
  const Json& kernels = require(doc, "kernels", "config");
  if (!kernels.is_array()) throw ConfigError("kernels: expected an array");
  for (const Json& k : kernels) c.kernels.push_back(kernel_from_json(k));
  read_opt(doc, "grid_size", c.grid_size, "config");
  std::vector<Atom> atoms;
  if (auto it = doc.find("truth"); it != doc.end()) {
    if (!it->is_array()) throw ConfigError("truth: expected an array");
    for (const Json& a : *it) {
      const double coef = as_number(require(a, "coef", "atom"), "atom.coef");
      if (!(coef > 0.0)) throw ConfigError("atom.coef must be positive");
      atoms.push_back({coef, extreme_point_from_json(a, c.setting)});
    }
  }
  c.truth = SparseElement(c.setting, atoms);
  if (c.truth.size() != atoms.size()) throw ConfigError("truth coefficients must exceed the prune threshold");
  if (auto it = doc.find("solver"); it != doc.end()) c.solver = solver_from_json(*it);
  if (auto it = doc.find("certify"); it != doc.end()) c.certify = certify_from_json(*it);
  if (auto it = doc.find("sweep"); it != doc.end() && !it->is_null()) c.sweep = sweep_from_json(*it);
  if (auto it = doc.find("oracle"); it != doc.end()) {
    check_keys(*it, {"resolution"}, "oracle");
    read_opt(*it, "resolution", c.oracle.resolution, "oracle");
  }
  read_opt(doc, "output_dir", c.output_dir, "config");
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("cannot parse config file '" + path + "': " + e.what());
  }
  return parse_config(doc);
}

Json to_json(const ExperimentConfig& c) {
  Json kernels = Json::array();
  for (const Kernel& k : c.kernels) kernels.push_back(to_json(k));
  Json j = {{"format_version", c.format_version},
            {"setting", setting_json(c.setting)},
            {"kernels", kernels},
            {"grid_size", c.grid_size},
            {"truth", to_json(c.truth)},
            {"solver", solver_json(c.solver)},
            {"certify", certify_json(c.certify)},
            {"oracle", {{"resolution", c.oracle.resolution}}},
            {"output_dir", c.output_dir}};
  if (c.sweep) j["sweep"] = sweep_json(*c.sweep);
  return j;
}

Json solution_json(const SolveResult& r, double lambda) {
  return {{"setting", setting_json(r.element.setting())},
          {"lambda", lambda},
          {"atoms", to_json(r.element)},
          {"atom_count", r.element.size()},
          {"objective", r.objective},
          {"certificate_sup", r.certificate_sup},
          {"duality_gap", r.duality_gap},
          {"iterations", r.iterations},
          {"converged", r.converged}};
}

Json mndsc_json(const MndscReport& report, const CertificateEstimate* estimate) {
  Json atoms = Json::array();
  for (const AtomMargins& m : report.per_atom) {
    Json a = {{"atom", to_json(m.atom)}, {"value", m.value}, {"saturation_error", m.saturation_error}};
    switch (report.setting.kind) {
      case SettingKind::RadonTV:
        a["curvature_margin"] = m.curvature_margins.at(0);
        break;
      case SettingKind::BVIndicator:
        a["margin_a"] = m.curvature_margins.at(0);
        a["margin_b"] = m.curvature_margins.at(1);
        break;
      case SettingKind::PairedWasserstein:
        a["hessian_eigenvalues"] = m.hessian_eigenvalues;
        a["hessian_trace"] = m.hessian_trace;
        a["hessian_det"] = m.hessian_det;
        a["degenerate"] = m.degenerate;
        break;
    }
    atoms.push_back(a);
  }
  Json j = {{"setting", setting_json(report.setting)},
            {"verdict", report.pass ? "pass" : "fail"},
            {"failing_clauses", report.failing_clauses},
            {"epsilon", report.epsilon},
            {"value_margin", report.value_margin},
            {"value_margin_argmax", nullptr},
            {"sat_tol", report.sat_tol},
            {"margin_tol", report.margin_tol},
            {"source_condition", "assumed"},
            {"cauchy_gap", nullptr},
            {"atoms", atoms},
            {"notes", report.notes}};
  if (report.value_margin_argmax) j["value_margin_argmax"] = to_json(*report.value_margin_argmax);
  if (report.cauchy_gap) j["cauchy_gap"] = *report.cauchy_gap;
  if (estimate) {
    j["lambda_sequence"] = estimate->lambda_sequence;
    j["cauchy_gaps"] = estimate->cauchy_gaps;
    j["certificate_norms"] = estimate->norms;
    j["cert_tol"] = estimate->cert_tol;
    j["certificate_converged"] = estimate->converged;
  }
  return j;
}

Json sweep_summary_json(const SweepSummary& s, const SweepConfig& config, bool timing) {
  Json records = Json::array();
  for (const SweepRecord& r : s.records) {
    Json j = {{"lambda", r.lambda},
              {"noise_fraction", r.noise_fraction},
              {"noise_norm", r.noise_norm},
              {"seed", r.seed},
              {"admissible", r.admissible},
              {"guaranteed", r.guaranteed},
              {"count", r.count},
              {"matched", r.matched},
              {"max_param_err", r.max_param_err},
              {"max_coef_err", r.max_coef_err},
              {"max_saturation_err", r.max_saturation_err},
              {"cert_sup", r.cert_sup},
              {"gap", r.gap},
              {"converged", r.converged},
              {"recovered", r.recovered(config.guaranteed)}};
    if (timing) j["wall_ms"] = r.wall_ms;
    if (!r.error.empty()) j["error"] = r.error;
    records.push_back(j);
  }
  return {{"alpha", s.alpha},
          {"lambda0", s.lambda0},
          {"epsilon_match", config.epsilon_match},
          {"global_seed", config.global_seed},
          {"gram_min_eigenvalue", s.gram_min_eigenvalue},
          {"warnings", s.warnings},
          {"guaranteed", guaranteed_json(config.guaranteed)},
          {"guaranteed_cells", s.guaranteed_cells},
          {"guaranteed_all_recovered", s.guaranteed_all_recovered},
          {"any_errors", s.any_errors},
          {"records", records}};
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string certificate_csv(const CertificateFunction& eta, int n) {
  std::ostringstream out;
  const int channels = eta.channels();
  const char* names[2] = {channels == 2 ? "phi" : "eta", "psi"};
  out << "t";
  for (int c = 0; c < channels; ++c) out << ',' << names[c] << ",d_" << names[c] << ",dd_" << names[c];
  out << '\n';
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / n;
    out << format_double(t);
    for (int c = 0; c < channels; ++c) {
      const CertificateFunction::Values v = eta.eval_all(c, t);
      out << ',' << format_double(v.value) << ',' << format_double(v.d1) << ',' << format_double(v.d2);
    }
    out << '\n';
  }
  return out.str();
}

std::string sweep_csv(const std::vector<SweepRecord>& records, bool timing) {
  std::ostringstream out;
  out << kSweepCsvHeader << '\n';
  for (const SweepRecord& r : records) {
    out << format_double(r.lambda) << ',' << format_double(r.noise_norm) << ',' << r.seed << ','
        << r.count << ',' << (r.matched ? 1 : 0) << ',' << format_double(r.max_param_err) << ','
        << format_double(r.max_coef_err) << ',' << format_double(r.cert_sup) << ','
        << format_double(r.gap) << ',' << format_double(timing ? r.wall_ms : 0.0) << '\n';
  }
  return out.str();
}

namespace {

std::string svg_open(int w, int h) {
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\" viewBox=\"0 0 " << w << ' ' << h << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  return out.str();
}

std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace

std::string phase_svg(const SweepSummary& s, const SweepConfig& config) {
  const int nl = static_cast<int>(config.lambda_grid.size());
  const int nf = static_cast<int>(config.noise_fractions.size());
  const int cell = 48, left = 70, top = 40, bottom = 50;
  const int width = left + nl * cell + 20, height = top + nf * cell + bottom;
  std::ostringstream out;
  out << svg_open(width, height);
  out << "<text x=\"" << left << "\" y=\"20\">recovery by lambda and noise fraction (alpha "
      << short_number(s.alpha) << ")</text>\n";
  for (int i = 0; i < nl; ++i) {
    for (int k = 0; k < nf; ++k) {
      int total = 0, matched = 0;
      bool guaranteed = false;
      for (const SweepRecord& r : s.records) {
        if (r.lambda == config.lambda_grid[i] && r.noise_fraction == config.noise_fractions[k]) {
          ++total;
          matched += r.matched ? 1 : 0;
          guaranteed = r.guaranteed;
        }
      }
      const char* fill = matched == total ? "#4caf50" : matched == 0 ? "#e53935" : "#ffb300";
      const int x = left + i * cell, y = top + (nf - 1 - k) * cell;
      out << "<!-- data: lambda=" << format_double(config.lambda_grid[i])
          << " fraction=" << format_double(config.noise_fractions[k]) << " matched=" << matched << '/'
          << total << " guaranteed=" << (guaranteed ? 1 : 0) << " -->\n";
      out << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell << "\" height=\"" << cell
          << "\" fill=\"" << fill << "\" stroke=\"" << (guaranteed ? "black" : "white")
          << "\" stroke-width=\"" << (guaranteed ? 3 : 1) << "\"/>\n";
      out << "<text x=\"" << x + cell / 2 << "\" y=\"" << y + cell / 2 + 4
          << "\" text-anchor=\"middle\">" << matched << '/' << total << "</text>\n";
    }
  }
  for (int i = 0; i < nl; ++i) {
    out << "<text x=\"" << left + i * cell + cell / 2 << "\" y=\"" << top + nf * cell + 16
        << "\" text-anchor=\"middle\">" << short_number(config.lambda_grid[i]) << "</text>\n";
  }
  for (int k = 0; k < nf; ++k) {
    out << "<text x=\"" << left - 6 << "\" y=\"" << top + (nf - 1 - k) * cell + cell / 2 + 4
        << "\" text-anchor=\"end\">" << short_number(config.noise_fractions[k]) << "</text>\n";
  }
  out << "<text x=\"" << left + nl * cell / 2 << "\" y=\"" << height - 10
      << "\" text-anchor=\"middle\">lambda</text>\n";
  out << "<text x=\"14\" y=\"" << top + nf * cell / 2 << "\" transform=\"rotate(-90 14 "
      << top + nf * cell / 2 << ")\" text-anchor=\"middle\">noise / (alpha lambda)</text>\n";
  out << "</svg>\n";
  return out.str();
}

std::string errors_svg(const SweepSummary& s, const SweepConfig& config) {
  const int width = 520, height = 360, left = 70, right = 20, top = 30, bottom = 50;
  const double floor = 1e-16;
  std::vector<double> param, coef;
  for (double lambda : config.lambda_grid) {
    double p = floor, c = floor;
    for (const SweepRecord& r : s.records) {
      if (r.lambda != lambda || !r.error.empty()) continue;
      if (std::isfinite(r.max_param_err)) p = std::max(p, r.max_param_err);
      if (std::isfinite(r.max_coef_err)) c = std::max(c, r.max_coef_err);
    }
    param.push_back(p);
    coef.push_back(c);
  }
  double xlo = std::floor(std::log10(config.lambda_grid.back()));
  double xhi = std::ceil(std::log10(config.lambda_grid.front()));
  if (xhi <= xlo) xhi = xlo + 1;
  double ylo = 100.0, yhi = -100.0;
  for (double v : param) ylo = std::min(ylo, std::log10(v)), yhi = std::max(yhi, std::log10(v));
  for (double v : coef) ylo = std::min(ylo, std::log10(v)), yhi = std::max(yhi, std::log10(v));
  ylo = std::floor(ylo);
  yhi = std::ceil(yhi);
  if (yhi <= ylo) yhi = ylo + 1;
  auto X = [&](double lambda) {
    return left + (std::log10(lambda) - xlo) / (xhi - xlo) * (width - left - right);
  };
  auto Y = [&](double v) { return top + (yhi - std::log10(v)) / (yhi - ylo) * (height - top - bottom); };

  std::ostringstream out;
  out << svg_open(width, height);
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << width - left - right
      << "\" height=\"" << height - top - bottom << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int e = static_cast<int>(xlo); e <= static_cast<int>(xhi); ++e) {
    const double x = X(std::pow(10.0, e));
    out << "<text x=\"" << x << "\" y=\"" << height - bottom + 16 << "\" text-anchor=\"middle\">1e" << e
        << "</text>\n";
  }
  const int ystep = std::max(1, static_cast<int>((yhi - ylo) / 8));
  for (int e = static_cast<int>(ylo); e <= static_cast<int>(yhi); e += ystep) {
    const double y = Y(std::pow(10.0, e));
    out << "<text x=\"" << left - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">1e" << e << "</text>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << y << "\" x2=\"" << width - right << "\" y2=\"" << y
        << "\" stroke=\"#ddd\"/>\n";
  }
  auto series = [&](const std::vector<double>& v, const char* color, const char* name, int row) {
    out << "<!-- data: " << name;
    for (std::size_t i = 0; i < v.size(); ++i) {
      out << ' ' << format_double(config.lambda_grid[i]) << ':' << format_double(v[i]);
    }
    out << " -->\n<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < v.size(); ++i) out << X(config.lambda_grid[i]) << ',' << Y(v[i]) << ' ';
    out << "\"/>\n";
    for (std::size_t i = 0; i < v.size(); ++i) {
      out << "<circle cx=\"" << X(config.lambda_grid[i]) << "\" cy=\"" << Y(v[i]) << "\" r=\"3\" fill=\""
          << color << "\"/>\n";
    }
    out << "<text x=\"" << left + 10 << "\" y=\"" << top + 16 * row << "\" fill=\"" << color << "\">"
        << name << "</text>\n";
  };
  series(param, "#1e88e5", "max parameter error", 1);
  series(coef, "#d81b60", "max coefficient error", 2);
  out << "<text x=\"" << (left + width - right) / 2 << "\" y=\"" << height - 10
      << "\" text-anchor=\"middle\">lambda</text>\n";
  out << "</svg>\n";
  return out.str();
}

void write_text(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
}

std::string dump_json(const Json& doc) { return doc.dump(2) + "\n"; }

}  // namespace sparsecert
