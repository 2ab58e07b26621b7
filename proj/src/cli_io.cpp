#include "wavelab/cli_io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "json.hpp"
#include "wavelab/convergence_lab.hpp"
#include "wavelab/kernels.hpp"
#include "wavelab/normal_mode.hpp"
#include "wavelab/spectral.hpp"

namespace wavelab {

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::file: return "file";
    case Provenance::flag: return "flag";
    default: return "default";
  }
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{"dim", "order", "bc", "n", "tf", "cfl", "penalty-factor",
                                             "solution", "levels", "seed"};
  return keys;
}

ResolvedConfig::ResolvedConfig() {
  for (const auto& k : config_keys()) provenance[k] = Provenance::default_value;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string canonical_key(std::string_view key) {
  std::string k(key);
  std::replace(k.begin(), k.end(), '_', '-');
  return k;
}

template <class T>
T parse_number(std::string_view key, std::string_view text) {
  T v{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw std::invalid_argument("config key '" + std::string(key) + "': '" + std::string(text) +
                                "' is not a valid number");
  }
  return v;
}

}  // namespace

std::vector<int> parse_levels(std::string_view text) {
  std::vector<int> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto item = trim(text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (item.empty()) throw std::invalid_argument("levels: empty entry in '" + std::string(text) + "'");
    out.push_back(parse_number<int>("levels", item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

void ResolvedConfig::set(std::string_view key_in, std::string_view value_in, Provenance source) {
  const std::string key = canonical_key(trim(key_in));
  const std::string value = trim(value_in);
  if (key == "dim") {
    sim.dim = parse_number<int>(key, value);
  } else if (key == "order") {
    sim.order = parse_number<int>(key, value);
  } else if (key == "bc") {
    sim.bc = parse_boundary_kind(value);
  } else if (key == "n") {
    sim.n = parse_number<int>(key, value);
  } else if (key == "tf") {
    sim.tf = parse_number<double>(key, value);
  } else if (key == "cfl") {
    sim.cfl = parse_number<double>(key, value);
    if (!(sim.cfl > 0.0)) throw std::invalid_argument("config key 'cfl' must be positive");
  } else if (key == "penalty-factor") {
    sim.penalty_factor = parse_number<double>(key, value);
  } else if (key == "solution") {
    solution_by_name(value);
    sim.solution = value;
  } else if (key == "levels") {
    levels = parse_levels(value);
  } else if (key == "seed") {
    sim.seed = parse_number<unsigned>(key, value);
  } else {
    throw std::invalid_argument("unknown config key '" + key + "'");
  }
  provenance[key] = source;
}

ResolvedConfig parse_config(std::string_view text, std::string_view source_name) {
  ResolvedConfig cfg;
  std::istringstream is{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const std::string where = std::string(source_name) + ":" + std::to_string(line_no) + ": ";
    if (eq == std::string::npos) throw std::invalid_argument(where + "expected 'key = value'");
    try {
      cfg.set(body.substr(0, eq), body.substr(eq + 1), Provenance::file);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(where + e.what());
    }
  }
  cfg.sim.validate();
  return cfg;
}

ResolvedConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

namespace {

class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : fallback_(fallback) {
    if (!path.empty() && path != "-") {
      file_.open(path);
      if (!file_) throw std::runtime_error("cannot write '" + path + "'");
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : fallback_; }

 private:
  std::ofstream file_;
  std::ostream& fallback_;
};

struct SimOptions {
  std::string config_path;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  std::string out;
  std::string format = "csv";
  double tolerance = 0.3;
};

void add_sim_options(CLI::App* sub, SimOptions& o, const std::vector<std::string>& keys) {
  sub->add_option("--config", o.config_path, "key = value configuration file")->check(CLI::ExistingFile);
  static const std::map<std::string, std::string> help{
      {"dim", "spatial dimension, 1 or 2 (default 2)"},
      {"order", "operator order 2, 4 or 6 (default 4)"},
      {"bc", "dirichlet or neumann (default dirichlet)"},
      {"n", "grid points per direction (default 41)"},
      {"tf", "final time (default 2)"},
      {"cfl", "time step over h (default 0.1)"},
      {"penalty-factor", "Dirichlet penalty as a multiple of the threshold (default 1.2)"},
      {"solution", "exact_local or high_frequency (default exact_local)"},
      {"levels", "comma separated grid sizes (default 41,81,161,321)"},
      {"seed", "reserved (default 0)"},
  };
  for (const auto& k : keys) o.options[k] = sub->add_option("--" + k, o.values[k], help.at(k));
  sub->add_option("--out", o.out, "output path, '-' for stdout (default stdout)");
}

ResolvedConfig resolve(const SimOptions& o) {
  ResolvedConfig cfg = o.config_path.empty() ? ResolvedConfig{} : load_config(o.config_path);
  for (const auto& [key, opt] : o.options) {
    if (opt->count() > 0) cfg.set(key, o.values.at(key), Provenance::flag);
  }
  cfg.sim.validate();
  return cfg;
}

void add_provenance(ConvergenceReport& rep, const ResolvedConfig& cfg) {
  for (const auto& [k, p] : cfg.provenance) rep.metadata["provenance." + k] = std::string(to_string(p));
}

std::string fmt17(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

int emit_convergence(ConvergenceReport& rep, const SimOptions& o, std::ostream& out, std::ostream& err) {
  rep.tolerance = o.tolerance;
  Sink sink(o.out, out);
  if (o.format == "json") {
    sink.stream() << report_json(rep) << '\n';
  } else {
    write_csv(sink.stream(), rep);
  }
  const bool ok = rep.passed();
  err << rep.experiment << ": headline rate " << fmt17(rep.headline_rate());
  if (rep.predicted_rate) err << " (predicted " << *rep.predicted_rate << ", tolerance " << rep.tolerance << ")";
  err << (ok ? " PASS" : " FAIL") << '\n';
  return ok ? 0 : 1;
}

int run_converge(const SimOptions& o, std::ostream& out, std::ostream& err) {
  const ResolvedConfig cfg = resolve(o);
  ConvergenceReport rep = run_refinement_study(cfg.sim, cfg.levels);
  add_provenance(rep, cfg);
  if (cfg.sim.dim == 2) {
    const double tol = 1e-9;
    const auto regime = std::abs(cfg.sim.penalty_factor - 1.0) < tol ? PenaltyRegime::at_threshold
                                                                      : PenaltyRegime::above_threshold;
    rep.predicted_rate = predicted_rate(cfg.sim.order, cfg.sim.bc, regime);
    const auto sd = assemble_1d(build_sbp_d2(cfg.sim.order, Grid1D::unit(41)), cfg.sim.bc, cfg.sim.penalty_factor);
    const auto an = singularity_analysis(half_line_model(sd));
    rep.metadata["analyzer.w"] = std::to_string(an.w);
    rep.metadata["analyzer.predicted_rate_q"] = std::to_string(an.predicted_rate_q());
  }
  return emit_convergence(rep, o, out, err);
}

int run_corner(const SimOptions& o, std::ostream& out, std::ostream& err) {
  const ResolvedConfig cfg = resolve(o);
  ConvergenceReport rep = run_corner_experiment(cfg.sim, cfg.levels);
  add_provenance(rep, cfg);
  const int w = corner_w(cfg.sim.order, cfg.sim.bc, cfg.sim.penalty_factor);
  rep.predicted_rate = predicted_corner_rate(cfg.sim.order, w);
  rep.metadata["analyzer.corner_w"] = std::to_string(w);
  return emit_convergence(rep, o, out, err);
}

int run_operator_check(int order, int n, double penalty_factor, const std::string& path, std::ostream& out,
                       std::ostream& err) {
  const auto op = build_sbp_d2(order, Grid1D::unit(n));
  const auto rep = verify_sbp_properties(op);
  nlohmann::ordered_json j;
  j["order"] = order;
  j["n"] = n;
  j["h_positive"] = rep.h_positive();
  j["m_asymmetry"] = rep.m_asymmetry;
  j["m_max"] = rep.m_max;
  j["m_eigmin"] = rep.m_eigmin;
  j["decomposition_residual"] = rep.decomposition_residual;
  auto ex = nlohmann::ordered_json::array();
  for (const auto& r : rep.exactness) {
    ex.push_back({{"degree", r.degree}, {"interior", r.interior_residual}, {"boundary", r.boundary_residual}});
  }
  j["exactness"] = ex;
  j["sbp_passed"] = rep.passed();
  bool ok = rep.passed();
  for (BoundaryKind kind : {BoundaryKind::neumann, BoundaryKind::dirichlet}) {
    const auto sd = assemble_1d(op, kind, penalty_factor);
    const auto a1 = check_energy_condition(sd);
    nlohmann::ordered_json aj;
    aj["asymmetry"] = a1.asymmetry;
    aj["eigmax"] = a1.eigmax;
    aj["passed"] = a1.passed();
    if (kind == BoundaryKind::dirichlet) {
      aj["iota0"] = sd.iota0();
      aj["iota"] = sd.iota();
    }
    j["energy_condition_" + std::string(to_string(kind))] = aj;
    ok = ok && a1.passed();
  }
  j["passed"] = ok;
  Sink sink(path, out);
  sink.stream() << j.dump(2) << '\n';
  err << "operator-check order " << order << " n " << n << (ok ? " PASS" : " FAIL") << '\n';
  return ok ? 0 : 1;
}

int run_analyze(int order, BoundaryKind kind, double penalty_factor, int n, const std::string& path,
                std::ostream& out, std::ostream& err) {
  const auto sd = assemble_1d(build_sbp_d2(order, Grid1D::unit(n)), kind, penalty_factor);
  const auto model = half_line_model(sd);
  const auto rep = singularity_analysis(model);
  Sink sink(path, out);
  sink.stream() << analyzer_report_json(model, rep) << '\n';
  err << "analyze order " << order << ' ' << to_string(kind) << ": w = " << rep.w << '\n';
  return rep.w_capped ? 1 : 0;
}

int run_spectrum(int order, BoundaryKind kind, double penalty_factor, int n, const std::string& path,
                 std::ostream& out, std::ostream& err) {
  const auto sd = assemble_1d(build_sbp_d2(order, Grid1D::unit(n)), kind, penalty_factor);
  const Spectrum sp = diagonalize(sd);
  Sink sink(path, out);
  write_spectrum_csv(sink.stream(), sp, kind);
  const bool ok = sp.residual <= 1e-8 * sp.operator_norm && sp.lambda.minCoeff() >= -1e-10 * sp.lambda.maxCoeff();
  err << "spectrum order " << order << ' ' << to_string(kind) << ": cond(Phi) = " << sp.cond()
      << (ok ? " PASS" : " FAIL") << '\n';
  return ok ? 0 : 1;
}

void apply_thread_cap() {
  const char* env = std::getenv("WAVELAB_THREADS");
  if (env == nullptr || *env == '\0') return;
  const std::string_view text(env);
  int n = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), n);
  if (ec != std::errc() || ptr != text.data() + text.size() || n < 1) {
    throw std::invalid_argument("WAVELAB_THREADS must be a positive integer, got '" + std::string(text) + "'");
  }
  kernels::set_threads(n);
}

}  // namespace

int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"SBP-SAT wave equation lab: refinement studies, corner experiments and normal-mode analysis",
               "wavelab"};
  app.require_subcommand(1, 1);

  SimOptions conv_opt;
  auto* conv = app.add_subcommand("converge", "grid refinement study with the manufactured solution");
  add_sim_options(conv, conv_opt, config_keys());
  conv->add_option("--format", conv_opt.format, "csv or json (default csv)")->check(CLI::IsMember({"csv", "json"}));
  conv->add_option("--tolerance", conv_opt.tolerance, "allowed shortfall of the headline rate (default 0.3)");

  SimOptions corner_opt;
  auto* corner = app.add_subcommand("corner", "refinement study with perturbed boundary data near the corners");
  add_sim_options(corner, corner_opt, config_keys());
  corner->add_option("--format", corner_opt.format, "csv or json (default csv)")
      ->check(CLI::IsMember({"csv", "json"}));
  corner->add_option("--tolerance", corner_opt.tolerance, "allowed shortfall of the headline rate (default 0.3)");

  int order = 4;
  int n = 61;
  double penalty_factor = 1.2;
  std::string bc_text = "dirichlet";
  std::string path;
  auto* check = app.add_subcommand("operator-check", "SBP property suite and SAT stability check");
  check->add_option("--order", order, "operator order 2, 4 or 6 (default 4)");
  check->add_option("--n", n, "grid points (default 61)");
  check->add_option("--penalty-factor", penalty_factor, "Dirichlet penalty factor (default 1.2)");
  check->add_option("--out", path, "output path (default stdout)");

  int model_n = 41;
  auto* analyze = app.add_subcommand("analyze", "normal-mode classification of the boundary closure");
  analyze->add_option("--order", order, "operator order 2, 4 or 6 (default 4)");
  analyze->add_option("--bc", bc_text, "dirichlet or neumann (default dirichlet)");
  analyze->add_option("--penalty-factor", penalty_factor, "Dirichlet penalty factor (default 1.2)");
  analyze->add_option("--n", model_n, "grid used to extract the closure (default 41)");
  analyze->add_option("--out", path, "output path (default stdout)");

  auto* spectrum = app.add_subcommand("spectrum", "eigenvalues of the 1D semi-discrete operator");
  spectrum->add_option("--order", order, "operator order 2, 4 or 6 (default 4)");
  spectrum->add_option("--bc", bc_text, "dirichlet or neumann (default dirichlet)");
  spectrum->add_option("--penalty-factor", penalty_factor, "Dirichlet penalty factor (default 1.2)");
  spectrum->add_option("--n", model_n, "grid points (default 41)");
  spectrum->add_option("--out", path, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    apply_thread_cap();
    if (*conv) return run_converge(conv_opt, out, err);
    if (*corner) return run_corner(corner_opt, out, err);
    if (*check) return run_operator_check(order, n, penalty_factor, path, out, err);
    const BoundaryKind kind = parse_boundary_kind(bc_text);
    if (*analyze) return run_analyze(order, kind, penalty_factor, model_n, path, out, err);
    return run_spectrum(order, kind, penalty_factor, model_n, path, out, err);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "failed: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace wavelab
