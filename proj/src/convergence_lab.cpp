#include "wavelab/convergence_lab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace wavelab {

double convergence_rate(double e_coarse, double e_fine) {
  if (!(e_coarse > 0.0) || !(e_fine > 0.0)) {
    throw std::invalid_argument("convergence_rate: errors must be positive");
  }
  return std::log(e_fine / e_coarse) / std::log(0.5);
}

double ConvergenceReport::headline_rate() const {
  if (rows.size() < 2) throw std::logic_error("headline_rate: fewer than two levels");
  return convergence_rate(rows[rows.size() - 2].l2_error, rows.back().l2_error);
}

bool ConvergenceReport::passed() const {
  if (!predicted_rate) return true;
  return headline_rate() >= *predicted_rate - tolerance;
}

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_csv(std::ostream& os, const ConvergenceReport& report) {
  os << "N,h,l2_error,rate\n";
  for (const auto& r : report.rows) {
    os << r.n << ',' << fmt17(r.h) << ',' << fmt17(r.l2_error) << ',';
    if (r.rate) os << fmt17(*r.rate);
    os << '\n';
  }
}

std::vector<ConvergenceRow> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "N,h,l2_error,rate") {
    throw std::runtime_error("read_csv: missing header 'N,h,l2_error,rate'");
  }
  std::vector<ConvergenceRow> rows;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 4) throw std::runtime_error("read_csv: line " + std::to_string(lineno) + " needs 4 fields");
    try {
      ConvergenceRow r;
      std::size_t pos = 0;
      r.n = std::stoi(f[0], &pos);
      if (pos != f[0].size()) throw std::invalid_argument("N");
      r.h = std::stod(f[1]);
      r.l2_error = std::stod(f[2]);
      if (!f[3].empty()) r.rate = std::stod(f[3]);
      rows.push_back(r);
    } catch (const std::logic_error&) {
      throw std::runtime_error("read_csv: malformed number on line " + std::to_string(lineno));
    }
  }
  return rows;
}

std::string report_json(const ConvergenceReport& report) {
  nlohmann::ordered_json j;
  j["experiment"] = report.experiment;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& r : report.rows) {
    nlohmann::ordered_json row;
    row["N"] = r.n;
    row["h"] = r.h;
    row["l2_error"] = r.l2_error;
    row["rate"] = r.rate ? nlohmann::ordered_json(*r.rate) : nlohmann::ordered_json(nullptr);
    rows.push_back(row);
  }
  j["rows"] = rows;
  if (report.rows.size() >= 2) j["headline_rate"] = report.headline_rate();
  j["predicted_rate"] = report.predicted_rate ? nlohmann::ordered_json(*report.predicted_rate) : nullptr;
  j["tolerance"] = report.tolerance;
  j["passed"] = report.rows.size() >= 2 ? report.passed() : false;
  j["metadata"] = report.metadata;
  return j.dump(2);
}

namespace {

void check_levels(const std::vector<int>& levels) {
  if (levels.size() < 3) throw std::invalid_argument("refinement study needs at least three levels");
  for (std::size_t i = 1; i < levels.size(); ++i) {
    if (levels[i] <= levels[i - 1]) throw std::invalid_argument("refinement levels must increase");
  }
}

SimulationConfig at_level(const SimulationConfig& cfg, int n) {
  SimulationConfig c = cfg;
  c.n = n;
  c.validate();
  return c;
}

SemiDiscretization2D build_2d(const SimulationConfig& cfg) {
  const auto op = build_sbp_d2(cfg.order, Grid1D::unit(cfg.n));
  auto sx = assemble_1d(op, cfg.bc, cfg.penalty_factor);
  auto sy = sx;
  return assemble_2d(std::move(sx), std::move(sy));
}

void fill_metadata(ConvergenceReport& rep, const SimulationConfig& cfg) {
  rep.metadata["dim"] = std::to_string(cfg.dim);
  rep.metadata["order"] = std::to_string(cfg.order);
  rep.metadata["bc"] = std::string(to_string(cfg.bc));
  rep.metadata["tf"] = fmt17(cfg.tf);
  rep.metadata["cfl"] = fmt17(cfg.cfl);
  rep.metadata["penalty_factor"] = fmt17(cfg.penalty_factor);
  rep.metadata["solution"] = cfg.dim == 1 ? "standing_wave_1d" : cfg.solution;
}

void fill_rates(ConvergenceReport& rep) {
  for (std::size_t i = 1; i < rep.rows.size(); ++i) {
    rep.rows[i].rate = convergence_rate(rep.rows[i - 1].l2_error, rep.rows[i].l2_error);
  }
}

}  // namespace

double solve_level(const SimulationConfig& cfg, int n) {
  const SimulationConfig c = at_level(cfg, n);
  if (c.dim == 1) {
    const auto op = build_sbp_d2(c.order, Grid1D::unit(n));
    const auto sd = assemble_1d(op, c.bc, c.penalty_factor);
    return rk4_integrate_1d(sd, standing_wave_1d(), c.tf, c.cfl).l2_error;
  }
  const auto sd = build_2d(c);
  return rk4_integrate(sd, solution_by_name(c.solution), c).l2_error;
}

ConvergenceReport run_refinement_study(const SimulationConfig& cfg, const std::vector<int>& levels) {
  check_levels(levels);
  cfg.validate();
  ConvergenceReport rep;
  rep.experiment = "converge";
  fill_metadata(rep, cfg);
  for (int n : levels) rep.rows.push_back({n, 1.0 / (n - 1), solve_level(cfg, n), std::nullopt});
  fill_rates(rep);
  return rep;
}

double CornerPerturbation::nu(double h) const {
  const int p = order / 2;
  const double base = kind == BoundaryKind::dirichlet ? std::pow(h, p) : std::pow(h, p - 1);
  return amplitude_scale * c_p * base;
}

std::vector<int> CornerPerturbation::sites(int n) const {
  if (n < 2 * sites_per_end) throw std::invalid_argument("corner perturbation: grid too small for the site set");
  std::vector<int> out;
  for (int i = 0; i < sites_per_end; ++i) out.push_back(i);
  for (int i = n - sites_per_end; i < n; ++i) out.push_back(i);
  return out;
}

double corner_coefficient(int order) {
  const auto op = build_sbp_d2(order, Grid1D::unit(SbpD2Operator::min_size(order) + 20));
  const int p = order / 2;
  const auto& d = op.d();
  const double fact = std::tgamma(p + 3.0);
  double s = 0.0;
  for (int j = 0; j < d.border_cols(); ++j) s += d.entry(0, j) * std::pow(j, p + 2) / fact;
  return s;
}

CornerPerturbation default_corner_perturbation(int order, BoundaryKind kind) {
  CornerPerturbation cp;
  cp.kind = kind;
  cp.order = order;
  cp.c_p = corner_coefficient(order);
  return cp;
}

BoundaryDataFn perturbed_boundary_data(const ManufacturedSolution& ms, const CornerPerturbation& cp, int n, double h) {
  BoundaryDataFn exact = boundary_data_from(ms, cp.kind, n, h);
  const double nu = cp.nu(h);
  const auto sites = cp.sites(n);
  const BoundaryKind kind = cp.kind;
  return [exact, nu, sites, kind](double t, int k, BoundaryData2D& out) {
    exact(t, k, out);
    for (int i : sites) {
      double& g = out.x0[static_cast<std::size_t>(i)];
      if (kind == BoundaryKind::dirichlet) {
        g *= 1.0 + nu;
      } else if (k == 0) {
        g += nu;
      }
    }
  };
}

double solve_corner_level(const SimulationConfig& cfg, const CornerPerturbation& cp, int n) {
  const SimulationConfig c = at_level(cfg, n);
  if (c.dim != 2) throw std::invalid_argument("corner experiment requires dim = 2");
  if (cp.kind != c.bc || cp.order != c.order) {
    throw std::invalid_argument("corner perturbation does not match the configured scheme");
  }
  const auto sd = build_2d(c);
  const auto ms = solution_by_name(c.solution);
  return rk4_integrate(sd, ms, c, perturbed_boundary_data(ms, cp, n, sd.h())).l2_error;
}

ConvergenceReport run_corner_experiment(const SimulationConfig& cfg, const std::vector<int>& levels,
                                        const std::optional<CornerPerturbation>& perturbation) {
  check_levels(levels);
  cfg.validate();
  const CornerPerturbation cp = perturbation ? *perturbation : default_corner_perturbation(cfg.order, cfg.bc);
  ConvergenceReport rep;
  rep.experiment = "corner";
  fill_metadata(rep, cfg);
  rep.metadata["c_p"] = fmt17(cp.c_p);
  rep.metadata["amplitude_scale"] = fmt17(cp.amplitude_scale);
  rep.metadata["perturbed_sites"] = std::to_string(2 * cp.sites_per_end);
  for (int n : levels) rep.rows.push_back({n, 1.0 / (n - 1), solve_corner_level(cfg, cp, n), std::nullopt});
  fill_rates(rep);
  return rep;
}

double predicted_rate(int order, BoundaryKind kind, PenaltyRegime regime) {
  if (order != 2 && order != 4 && order != 6) {
    throw std::invalid_argument("predicted_rate: unsupported order " + std::to_string(order));
  }
  const int i = order / 2 - 1;
  static constexpr double at_threshold[] = {1.5, 2.5, 3.5};
  static constexpr double optimal[] = {2.0, 4.0, 5.5};
  if (kind == BoundaryKind::dirichlet && regime == PenaltyRegime::at_threshold) return at_threshold[i];
  return optimal[i];
}

int corner_w(int order, BoundaryKind kind, double penalty_factor) {
  const auto op = build_sbp_d2(order, Grid1D::unit(41));
  const auto sd = assemble_1d(op, kind, penalty_factor);
  const HalfLineModel model = half_line_model(sd);
  // corner data enters through the SAT injection vector
  Eigen::VectorXcd t = Eigen::VectorXcd::Zero(model.c);
  const auto b = sd.b_left();
  const double h2 = sd.h() * sd.h();
  for (int i = 0; i < std::min<int>(model.c, static_cast<int>(b.size())); ++i) t(i) = b[static_cast<std::size_t>(i)] * h2;
  auto c_of_s = [&](cplx s) {
    return build_boundary_system(model, s, analytic_admissible_roots(model.cp, s)).c;
  };
  return origin_analysis(c_of_s, t).w;
}

double predicted_corner_rate(int order, int w) {
  if (order != 2 && order != 4 && order != 6) {
    throw std::invalid_argument("predicted_corner_rate: unsupported order " + std::to_string(order));
  }
  return order / 2 + 1 - w;
}

GridFunction2D truncation_field(const SemiDiscretization2D& sd, const ManufacturedSolution& ms, const BoundaryDataFn& data,
                                double t) {
  const int nx = sd.nx();
  const int ny = sd.ny();
  const double h = sd.h();
  const GridFunction2D u = sample_solution(ms, nx, ny, h, t);
  GridFunction2D r(nx, ny);
  sd.apply_homogeneous(u.values, r.values);
  BoundaryData2D bd{std::vector<double>(static_cast<std::size_t>(ny)), std::vector<double>(static_cast<std::size_t>(ny)),
                    std::vector<double>(static_cast<std::size_t>(nx)), std::vector<double>(static_cast<std::size_t>(nx))};
  data(t, 0, bd);
  sd.add_data(bd, r.values);
  for (int j = 0; j < nx; ++j) {
    for (int i = 0; i < ny; ++i) {
      const double x = j * h;
      const double y = i * h;
      double& v = r.at(i, j);
      v -= ms.u_tt(x, y, t);
      if (!ms.zero_forcing) v += ms.forcing(x, y, t);
    }
  }
  return r;
}

namespace {

struct BandMax {
  double interior = 0.0;
  double closure = 0.0;
  double corner = 0.0;
};

BandMax band_max(const SimulationConfig& cfg, int n, const std::optional<CornerPerturbation>& cp) {
  const SimulationConfig c = at_level(cfg, n);
  const auto sd = build_2d(c);
  const auto ms = solution_by_name(c.solution);
  const BoundaryDataFn data = cp ? perturbed_boundary_data(ms, *cp, n, sd.h()) : boundary_data_from(ms, c.bc, n, sd.h());
  const GridFunction2D r = truncation_field(sd, ms, data, 0.0);
  const int rows = sd.x().matrix().border_rows();
  const int inj = static_cast<int>(sd.x().b_left().size());
  std::vector<char> is_site(static_cast<std::size_t>(n), 0);
  if (cp) {
    for (int i : cp->sites(n)) is_site[static_cast<std::size_t>(i)] = 1;
  }
  BandMax m;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double v = std::abs(r.at(i, j));
      const bool near = j < rows || j >= n - rows || i < rows || i >= n - rows;
      if (cp && j < inj && is_site[static_cast<std::size_t>(i)]) {
        m.corner = std::max(m.corner, v);
      } else if (near) {
        m.closure = std::max(m.closure, v);
      } else {
        m.interior = std::max(m.interior, v);
      }
    }
  }
  return m;
}

TruncationBand make_band(double coarse, double fine) {
  TruncationBand b;
  b.max_coarse = coarse;
  b.max_fine = fine;
  b.slope = coarse > 0.0 && fine > 0.0 ? convergence_rate(coarse, fine) : 0.0;
  return b;
}

}  // namespace

TruncationProbeReport truncation_probe(const SimulationConfig& cfg, int n_coarse,
                                       const std::optional<CornerPerturbation>& perturbation) {
  TruncationProbeReport rep;
  rep.n_coarse = n_coarse;
  rep.n_fine = 2 * n_coarse - 1;
  const BandMax a = band_max(cfg, rep.n_coarse, perturbation);
  const BandMax b = band_max(cfg, rep.n_fine, perturbation);
  rep.interior = make_band(a.interior, b.interior);
  rep.closure = make_band(a.closure, b.closure);
  if (perturbation) rep.corner = make_band(a.corner, b.corner);
  return rep;
}

}  // namespace wavelab
