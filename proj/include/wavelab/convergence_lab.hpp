#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wavelab/normal_mode.hpp"
#include "wavelab/wave_solver.hpp"

namespace wavelab {

/// q = log(e_fine / e_coarse) / log(1/2)
double convergence_rate(double e_coarse, double e_fine);

struct ConvergenceRow {
  int n = 0;
  double h = 0.0;
  double l2_error = 0.0;
  std::optional<double> rate;  // against the previous row
};

struct ConvergenceReport {
  std::string experiment;
  std::vector<ConvergenceRow> rows;     // decreasing h
  std::optional<double> predicted_rate;
  double tolerance = 0.3;
  std::map<std::string, std::string> metadata;

  /// Rate from the last two rows. Throws std::logic_error with fewer than two rows.
  double headline_rate() const;
  /// headline >= predicted - tolerance (true when nothing is predicted).
  bool passed() const;
};

void write_csv(std::ostream& os, const ConvergenceReport& report);
/// Parses the CSV written by write_csv. Throws std::runtime_error on malformed input.
std::vector<ConvergenceRow> read_csv(std::istream& is);
std::string report_json(const ConvergenceReport& report);

/// Errors on one level; dim 1 uses the 1D standing wave, dim 2 cfg.solution.
double solve_level(const SimulationConfig& cfg, int n);

/// One solve per level in the given order. Throws std::invalid_argument with
/// fewer than three levels or levels that do not refine.
ConvergenceReport run_refinement_study(const SimulationConfig& cfg, const std::vector<int>& levels);

/// Erroneous boundary data on x = 0 at the first and last few y points:
/// Dirichlet uses (1 + nu) g with nu = c_p h^p; Neumann uses g + nu with nu = c_p h^(p-1).
struct CornerPerturbation {
  BoundaryKind kind = BoundaryKind::dirichlet;
  int order = 2;
  double c_p = 1.0;
  double amplitude_scale = 1.0;
  int sites_per_end = 5;

  double nu(double h) const;
  std::vector<int> sites(int n) const;
};

/// c_p: leading truncation coefficient of the first closure row of D
/// (D applied to x^(p+2)/(p+2)! minus x^p/p! at x = 0, grid units).
double corner_coefficient(int order);
CornerPerturbation default_corner_perturbation(int order, BoundaryKind kind);

/// Wraps exact data with the perturbation.
BoundaryDataFn perturbed_boundary_data(const ManufacturedSolution& ms, const CornerPerturbation& cp, int n, double h);

double solve_corner_level(const SimulationConfig& cfg, const CornerPerturbation& cp, int n);
ConvergenceReport run_corner_experiment(const SimulationConfig& cfg, const std::vector<int>& levels,
                                        const std::optional<CornerPerturbation>& perturbation = std::nullopt);

enum class PenaltyRegime { at_threshold, above_threshold };

/// Table values of the overall rate q = min(2p, p + gain).
double predicted_rate(int order, BoundaryKind kind, PenaltyRegime regime = PenaltyRegime::above_threshold);
/// w of the 1D boundary system when the right-hand side is the corner data injection.
int corner_w(int order, BoundaryKind kind, double penalty_factor = 1.2);
/// Rate with a corner truncation error: p + 1 - w, i.e. the 2D exponent p + 3 - w
/// of the error estimate less the two orders lost to the O(h^(p-2)) corner truncation.
double predicted_corner_rate(int order, int w);

/// Semi-discrete residual A U + data - U_tt at t (forcing-free fields).
GridFunction2D truncation_field(const SemiDiscretization2D& sd, const ManufacturedSolution& ms, const BoundaryDataFn& data,
                                double t);

struct TruncationBand {
  double max_coarse = 0.0;
  double max_fine = 0.0;
  double slope = 0.0;
};

struct TruncationProbeReport {
  int n_coarse = 0;
  int n_fine = 0;
  TruncationBand interior;
  TruncationBand closure;
  std::optional<TruncationBand> corner;
};

/// Residual bands on grids n and 2n - 1 at t = 0.
TruncationProbeReport truncation_probe(const SimulationConfig& cfg, int n_coarse,
                                       const std::optional<CornerPerturbation>& perturbation = std::nullopt);

}  // namespace wavelab
