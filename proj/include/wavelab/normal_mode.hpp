#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wavelab/semidisc.hpp"
#include "wavelab/spectral.hpp"

namespace wavelab {

using cplx = std::complex<double>;

/// Interior stencil a_0..a_2l of a central second-derivative approximation (grid units).
struct CharacteristicProblem {
  std::vector<double> a;

  int l() const { return static_cast<int>(a.size() / 2); }
  /// Throws std::invalid_argument unless the stencil is odd-length, symmetric and sums to zero.
  void validate() const;
};

CharacteristicProblem characteristic_problem(int order);

struct RootSet {
  std::vector<cplx> all;          // 2l roots, ascending modulus
  std::vector<cplx> admissible;   // l roots, kappa_1 (largest modulus) first
  std::vector<double> amplification;  // 1/(1 - |kappa|^2) per admissible root
};

/// Roots of sum_j a_j kappa^j - s^2 kappa^l = 0 from the companion matrix,
/// polished by Newton steps. Admissible roots are the l of smallest modulus;
/// for Re(s) >= 1e-2 exactly l roots must lie strictly inside the unit circle
/// (std::runtime_error otherwise).
RootSet characteristic_roots(const CharacteristicProblem& cp, cplx s);

/// The admissible branch continued analytically through a neighbourhood of
/// s = 0: the l-1 smallest roots plus the root nearest 1 - s.
std::vector<cplx> analytic_admissible_roots(const CharacteristicProblem& cp, cplx s);

/// f(l, theta) = -sum_{n<l} 2 (n!)^2 / (2n+2)! (4 sin^2(theta/2))^{n+1}
double dispersion_f(int l, double theta);

/// Closure rows of Q (grid units) for the half-line problem together with the
/// leading truncation vector. Row i of `rows` covers columns 0..width-1.
struct HalfLineModel {
  std::string scheme = "sbp-sat";
  int order = 0;
  int p = 0;
  BoundaryKind kind = BoundaryKind::dirichlet;
  CharacteristicProblem cp;
  Eigen::MatrixXd rows;   // c x width
  int c = 0;              // closure rows
  int d = 0;              // boundary unknowns (c - l)
  Eigen::VectorXd t_c;    // length c
  int k = 0;              // index of the last nonzero entry of t_c
};

/// Extracts the left closure of sd. Closure rows are the rows that differ
/// from the shifted interior stencil. T_C is Q x^{p+2}/(p+2)! minus its
/// exact second derivative on those rows.
HalfLineModel half_line_model(const SemiDiscretization1D& sd);

struct BoundarySystem {
  Eigen::MatrixXcd c;          // (d+l) x (d+l)
  Eigen::VectorXcd t_c;
  int d = 0;
  int l = 0;
  int k = 0;
  cplx s;
  std::vector<cplx> kappa;     // admissible roots used in the ansatz
};

/// C(s) with unknowns (zeta_1..zeta_d, sigma_1..sigma_l). Uses
/// characteristic_roots unless explicit roots are supplied.
BoundarySystem build_boundary_system(const HalfLineModel& model, cplx s);
BoundarySystem build_boundary_system(const HalfLineModel& model, cplx s, const std::vector<cplx>& kappa);

struct BoundarySolution {
  Eigen::VectorXcd sigma_full;          // Sigma = h^{p+2} C^-1 T_C
  std::vector<double> zeta_abs;
  std::vector<double> sigma_abs;
  std::vector<double> amplification;    // 1/(1 - |kappa_j|^2)
  double l2_norm2 = 0.0;                // h sum|zeta|^2 + h sum |sigma|^2/(1-|kappa|^2)
  double max_norm = 0.0;                // ||Sigma||_max
  double cinv_max = 0.0;                // ||C^-1||_max
};

/// Throws std::domain_error when sigma_min(C) <= 1e-7 max(1, sigma_max(C)).
BoundarySolution solve_boundary_system(const BoundarySystem& bs, int p, double h);

struct SingularSite {
  double xi = 0.0;
  double ratio = 0.0;    // sigma_min / sigma_max of C(i xi + eps)
  int alpha = 0;
  double alpha_slope = 0.0;
};

struct BetaSite {
  double xi = 0.0;
  int beta = 0;
  double slope = 0.0;
};

struct SingularityOptions {
  double contour_radius = 0.25;
  int contour_points = 64;
  double singular_tol = 1e-10;     // sigma_min < tol * sigma_max counts as singular
  double derivative_tol = 1e-7;    // |(U* C^(m) V)_nn| relative threshold
  double column_space_tol = 1e-8;
  int w_cap = 6;
  int scan_points = 4096;
  double scan_eps = 1e-7;
  double site_tol = 1e-6;
  double origin_exclusion = 0.05;  // scan starts above this xi
};

struct SingularityReport {
  int w = 0;
  bool w_capped = false;
  bool c0_singular = false;
  int c0_rank_deficiency = 0;
  double c0_sigma_min = 0.0;
  double c0_sigma_max = 0.0;
  int derivative_order = 0;        // first m with (U* C^(m) V)_nn != 0; 0 if C(0) is regular
  bool t_in_column_space = false;
  double w_slope = 0.0;            // fitted growth of ||C^-1(eta h) T_C|| in 1/(eta h)
  std::vector<SingularSite> alpha_sites;
  std::vector<BetaSite> beta_sites;
  int alpha = 0;                   // max over sites
  int beta = 0;
  int p = 0;
  int order = 0;

  int g() const { return p + 2 - w; }
  int b() const { return 2 * alpha + beta; }
  int m() const { return 1 + 2 * w + b(); }
  int predicted_gain() const { return 2 - w; }
  int predicted_rate_q() const { return std::min(2 * p, p + 2 - w); }
};

/// w from C(s) near the origin, given a matrix function analytic on the
/// contour |s| = contour_radius. Only fills the w-related fields.
SingularityReport origin_analysis(const std::function<Eigen::MatrixXcd(cplx)>& c_of_s, const Eigen::VectorXcd& t_c,
                                  const SingularityOptions& opt = {});

/// Full classification: w at the origin, imaginary-axis singular sites with
/// alpha, and near-unit admissible roots with beta.
SingularityReport singularity_analysis(const HalfLineModel& model, const SingularityOptions& opt = {});

/// Least-squares slope of log(y) against log(x).
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

struct KappaBoundRow {
  double h = 0.0;
  double ratio = 0.0;          // eta h / (1 - |kappa_1|^2)
  double other_max = 0.0;      // max 1/(1-|kappa|^2) over the remaining admissible roots
};

struct KappaBoundReport {
  std::vector<KappaBoundRow> rows;
  double band = 0.0;           // max ratio / min ratio
  bool bounded = false;        // band <= 2
};

KappaBoundReport kappa_bound_sweep(const CharacteristicProblem& cp, double eta, const std::vector<double>& hs,
                                   double xi_offset = 0.0);

struct CornerLogLevel {
  double h = 0.0;
  int r_delta = 0;
  double small_r_sum = 0.0;     // sum_{r <= r_delta} h / (1 - |kappa_1(s_plus)|^2)
  double large_r_amp_max = 0.0; // max_{r > r_delta} 1/(1-|kappa_j|^2)
  double large_r_cinv_max = 0.0;  // max_{r > r_delta} ||C^-1(s_plus)||_max (0 without a model)
};

/// One level of the corner log-bound check. s = eta h, shifted per mode.
CornerLogLevel corner_log_bound(const Spectrum& spectrum, const CharacteristicProblem& cp, double eta, double delta,
                                const HalfLineModel* model = nullptr);

struct LogFit {
  double k = 0.0;
  double c = 0.0;
  double max_rel_residual = 0.0;
};

/// Least squares y = k log(1/h) + c.
LogFit fit_log(const std::vector<double>& h, const std::vector<double>& y);

/// JSON analyzer report (keys: scheme, order, bc, w, alpha, beta,
/// predicted_gain, predicted_rate_q, det_scan plus diagnostics).
std::string analyzer_report_json(const HalfLineModel& model, const SingularityReport& report);

}  // namespace wavelab
