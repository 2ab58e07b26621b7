#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wavelab/semidisc.hpp"

namespace wavelab {

/// Closed-form solution U(x, y, t) with the derivatives the solver needs.
/// The forcing is F = U_tt - U_xx - U_yy; zero_forcing marks fields for
/// which F vanishes identically so the solver can skip evaluating it.
struct ManufacturedSolution {
  using Field = std::function<double(double, double, double)>;
  std::string name;
  Field u, u_t, u_x, u_y, u_tt, u_xx, u_yy;
  /// k-th time derivatives of U, U_x and U_y for k = 0..3 (Runge-Kutta stage data).
  using Jet = std::function<double(double, double, double, int)>;
  Jet u_dt, u_x_dt, u_y_dt;
  bool zero_forcing = false;

  double forcing(double x, double y, double t) const { return u_tt(x, y, t) - u_xx(x, y, t) - u_yy(x, y, t); }
};

/// U = cos(k x + a) cos(k y + b) cos(sqrt(2) k t + c); forcing-free.
ManufacturedSolution standing_wave(double k, double a, double b, double c, std::string name);
/// Wavenumber 4 field used by the acceptance runs.
ManufacturedSolution exact_local_solution();
/// Wavenumber 10 pi field for full-fidelity runs.
ManufacturedSolution high_frequency_solution();
/// Looks up "exact_local" or "high_frequency". Throws std::invalid_argument.
ManufacturedSolution solution_by_name(const std::string& name);

/// 1D closed form u(x, t) with derivatives.
struct ManufacturedSolution1D {
  using Field = std::function<double(double, double)>;
  Field u, u_t, u_x, u_tt, u_xx;
  /// k-th time derivatives of u and u_x for k = 0..3.
  using Jet = std::function<double(double, double, int)>;
  Jet u_dt, u_x_dt;
  double forcing(double x, double t) const { return u_tt(x, t) - u_xx(x, t); }
};

/// u = cos(4x + 1) cos(4t + 3).
ManufacturedSolution1D standing_wave_1d();

/// Values on an nx-by-ny grid, stored as values[j * ny + i] (i: y index, j: x index).
struct GridFunction2D {
  int nx = 0;
  int ny = 0;
  std::vector<double> values;

  GridFunction2D() = default;
  GridFunction2D(int nx_, int ny_, double fill = 0.0);

  double& at(int i, int j) { return values[static_cast<std::size_t>(j) * ny + i]; }
  double at(int i, int j) const { return values[static_cast<std::size_t>(j) * ny + i]; }

  /// ||w||_2D = h sqrt(sum |w_ij|^2)
  double norm_2d(double h) const;
  /// Row i along x: sqrt(h sum_j |w_ij|^2)
  double norm_1d_x(int i, double h) const;
  /// Column j along y: sqrt(h sum_i |w_ij|^2)
  double norm_1d_y(int j, double h) const;
};

struct SimulationConfig {
  int dim = 2;
  int order = 4;
  BoundaryKind bc = BoundaryKind::dirichlet;
  int n = 41;
  double tf = 2.0;
  double cfl = 0.1;
  double penalty_factor = 1.2;
  std::string solution = "exact_local";
  unsigned seed = 0;  // reserved

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

/// Fills the k-th time derivative (k = 0..3) of the boundary data at time t.
using BoundaryDataFn = std::function<void(double t, int k, BoundaryData2D& out)>;

/// Dirichlet traces U, or outward normal derivatives (-U_x, +U_x, -U_y, +U_y).
BoundaryDataFn boundary_data_from(const ManufacturedSolution& ms, BoundaryKind kind, int n, double h);

GridFunction2D sample_solution(const ManufacturedSolution& ms, int nx, int ny, double h, double t);
GridFunction2D sample_velocity(const ManufacturedSolution& ms, int nx, int ny, double h, double t);
BoundaryData2D sample_boundary(const ManufacturedSolution& ms, BoundaryKind kind, int n, double h, double t, int k = 0);

/// h * sqrt(sum (u - U)^2). Throws std::invalid_argument on shape mismatch.
double l2_error(const GridFunction2D& u, const GridFunction2D& exact, double h);
double l2_error(std::span<const double> u, std::span<const double> exact, double h);

/// Raised when the solution stops being finite.
class InstabilityError : public std::runtime_error {
 public:
  InstabilityError(int step, double t);
  int step() const { return step_; }
  double time() const { return t_; }

 private:
  int step_;
  double t_;
};

struct SolveResult {
  GridFunction2D u;
  double l2_error = 0.0;
  int steps = 0;
  double dt = 0.0;
  double t_final = 0.0;
};

/// Classical RK4 on (u, u_t). Stage data are Taylor combinations of g and its
/// first three time derivatives at the step start, which is RK4 applied to the
/// system augmented by the data; evaluating g at stage times instead loses
/// accuracy once the SAT injection grows like 1/h^2. Forcing, when present, is
/// evaluated at stage times. Uses dt = cfl * h and shortens the last step to
/// land on tf. When data is empty, the exact traces of ms are used.
SolveResult rk4_integrate(const SemiDiscretization2D& sd, const ManufacturedSolution& ms, const SimulationConfig& cfg,
                          const BoundaryDataFn& data = {});

/// Same integrator from explicit initial data with zero forcing. Used for
/// homogeneous stability checks; returns (u, v) at tf.
void rk4_integrate_homogeneous(const SemiDiscretization2D& sd, std::vector<double>& u, std::vector<double>& v,
                               double tf, double dt);

struct SolveResult1D {
  std::vector<double> u;
  double l2_error = 0.0;  // sqrt(h) * ||u - U||
  int steps = 0;
};

SolveResult1D rk4_integrate_1d(const SemiDiscretization1D& sd, const ManufacturedSolution1D& ms, double tf,
                               double cfl);

/// v^T (P x P) v - u^T (P x P) A u for the homogeneous 2D operator A.
double discrete_energy(const SemiDiscretization2D& sd, std::span<const double> u, std::span<const double> v);

}  // namespace wavelab
