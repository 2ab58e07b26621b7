#include "wavelab/wave_solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "wavelab/kernels.hpp"

namespace wavelab {

ManufacturedSolution standing_wave(double k, double a, double b, double c, std::string name) {
  const double w = std::sqrt(2.0) * k;
  ManufacturedSolution ms;
  ms.name = std::move(name);
  ms.u = [=](double x, double y, double t) { return std::cos(k * x + a) * std::cos(k * y + b) * std::cos(w * t + c); };
  ms.u_t = [=](double x, double y, double t) {
    return -w * std::cos(k * x + a) * std::cos(k * y + b) * std::sin(w * t + c);
  };
  ms.u_x = [=](double x, double y, double t) {
    return -k * std::sin(k * x + a) * std::cos(k * y + b) * std::cos(w * t + c);
  };
  ms.u_y = [=](double x, double y, double t) {
    return -k * std::cos(k * x + a) * std::sin(k * y + b) * std::cos(w * t + c);
  };
  ms.u_tt = [=](double x, double y, double t) {
    return -w * w * std::cos(k * x + a) * std::cos(k * y + b) * std::cos(w * t + c);
  };
  ms.u_xx = [=](double x, double y, double t) {
    return -k * k * std::cos(k * x + a) * std::cos(k * y + b) * std::cos(w * t + c);
  };
  ms.u_yy = ms.u_xx;
  auto time_factor = [=](double t, int d) { return std::pow(w, d) * std::cos(w * t + c + d * std::numbers::pi / 2); };
  ms.u_dt = [=](double x, double y, double t, int d) {
    return std::cos(k * x + a) * std::cos(k * y + b) * time_factor(t, d);
  };
  ms.u_x_dt = [=](double x, double y, double t, int d) {
    return -k * std::sin(k * x + a) * std::cos(k * y + b) * time_factor(t, d);
  };
  ms.u_y_dt = [=](double x, double y, double t, int d) {
    return -k * std::cos(k * x + a) * std::sin(k * y + b) * time_factor(t, d);
  };
  ms.zero_forcing = true;
  return ms;
}

ManufacturedSolution exact_local_solution() { return standing_wave(4.0, 1.0, 2.0, 3.0, "exact_local"); }

ManufacturedSolution high_frequency_solution() {
  return standing_wave(10.0 * std::numbers::pi, 1.0, 2.0, 3.0, "high_frequency");
}

ManufacturedSolution solution_by_name(const std::string& name) {
  if (name == "exact_local") return exact_local_solution();
  if (name == "high_frequency") return high_frequency_solution();
  throw std::invalid_argument("unknown manufactured solution '" + name + "'");
}

ManufacturedSolution1D standing_wave_1d() {
  ManufacturedSolution1D ms;
  ms.u = [](double x, double t) { return std::cos(4 * x + 1) * std::cos(4 * t + 3); };
  ms.u_t = [](double x, double t) { return -4 * std::cos(4 * x + 1) * std::sin(4 * t + 3); };
  ms.u_x = [](double x, double t) { return -4 * std::sin(4 * x + 1) * std::cos(4 * t + 3); };
  ms.u_tt = [](double x, double t) { return -16 * std::cos(4 * x + 1) * std::cos(4 * t + 3); };
  ms.u_xx = ms.u_tt;
  ms.u_dt = [](double x, double t, int d) {
    return std::pow(4.0, d) * std::cos(4 * x + 1) * std::cos(4 * t + 3 + d * std::numbers::pi / 2);
  };
  ms.u_x_dt = [](double x, double t, int d) {
    return -std::pow(4.0, d + 1) * std::sin(4 * x + 1) * std::cos(4 * t + 3 + d * std::numbers::pi / 2);
  };
  return ms;
}

GridFunction2D::GridFunction2D(int nx_, int ny_, double fill)
    : nx(nx_), ny(ny_), values(static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_), fill) {}

double GridFunction2D::norm_2d(double h) const {
  double s = 0.0;
  for (double v : values) s += v * v;
  return h * std::sqrt(s);
}

double GridFunction2D::norm_1d_x(int i, double h) const {
  double s = 0.0;
  for (int j = 0; j < nx; ++j) s += at(i, j) * at(i, j);
  return std::sqrt(h * s);
}

double GridFunction2D::norm_1d_y(int j, double h) const {
  double s = 0.0;
  for (int i = 0; i < ny; ++i) s += at(i, j) * at(i, j);
  return std::sqrt(h * s);
}

void SimulationConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
  if (dim != 1 && dim != 2) fail("dim must be 1 or 2");
  if (order != 2 && order != 4 && order != 6) fail("order must be 2, 4 or 6");
  if (n < SbpD2Operator::min_size(order)) fail("n is below the minimum for this order");
  if (!(tf > 0.0) || !std::isfinite(tf)) fail("tf must be positive");
  if (!(cfl > 0.0) || !std::isfinite(cfl)) fail("cfl must be positive");
  if (!(penalty_factor > 0.0) || !std::isfinite(penalty_factor)) fail("penalty factor must be positive");
  solution_by_name(solution);
}

BoundaryData2D sample_boundary(const ManufacturedSolution& ms, BoundaryKind kind, int n, double h, double t, int k) {
  if (k < 0 || k > 3) throw std::invalid_argument("sample_boundary: derivative order must be in 0..3");
  if (k > 0 && (!ms.u_dt || !ms.u_x_dt || !ms.u_y_dt)) {
    throw std::invalid_argument("sample_boundary: solution '" + ms.name + "' has no time derivatives");
  }
  BoundaryData2D d;
  d.x0.resize(n);
  d.x1.resize(n);
  d.y0.resize(n);
  d.y1.resize(n);
  const double one = (n - 1) * h;
  auto u = [&](double x, double y) { return k == 0 ? ms.u(x, y, t) : ms.u_dt(x, y, t, k); };
  auto ux = [&](double x, double y) { return k == 0 ? ms.u_x(x, y, t) : ms.u_x_dt(x, y, t, k); };
  auto uy = [&](double x, double y) { return k == 0 ? ms.u_y(x, y, t) : ms.u_y_dt(x, y, t, k); };
  for (int i = 0; i < n; ++i) {
    const double s = i * h;
    if (kind == BoundaryKind::dirichlet) {
      d.x0[i] = u(0.0, s);
      d.x1[i] = u(one, s);
      d.y0[i] = u(s, 0.0);
      d.y1[i] = u(s, one);
    } else {
      d.x0[i] = -ux(0.0, s);
      d.x1[i] = ux(one, s);
      d.y0[i] = -uy(s, 0.0);
      d.y1[i] = uy(s, one);
    }
  }
  return d;
}

BoundaryDataFn boundary_data_from(const ManufacturedSolution& ms, BoundaryKind kind, int n, double h) {
  return [ms, kind, n, h](double t, int k, BoundaryData2D& out) { out = sample_boundary(ms, kind, n, h, t, k); };
}

namespace {

GridFunction2D sample_field(const ManufacturedSolution::Field& f, int nx, int ny, double h, double t) {
  GridFunction2D g(nx, ny);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < nx; ++j) {
    for (int i = 0; i < ny; ++i) g.at(i, j) = f(j * h, i * h, t);
  }
  return g;
}

}  // namespace

GridFunction2D sample_solution(const ManufacturedSolution& ms, int nx, int ny, double h, double t) {
  return sample_field(ms.u, nx, ny, h, t);
}

GridFunction2D sample_velocity(const ManufacturedSolution& ms, int nx, int ny, double h, double t) {
  return sample_field(ms.u_t, nx, ny, h, t);
}

double l2_error(std::span<const double> u, std::span<const double> exact, double h) {
  if (u.size() != exact.size()) throw std::invalid_argument("l2_error: shape mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double d = u[k] - exact[k];
    s += d * d;
  }
  return h * std::sqrt(s);
}

double l2_error(const GridFunction2D& u, const GridFunction2D& exact, double h) {
  if (u.nx != exact.nx || u.ny != exact.ny) throw std::invalid_argument("l2_error: shape mismatch");
  return l2_error(std::span<const double>(u.values), std::span<const double>(exact.values), h);
}

InstabilityError::InstabilityError(int step, double t)
    : std::runtime_error([&] {
        std::ostringstream os;
        os << "solution became non-finite at step " << step << " (t = " << t << ")";
        return os.str();
      }()),
      step_(step),
      t_(t) {}

namespace {

constexpr double kStageTime[4] = {0.0, 0.5, 0.5, 1.0};

// Weights of g, g', g'', g''' in the data of RK4 stage `stage` of a step of size dt.
std::array<double, 4> stage_weights(int stage, double dt) {
  switch (stage) {
    case 0: return {1.0, 0.0, 0.0, 0.0};
    case 1: return {1.0, 0.5 * dt, 0.0, 0.0};
    case 2: return {1.0, 0.5 * dt, 0.25 * dt * dt, 0.0};
    default: return {1.0, dt, 0.5 * dt * dt, 0.25 * dt * dt * dt};
  }
}

// Second-order system integrator. rhs(u, stage, t0, dt, out) writes u_tt for
// the given stage of the step starting at t0.
template <class Rhs>
int rk4_loop(std::vector<double>& u, std::vector<double>& v, double tf, double dt_nominal, Rhs&& rhs) {
  const std::size_t n = u.size();
  const auto count = static_cast<std::ptrdiff_t>(n);
  std::vector<double> ku(n), acc_u(n), acc_v(n), stage(n), a(n), cu(n, 0.0), cv(n, 0.0);
  const int steps = static_cast<int>(std::ceil(tf / dt_nominal - 1e-12));
  double t = 0.0;
  for (int step = 0; step < steps; ++step) {
    const double dt = step == steps - 1 ? tf - t : dt_nominal;
    // stage 1
    rhs(u, 0, t, dt, a);
#pragma omp parallel for simd schedule(static)
    for (std::ptrdiff_t k = 0; k < count; ++k) {
      acc_u[k] = v[k];
      acc_v[k] = a[k];
      stage[k] = u[k] + 0.5 * dt * v[k];
      ku[k] = v[k] + 0.5 * dt * a[k];
    }
    // stage 2
    rhs(stage, 1, t, dt, a);
#pragma omp parallel for simd schedule(static)
    for (std::ptrdiff_t k = 0; k < count; ++k) {
      acc_u[k] += 2.0 * ku[k];
      acc_v[k] += 2.0 * a[k];
      stage[k] = u[k] + 0.5 * dt * ku[k];
      ku[k] = v[k] + 0.5 * dt * a[k];
    }
    // stage 3
    rhs(stage, 2, t, dt, a);
#pragma omp parallel for simd schedule(static)
    for (std::ptrdiff_t k = 0; k < count; ++k) {
      acc_u[k] += 2.0 * ku[k];
      acc_v[k] += 2.0 * a[k];
      stage[k] = u[k] + dt * ku[k];
      ku[k] = v[k] + dt * a[k];
    }
    // stage 4
    rhs(stage, 3, t, dt, a);
    // compensated update: thousands of O(dt) increments otherwise leave a biased rounding floor
    bool finite = true;
#pragma omp parallel for schedule(static) reduction(&& : finite)
    for (std::ptrdiff_t k = 0; k < count; ++k) {
      const double du = dt / 6.0 * (acc_u[k] + ku[k]) - cu[k];
      const double un = u[k] + du;
      cu[k] = (un - u[k]) - du;
      u[k] = un;
      const double dv = dt / 6.0 * (acc_v[k] + a[k]) - cv[k];
      const double vn = v[k] + dv;
      cv[k] = (vn - v[k]) - dv;
      v[k] = vn;
      finite = finite && std::isfinite(u[k]) && std::isfinite(v[k]);
    }
    t = step == steps - 1 ? tf : t + dt;
    if (!finite) throw InstabilityError(step + 1, t);
  }
  return steps;
}

}  // namespace

SolveResult rk4_integrate(const SemiDiscretization2D& sd, const ManufacturedSolution& ms, const SimulationConfig& cfg,
                          const BoundaryDataFn& data) {
  if (!(cfg.tf > 0.0) || !(cfg.cfl > 0.0)) throw std::invalid_argument("rk4_integrate: tf and cfl must be positive");
  if (sd.nx() != sd.ny()) throw std::invalid_argument("rk4_integrate: expects a square grid");
  const int n = sd.nx();
  const double h = sd.h();
  const BoundaryDataFn bdata = data ? data : boundary_data_from(ms, sd.x().kind(), n, h);

  std::vector<double> u = sample_solution(ms, n, n, h, 0.0).values;
  std::vector<double> v = sample_velocity(ms, n, n, h, 0.0).values;
  std::array<BoundaryData2D, 4> jet;
  BoundaryData2D g;
  auto combine = [](const std::array<BoundaryData2D, 4>& j, const std::array<double, 4>& wts, BoundaryData2D& out) {
    auto mix = [&](std::vector<double> BoundaryData2D::*side) {
      const std::size_t len = (j[0].*side).size();
      (out.*side).assign(len, 0.0);
      for (int k = 0; k < 4; ++k) {
        if (wts[k] == 0.0) continue;
        for (std::size_t i = 0; i < len; ++i) (out.*side)[i] += wts[k] * (j[k].*side)[i];
      }
    };
    mix(&BoundaryData2D::x0);
    mix(&BoundaryData2D::x1);
    mix(&BoundaryData2D::y0);
    mix(&BoundaryData2D::y1);
  };
  auto rhs = [&](const std::vector<double>& w, int stage, double t0, double dt, std::vector<double>& out) {
    if (stage == 0) {
      for (int k = 0; k < 4; ++k) bdata(t0, k, jet[static_cast<std::size_t>(k)]);
    }
    combine(jet, stage_weights(stage, dt), g);
    const double t = t0 + kStageTime[stage] * dt;
    sd.apply_homogeneous(w, out);
    sd.add_data(g, out);
    if (!ms.zero_forcing) {
#pragma omp parallel for schedule(static)
      for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(j) * n + i] += ms.forcing(j * h, i * h, t);
      }
    }
  };
  SolveResult res;
  res.dt = cfg.cfl * h;
  res.steps = rk4_loop(u, v, cfg.tf, res.dt, rhs);
  res.t_final = cfg.tf;
  res.u = GridFunction2D(n, n);
  res.u.values = std::move(u);
  res.l2_error = l2_error(res.u, sample_solution(ms, n, n, h, cfg.tf), h);
  return res;
}

void rk4_integrate_homogeneous(const SemiDiscretization2D& sd, std::vector<double>& u, std::vector<double>& v,
                               double tf, double dt) {
  if (u.size() != sd.size() || v.size() != sd.size()) throw std::invalid_argument("rk4: dimension mismatch");
  auto rhs = [&](const std::vector<double>& w, int, double, double, std::vector<double>& out) {
    sd.apply_homogeneous(w, out);
  };
  rk4_loop(u, v, tf, dt, rhs);
}

SolveResult1D rk4_integrate_1d(const SemiDiscretization1D& sd, const ManufacturedSolution1D& ms, double tf,
                               double cfl) {
  const int n = sd.n();
  const double h = sd.h();
  const double one = (n - 1) * h;
  std::vector<double> u(n), v(n);
  for (int i = 0; i < n; ++i) {
    u[i] = ms.u(i * h, 0.0);
    v[i] = ms.u_t(i * h, 0.0);
  }
  const bool dirichlet = sd.kind() == BoundaryKind::dirichlet;
  auto trace = [&](double x, double t, int k) { return dirichlet ? ms.u_dt(x, t, k) : ms.u_x_dt(x, t, k); };
  auto rhs = [&](const std::vector<double>& w, int stage, double t0, double dt, std::vector<double>& out) {
    const auto wts = stage_weights(stage, dt);
    // Neumann data are outward normal derivatives
    const double left_sign = dirichlet ? 1.0 : -1.0;
    double gl = 0.0;
    double gr = 0.0;
    for (int k = 0; k < 4; ++k) {
      gl += left_sign * wts[k] * trace(0.0, t0, k);
      gr += wts[k] * trace(one, t0, k);
    }
    const double t = t0 + kStageTime[stage] * dt;
    sd.apply(w, gl, gr, out);
    for (int i = 0; i < n; ++i) out[i] += ms.forcing(i * h, t);
  };
  SolveResult1D res;
  res.steps = rk4_loop(u, v, tf, cfl * h, rhs);
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += std::pow(u[i] - ms.u(i * h, tf), 2);
  res.l2_error = std::sqrt(h * s);
  res.u = std::move(u);
  return res;
}

double discrete_energy(const SemiDiscretization2D& sd, std::span<const double> u, std::span<const double> v) {
  const int nx = sd.nx();
  const int ny = sd.ny();
  std::vector<double> au(sd.size());
  sd.apply_homogeneous(u, au);
  const auto px = sd.x().p_diag();
  const auto py = sd.y().p_diag();
  double e = 0.0;
  for (int j = 0; j < nx; ++j) {
    for (int i = 0; i < ny; ++i) {
      const std::size_t k = static_cast<std::size_t>(j) * ny + i;
      e += px[j] * py[i] * (v[k] * v[k] - u[k] * au[k]);
    }
  }
  return e;
}

}  // namespace wavelab
