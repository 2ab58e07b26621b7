#include "wavelab/normal_mode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace wavelab {

void CharacteristicProblem::validate() const {
  if (a.size() < 3 || a.size() % 2 == 0) throw std::invalid_argument("characteristic problem: stencil must have odd length >= 3");
  double sum = 0.0;
  double scale = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (std::abs(a[j] - a[a.size() - 1 - j]) > 1e-14 * std::abs(a[j]) + 1e-15) {
      throw std::invalid_argument("characteristic problem: stencil is not symmetric");
    }
    sum += a[j];
    scale = std::max(scale, std::abs(a[j]));
  }
  if (std::abs(sum) > 1e-12 * scale) throw std::invalid_argument("characteristic problem: stencil does not sum to zero");
  if (a.back() == 0.0) throw std::invalid_argument("characteristic problem: leading coefficient vanishes");
}

CharacteristicProblem characteristic_problem(int order) {
  CharacteristicProblem cp{builtin_sbp_table(order).interior};
  cp.validate();
  return cp;
}

namespace {

// Coefficients of P(kappa) = sum a_j kappa^j - s^2 kappa^l, lowest degree first.
std::vector<cplx> char_poly(const CharacteristicProblem& cp, cplx s) {
  std::vector<cplx> c(cp.a.begin(), cp.a.end());
  c[static_cast<std::size_t>(cp.l())] -= s * s;
  return c;
}

void eval_poly(const std::vector<cplx>& c, cplx z, cplx& p, cplx& dp) {
  p = 0.0;
  dp = 0.0;
  for (std::size_t j = c.size(); j-- > 0;) {
    dp = dp * z + p;
    p = p * z + c[j];
  }
}

std::vector<cplx> poly_roots(const std::vector<cplx>& c) {
  const int n = static_cast<int>(c.size()) - 1;
  Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) comp(i, n - 1) = -c[static_cast<std::size_t>(i)] / c[static_cast<std::size_t>(n)];
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
  if (es.info() != Eigen::Success) throw std::runtime_error("characteristic_roots: companion eigensolve failed");
  std::vector<cplx> roots(es.eigenvalues().data(), es.eigenvalues().data() + n);
  for (auto& z : roots) {
    for (int it = 0; it < 3; ++it) {
      cplx p, dp;
      eval_poly(c, z, p, dp);
      if (std::abs(dp) < 1e-8 * (1.0 + std::abs(z))) break;
      const cplx step = p / dp;
      z -= step;
      if (std::abs(step) < 1e-16 * (1.0 + std::abs(z))) break;
    }
  }
  std::sort(roots.begin(), roots.end(), [](cplx x, cplx y) { return std::abs(x) < std::abs(y); });
  return roots;
}

double amplification(cplx k) { return 1.0 / (1.0 - std::norm(k)); }

}  // namespace

RootSet characteristic_roots(const CharacteristicProblem& cp, cplx s) {
  const int l = cp.l();
  RootSet rs;
  rs.all = poly_roots(char_poly(cp, s));
  if (static_cast<int>(rs.all.size()) != 2 * l) throw std::runtime_error("characteristic_roots: root count mismatch");
  if (s.real() >= 1e-2) {
    const auto inside = std::count_if(rs.all.begin(), rs.all.end(), [](cplx k) { return std::abs(k) < 1.0 - 1e-12; });
    if (inside != l) {
      std::ostringstream os;
      os << "characteristic_roots: " << inside << " roots inside the unit circle at s = " << s << ", expected " << l;
      throw std::runtime_error(os.str());
    }
  }
  rs.admissible.assign(rs.all.begin(), rs.all.begin() + l);
  std::reverse(rs.admissible.begin(), rs.admissible.end());
  for (cplx k : rs.admissible) rs.amplification.push_back(amplification(k));
  return rs;
}

std::vector<cplx> analytic_admissible_roots(const CharacteristicProblem& cp, cplx s) {
  const int l = cp.l();
  auto roots = poly_roots(char_poly(cp, s));
  const auto near = std::min_element(roots.begin(), roots.end(), [&](cplx x, cplx y) {
    return std::abs(x - (1.0 - s)) < std::abs(y - (1.0 - s));
  });
  std::vector<cplx> out{*near};
  roots.erase(near);
  if (l == 1) return out;
  // The other admissible roots stay inside the unit circle near s = 0. They are
  // matched to their s = 0 positions so that the ordering is continuous in s
  // even when two of them have equal modulus.
  auto ref = poly_roots(char_poly(cp, 0.0));
  ref.resize(static_cast<std::size_t>(l - 1));
  for (cplx r : ref) {
    const auto best = std::min_element(roots.begin(), roots.end(),
                                       [&](cplx x, cplx y) { return std::abs(x - r) < std::abs(y - r); });
    out.push_back(*best);
    roots.erase(best);
  }
  return out;
}

double dispersion_f(int l, double theta) {
  if (l < 1) throw std::invalid_argument("dispersion_f: l must be >= 1");
  const double z = 4.0 * std::pow(std::sin(theta / 2.0), 2);
  double f = 0.0;
  double fact_n = 1.0;   // n!
  double fact_2n2 = 2.0; // (2n+2)!
  double zp = z;
  for (int n = 0; n < l; ++n) {
    if (n > 0) {
      fact_n *= n;
      fact_2n2 *= (2.0 * n + 1.0) * (2.0 * n + 2.0);
      zp *= z;
    }
    f -= 2.0 * fact_n * fact_n / fact_2n2 * zp;
  }
  return f;
}

HalfLineModel half_line_model(const SemiDiscretization1D& sd) {
  const StencilMatrix& q = sd.matrix();
  const auto st = q.stencil();
  const int l = q.half_width();
  const int width = q.border_cols();
  HalfLineModel m;
  m.order = sd.op().order();
  m.p = sd.op().p();
  m.kind = sd.kind();
  m.cp = CharacteristicProblem{std::vector<double>(st.begin(), st.end())};
  m.cp.validate();

  const double tol = 1e-12 * std::max(1.0, *std::max_element(st.begin(), st.end(), [](double x, double y) {
    return std::abs(x) < std::abs(y);
  }));
  int last = -1;
  for (int i = 0; i < q.border_rows(); ++i) {
    for (int j = 0; j < width; ++j) {
      const int k = j - i + l;
      const double interior = (k >= 0 && k <= 2 * l) ? st[static_cast<std::size_t>(k)] : 0.0;
      if (std::abs(q.entry(i, j) - interior) > tol) {
        last = i;
        break;
      }
    }
  }
  m.c = last + 1;
  m.d = m.c - l;
  if (m.d < 0) throw std::runtime_error("half_line_model: closure shorter than the stencil half width");
  m.rows.resize(m.c, width);
  for (int i = 0; i < m.c; ++i)
    for (int j = 0; j < width; ++j) m.rows(i, j) = q.entry(i, j);

  const int deg = m.p + 2;
  const double fact = std::tgamma(deg + 1.0);
  const double fact_p = std::tgamma(m.p + 1.0);
  m.t_c.resize(m.c);
  double tmax = 0.0;
  for (int i = 0; i < m.c; ++i) {
    double s = 0.0;
    for (int j = 0; j < width; ++j) s += m.rows(i, j) * std::pow(j, deg) / fact;
    m.t_c(i) = s - std::pow(i, m.p) / fact_p;
    tmax = std::max(tmax, std::abs(m.t_c(i)));
  }
  m.k = 0;
  for (int i = 0; i < m.c; ++i)
    if (std::abs(m.t_c(i)) > 1e-12 * tmax) m.k = i;
  return m;
}

BoundarySystem build_boundary_system(const HalfLineModel& model, cplx s, const std::vector<cplx>& kappa) {
  const int l = model.cp.l();
  if (static_cast<int>(kappa.size()) != l) throw std::runtime_error("build_boundary_system: need l admissible roots");
  const int n = model.d + l;
  const int width = static_cast<int>(model.rows.cols());
  BoundarySystem bs;
  bs.d = model.d;
  bs.l = l;
  bs.k = model.k;
  bs.s = s;
  bs.kappa = kappa;
  bs.c = Eigen::MatrixXcd::Zero(n, n);
  const cplx s2 = s * s;
  for (int i = 0; i < model.c; ++i) {
    for (int j = 0; j < width; ++j) {
      const cplx coef = (i == j ? s2 : cplx(0.0)) - model.rows(i, j);
      if (coef == cplx(0.0)) continue;
      if (j < model.d) {
        bs.c(i, j) += coef;
      } else {
        for (int m = 0; m < l; ++m) bs.c(i, model.d + m) += coef * std::pow(kappa[static_cast<std::size_t>(m)], j - model.d);
      }
    }
  }
  bs.t_c = model.t_c.cast<cplx>();
  return bs;
}

BoundarySystem build_boundary_system(const HalfLineModel& model, cplx s) {
  return build_boundary_system(model, s, characteristic_roots(model.cp, s).admissible);
}

BoundarySolution solve_boundary_system(const BoundarySystem& bs, int p, double h) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(bs.c);
  const auto& sv = svd.singularValues();
  // C is O(1) in grid units; roots near the double root kappa = 1 carry sqrt(eps) error
  if (sv(sv.size() - 1) <= 1e-7 * std::max(1.0, sv(0))) throw std::domain_error("solve_boundary_system: C is singular");
  const Eigen::MatrixXcd inv = bs.c.inverse();
  BoundarySolution out;
  out.sigma_full = std::pow(h, p + 2) * (inv * bs.t_c);
  out.cinv_max = inv.cwiseAbs().maxCoeff();
  out.max_norm = out.sigma_full.cwiseAbs().maxCoeff();
  for (int i = 0; i < bs.d; ++i) {
    const double z = std::abs(out.sigma_full(i));
    out.zeta_abs.push_back(z);
    out.l2_norm2 += h * z * z;
  }
  for (int j = 0; j < bs.l; ++j) {
    const double sg = std::abs(out.sigma_full(bs.d + j));
    const double amp = amplification(bs.kappa[static_cast<std::size_t>(j)]);
    out.sigma_abs.push_back(sg);
    out.amplification.push_back(amp);
    out.l2_norm2 += h * sg * sg * amp;
  }
  return out;
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("log_log_slope: need matching samples");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

SingularityReport origin_analysis(const std::function<Eigen::MatrixXcd(cplx)>& c_of_s, const Eigen::VectorXcd& t_c,
                                  const SingularityOptions& opt) {
  SingularityReport rep;
  const int kpts = opt.contour_points;
  const double rho = opt.contour_radius;
  std::vector<Eigen::MatrixXcd> samples;
  samples.reserve(static_cast<std::size_t>(kpts));
  for (int k = 0; k < kpts; ++k) {
    const double th = 2.0 * std::numbers::pi * k / kpts;
    samples.push_back(c_of_s(std::polar(rho, th)));
  }
  // Cauchy integral: C^(m)(0) = m! / (K rho^m) sum_k C(rho e^{i th_k}) e^{-i m th_k}
  auto derivative = [&](int m) -> Eigen::MatrixXcd {
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(samples[0].rows(), samples[0].cols());
    for (int k = 0; k < kpts; ++k) acc += samples[static_cast<std::size_t>(k)] * std::polar(1.0, -2.0 * std::numbers::pi * m * k / kpts);
    return (std::tgamma(m + 1.0) / (kpts * std::pow(rho, m))) * acc;
  };

  // reference magnitude: the size of C on the contour, so that C(0) = 0 is detected as singular
  double c_scale = 0.0;
  for (const auto& m : samples) c_scale = std::max(c_scale, m.cwiseAbs().maxCoeff());
  const Eigen::MatrixXcd c0 = derivative(0);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(c0, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const Eigen::Index n = sv.size();
  rep.c0_sigma_max = sv(0);
  rep.c0_sigma_min = sv(n - 1);
  const double sing_thr = opt.singular_tol * std::max(sv(0), c_scale);
  for (Eigen::Index i = 0; i < n; ++i)
    if (sv(i) < sing_thr) ++rep.c0_rank_deficiency;
  rep.c0_singular = rep.c0_rank_deficiency > 0;
  if (!rep.c0_singular) {
    rep.w = 0;
    return rep;
  }

  const Eigen::MatrixXcd u = svd.matrixU();
  const Eigen::MatrixXcd v = svd.matrixV();
  // T_C in col(C(0)): no component along the left null directions
  const Eigen::VectorXcd null_part = u.rightCols(rep.c0_rank_deficiency).adjoint() * t_c;
  rep.t_in_column_space = null_part.norm() <= opt.column_space_tol * std::max(t_c.norm(), 1e-300);

  const double c0_scale = std::max(c0.cwiseAbs().maxCoeff(), c_scale);
  for (int m = 1; m <= opt.w_cap + 1; ++m) {
    const Eigen::MatrixXcd dm = derivative(m);
    const cplx nn = (u.adjoint() * dm * v)(n - 1, n - 1);
    const double scale = std::max(dm.cwiseAbs().maxCoeff(), c0_scale);
    if (std::abs(nn) > opt.derivative_tol * scale) {
      rep.derivative_order = m;
      break;
    }
  }
  if (rep.derivative_order == 0) {
    rep.w = opt.w_cap;
    rep.w_capped = true;
    return rep;
  }
  rep.w = rep.t_in_column_space ? rep.derivative_order - 1 : rep.derivative_order;
  if (rep.w > opt.w_cap) {
    rep.w = opt.w_cap;
    rep.w_capped = true;
  }
  return rep;
}

namespace {

double singular_ratio(const Eigen::MatrixXcd& c) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(c);
  const auto& sv = svd.singularValues();
  return sv(0) > 0.0 ? sv(sv.size() - 1) / sv(0) : 0.0;
}

std::vector<double> eta_h_ladder() {
  std::vector<double> out;
  for (int k = 4; k <= 12; ++k) out.push_back(std::ldexp(1.0, -k));
  return out;
}

int round_up_exponent(double slope) { return std::max(0, static_cast<int>(std::ceil(slope - 0.1))); }

}  // namespace

SingularityReport singularity_analysis(const HalfLineModel& model, const SingularityOptions& opt) {
  auto c_of_s = [&](cplx s) {
    return build_boundary_system(model, s, analytic_admissible_roots(model.cp, s)).c;
  };
  SingularityReport rep = origin_analysis(c_of_s, model.t_c.cast<cplx>(), opt);
  rep.p = model.p;
  rep.order = model.order;

  // measured growth of C^-1 T near the origin along the real axis
  {
    std::vector<double> inv_eta, growth;
    for (double eh : eta_h_ladder()) {
      const auto bs = build_boundary_system(model, cplx(eh, 0.0));
      const Eigen::VectorXcd x = bs.c.fullPivLu().solve(bs.t_c);
      inv_eta.push_back(1.0 / eh);
      growth.push_back(std::max(x.cwiseAbs().maxCoeff(), 1e-300));
    }
    rep.w_slope = log_log_slope(inv_eta, growth);
  }

  // imaginary-axis scan away from the origin
  const int npts = opt.scan_points;
  const double x0 = opt.origin_exclusion;
  auto ratio_at = [&](double xi) {
    return singular_ratio(build_boundary_system(model, cplx(opt.scan_eps, xi)).c);
  };
  std::vector<double> xs(static_cast<std::size_t>(npts)), rs(static_cast<std::size_t>(npts));
  for (int i = 0; i < npts; ++i) {
    xs[i] = x0 + (std::numbers::pi - x0) * (i + 1) / npts;
    rs[i] = ratio_at(xs[i]);
  }
  for (int i = 0; i < npts; ++i) {
    const bool left_ok = i == 0 || rs[i] <= rs[i - 1];
    const bool right_ok = i == npts - 1 || rs[i] <= rs[i + 1];
    if (!(left_ok && right_ok) || rs[i] > 1e-2) continue;
    // golden-section refinement on the bracketing cell
    double a = i == 0 ? xs[i] : xs[i - 1];
    double b = i == npts - 1 ? xs[i] : xs[i + 1];
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = ratio_at(c), fd = ratio_at(d);
    for (int it = 0; it < 80 && b - a > 1e-15; ++it) {
      if (fc < fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - gr * (b - a);
        fc = ratio_at(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + gr * (b - a);
        fd = ratio_at(d);
      }
    }
    const double xi = fc < fd ? c : d;
    const double r = std::min({fc, fd, rs[i]});
    if (r > opt.site_tol) continue;
    SingularSite site{xi, r, 0, 0.0};
    std::vector<double> inv_eta, growth;
    for (double eh : eta_h_ladder()) {
      const auto bs = build_boundary_system(model, cplx(eh, xi));
      inv_eta.push_back(1.0 / eh);
      growth.push_back(bs.c.inverse().cwiseAbs().maxCoeff());
    }
    site.alpha_slope = log_log_slope(inv_eta, growth);
    site.alpha = round_up_exponent(site.alpha_slope);
    rep.alpha = std::max(rep.alpha, site.alpha);
    rep.alpha_sites.push_back(site);
  }

  // admissible roots touching the unit circle away from the origin
  for (int k = 1; k <= 8; ++k) {
    const double xi = std::numbers::pi * k / 8.0;
    const auto roots = characteristic_roots(model.cp, cplx(opt.scan_eps, xi));
    double kmax = 0.0;
    for (cplx z : roots.admissible) kmax = std::max(kmax, std::abs(z));
    if (kmax < 1.0 - 1e-6) continue;
    std::vector<double> inv_eta, growth;
    for (double eh : eta_h_ladder()) {
      const auto rr = characteristic_roots(model.cp, cplx(eh, xi));
      inv_eta.push_back(1.0 / eh);
      growth.push_back(*std::max_element(rr.amplification.begin(), rr.amplification.end()));
    }
    BetaSite site{xi, 0, log_log_slope(inv_eta, growth)};
    site.beta = round_up_exponent(site.slope);
    rep.beta = std::max(rep.beta, site.beta);
    rep.beta_sites.push_back(site);
  }
  return rep;
}

KappaBoundReport kappa_bound_sweep(const CharacteristicProblem& cp, double eta, const std::vector<double>& hs,
                                   double xi_offset) {
  KappaBoundReport rep;
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (double h : hs) {
    const cplx s(eta * h, xi_offset);
    const auto roots = characteristic_roots(cp, s);
    KappaBoundRow row;
    row.h = h;
    row.ratio = eta * h * roots.amplification.front();
    for (std::size_t j = 1; j < roots.amplification.size(); ++j) row.other_max = std::max(row.other_max, roots.amplification[j]);
    lo = std::min(lo, row.ratio);
    hi = std::max(hi, row.ratio);
    rep.rows.push_back(row);
  }
  rep.band = hi / lo;
  rep.bounded = rep.band <= 2.0;
  return rep;
}

CornerLogLevel corner_log_bound(const Spectrum& spectrum, const CharacteristicProblem& cp, double eta, double delta,
                                const HalfLineModel* model) {
  CornerLogLevel lvl;
  const double h = spectrum.h;
  lvl.h = h;
  const cplx s(eta * h, 0.0);
  for (int r = 0; r < spectrum.size(); ++r) {
    const double lam = std::max(spectrum.lambda(r), 0.0);
    const auto sp = shift(s, lam, h);
    const auto roots = characteristic_roots(cp, sp.s_plus);
    if (std::sqrt(h * h * lam) <= delta) {
      ++lvl.r_delta;
      lvl.small_r_sum += h * roots.amplification.front();
    } else {
      for (double a : roots.amplification) lvl.large_r_amp_max = std::max(lvl.large_r_amp_max, a);
      if (model) {
        const auto bs = build_boundary_system(*model, sp.s_plus, roots.admissible);
        lvl.large_r_cinv_max = std::max(lvl.large_r_cinv_max, bs.c.inverse().cwiseAbs().maxCoeff());
      }
    }
  }
  return lvl;
}

LogFit fit_log(const std::vector<double>& h, const std::vector<double>& y) {
  if (h.size() != y.size() || h.size() < 2) throw std::invalid_argument("fit_log: need matching samples");
  const Eigen::Index n = static_cast<Eigen::Index>(h.size());
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, 0) = std::log(1.0 / h[static_cast<std::size_t>(i)]);
    a(i, 1) = 1.0;
    b(i) = y[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector2d coef = a.colPivHouseholderQr().solve(b);
  LogFit fit{coef(0), coef(1), 0.0};
  const Eigen::VectorXd res = a * coef - b;
  for (Eigen::Index i = 0; i < n; ++i) fit.max_rel_residual = std::max(fit.max_rel_residual, std::abs(res(i) / b(i)));
  return fit;
}

std::string analyzer_report_json(const HalfLineModel& model, const SingularityReport& rep) {
  nlohmann::ordered_json j;
  j["scheme"] = model.scheme;
  j["order"] = model.order;
  j["bc"] = std::string(to_string(model.kind));
  j["w"] = rep.w;
  nlohmann::json alpha = nlohmann::json::array();
  for (const auto& s : rep.alpha_sites) alpha.push_back(s.alpha);
  nlohmann::json beta = nlohmann::json::array();
  for (const auto& s : rep.beta_sites) beta.push_back(s.beta);
  j["alpha"] = alpha;
  j["beta"] = beta;
  j["predicted_gain"] = rep.predicted_gain();
  j["predicted_rate_q"] = rep.predicted_rate_q();
  nlohmann::json scan = nlohmann::json::array();
  for (const auto& s : rep.alpha_sites) scan.push_back({{"xi", s.xi}, {"ratio", s.ratio}, {"alpha", s.alpha}, {"slope", s.alpha_slope}});
  j["det_scan"] = scan;
  nlohmann::json beta_sites = nlohmann::json::array();
  for (const auto& s : rep.beta_sites) beta_sites.push_back({{"xi", s.xi}, {"beta", s.beta}, {"slope", s.slope}});
  j["beta_sites"] = beta_sites;
  j["boundary_system_size"] = model.d + model.cp.l();
  j["d"] = model.d;
  j["l"] = model.cp.l();
  j["c0_singular"] = rep.c0_singular;
  j["c0_sigma_min"] = rep.c0_sigma_min;
  j["c0_sigma_max"] = rep.c0_sigma_max;
  j["derivative_order"] = rep.derivative_order;
  j["t_in_column_space"] = rep.t_in_column_space;
  j["w_slope"] = rep.w_slope;
  j["w_capped"] = rep.w_capped;
  j["g"] = rep.g();
  j["m"] = rep.m();
  std::vector<double> t(model.t_c.data(), model.t_c.data() + model.t_c.size());
  j["t_c"] = t;
  return j.dump(2);
}

}  // namespace wavelab
