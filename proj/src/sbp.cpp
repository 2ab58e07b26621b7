#include "wavelab/sbp.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include <zlib.h>

namespace wavelab {

namespace detail {
extern const std::string_view kSbpTableOrder2;
extern const std::string_view kSbpTableOrder4;
extern const std::string_view kSbpTableOrder6;
}  // namespace detail

Grid1D Grid1D::unit(int n) {
  if (n < 2) throw std::invalid_argument("Grid1D::unit: need at least 2 points");
  return Grid1D{n, 1.0 / (n - 1)};
}

std::vector<double> Grid1D::points() const {
  std::vector<double> xs(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) xs[static_cast<std::size_t>(i)] = x(i);
  return xs;
}

namespace {

[[noreturn]] void table_error(std::string_view source, int line, const std::string& what) {
  std::ostringstream os;
  os << source << ":" << line << ": " << what;
  throw std::runtime_error(os.str());
}

double parse_rational(std::string_view tok, std::string_view source, int line) {
  auto parse_int = [&](std::string_view s) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
      table_error(source, line, "bad number '" + std::string(tok) + "'");
    }
    return v;
  };
  const auto slash = tok.find('/');
  if (slash == std::string_view::npos) return static_cast<double>(parse_int(tok));
  const long long num = parse_int(tok.substr(0, slash));
  const long long den = parse_int(tok.substr(slash + 1));
  if (den == 0) table_error(source, line, "zero denominator");
  return static_cast<double>(num) / static_cast<double>(den);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    const std::size_t j = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
    if (i > j) out.push_back(s.substr(j, i - j));
  }
  return out;
}

}  // namespace

SbpTable parse_sbp_table(std::string_view text, std::string_view source) {
  SbpTable t;
  bool have_format = false;
  bool have_crc = false;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t eol = text.find('\n', pos);
    const std::size_t end = eol == std::string_view::npos ? text.size() : eol;
    const std::string_view line = text.substr(pos, end - pos);
    ++line_no;
    const auto toks = split_ws(line);
    if (toks.empty() || toks[0].starts_with("#")) {
      pos = end + 1;
      continue;
    }
    if (have_crc) table_error(source, line_no, "content after crc32 line");
    const std::string_view key = toks[0];
    auto values = [&]() {
      std::vector<double> v;
      for (std::size_t k = 1; k < toks.size(); ++k) v.push_back(parse_rational(toks[k], source, line_no));
      return v;
    };
    auto single_int = [&]() {
      if (toks.size() != 2) table_error(source, line_no, "expected one value for " + std::string(key));
      return static_cast<int>(parse_rational(toks[1], source, line_no));
    };
    if (key == "format") {
      if (toks.size() != 3 || toks[1] != "wavelab-sbp-d2" || toks[2] != "1") {
        table_error(source, line_no, "unsupported format line");
      }
      have_format = true;
    } else if (key == "order") {
      t.order = single_int();
    } else if (key == "closure_rows") {
      t.closure_rows = single_int();
    } else if (key == "closure_cols") {
      t.closure_cols = single_int();
    } else if (key == "h_diag") {
      t.h_diag = values();
    } else if (key == "m_row") {
      auto row = values();
      if (static_cast<int>(row.size()) != t.closure_cols) {
        table_error(source, line_no, "m_row length differs from closure_cols");
      }
      t.m_rows.insert(t.m_rows.end(), row.begin(), row.end());
    } else if (key == "s_row") {
      t.s_row = values();
    } else if (key == "interior") {
      t.interior = values();
    } else if (key == "crc32") {
      if (toks.size() != 2) table_error(source, line_no, "malformed crc32 line");
      const std::string_view body = text.substr(0, pos);
      const auto crc = ::crc32(0L, reinterpret_cast<const Bytef*>(body.data()),
                               static_cast<uInt>(body.size()));
      unsigned long expected = 0;
      auto [ptr, ec] = std::from_chars(toks[1].data(), toks[1].data() + toks[1].size(), expected, 16);
      if (ec != std::errc{} || expected != crc) {
        std::ostringstream os;
        os << "checksum mismatch (file says " << toks[1] << ", content hashes to " << std::hex << crc
           << ")";
        table_error(source, line_no, os.str());
      }
      have_crc = true;
    } else {
      table_error(source, line_no, "unknown key '" + std::string(key) + "'");
    }
    pos = end + 1;
  }
  if (!have_format) table_error(source, line_no, "missing format line");
  if (!have_crc) table_error(source, line_no, "missing crc32 line");
  if (t.order <= 0 || t.closure_rows <= 0 || t.closure_cols <= 0 ||
      static_cast<int>(t.h_diag.size()) != t.closure_rows ||
      static_cast<int>(t.m_rows.size()) != t.closure_rows * t.closure_cols ||
      static_cast<int>(t.interior.size()) != t.order + 1 || t.s_row.empty()) {
    table_error(source, line_no, "incomplete or inconsistent table");
  }
  return t;
}

SbpTable load_sbp_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open SBP table " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_sbp_table(buf.str(), path.string());
}

std::string_view builtin_sbp_table_text(int order) {
  switch (order) {
    case 2:
      return detail::kSbpTableOrder2;
    case 4:
      return detail::kSbpTableOrder4;
    case 6:
      return detail::kSbpTableOrder6;
    default:
      throw std::invalid_argument("unsupported SBP order " + std::to_string(order) +
                                  " (supported: 2, 4, 6)");
  }
}

const SbpTable& builtin_sbp_table(int order) {
  static std::mutex mu;
  static std::map<int, SbpTable> cache;
  const std::string_view text = builtin_sbp_table_text(order);
  std::lock_guard lock(mu);
  auto it = cache.find(order);
  if (it == cache.end()) {
    it = cache.emplace(order, parse_sbp_table(text, "builtin order " + std::to_string(order))).first;
  }
  return it->second;
}

int SbpD2Operator::min_size(int order) {
  return 2 * builtin_sbp_table(order).closure_rows + 1;
}

SbpD2Operator::SbpD2Operator(const SbpTable& table, int n, double h)
    : table_(table), n_(n), h_(h) {
  const int rows = table_.closure_rows;
  const int cols = table_.closure_cols;
  if (n_ < 2 * rows + 1 || n_ < cols) {
    throw std::invalid_argument("SBP order " + std::to_string(table_.order) + " needs n >= " +
                                std::to_string(std::max(2 * rows + 1, cols)) + ", got " +
                                std::to_string(n_));
  }
  if (!(h_ > 0.0)) throw std::invalid_argument("SBP operator: h must be positive");

  h_diag_.assign(static_cast<std::size_t>(n_), h_);
  for (int i = 0; i < rows; ++i) {
    h_diag_[static_cast<std::size_t>(i)] = table_.h_diag[static_cast<std::size_t>(i)] * h_;
    h_diag_[static_cast<std::size_t>(n_ - 1 - i)] = table_.h_diag[static_cast<std::size_t>(i)] * h_;
  }

  // D = H^-1 (-M + B S) on the closure rows, grid units; the right block is
  // the reflection of the left one.
  std::vector<double> block(static_cast<std::size_t>(rows * cols), 0.0);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      double v = -table_.m_rows[static_cast<std::size_t>(i * cols + j)];
      if (i == 0 && j < s_width()) v -= table_.s_row[static_cast<std::size_t>(j)];
      block[static_cast<std::size_t>(i * cols + j)] = v / table_.h_diag[static_cast<std::size_t>(i)];
    }
  }
  d_ = StencilMatrix(n_, rows, cols, block, block, table_.interior, 1.0 / (h_ * h_));
}

std::vector<double> SbpD2Operator::s_first() const {
  std::vector<double> s(table_.s_row);
  for (double& v : s) v /= h_;
  return s;
}

std::vector<double> SbpD2Operator::s_last() const {
  const int w = s_width();
  std::vector<double> s(static_cast<std::size_t>(w));
  for (int j = 0; j < w; ++j) s[static_cast<std::size_t>(w - 1 - j)] = -table_.s_row[static_cast<std::size_t>(j)] / h_;
  return s;
}

Eigen::MatrixXd SbpD2Operator::dense_h() const {
  return Eigen::Map<const Eigen::VectorXd>(h_diag_.data(), n_).asDiagonal();
}

Eigen::MatrixXd SbpD2Operator::dense_m() const {
  const int rows = table_.closure_rows;
  const int cols = table_.closure_cols;
  const int l = p();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n_, n_);
  for (int i = rows; i < n_ - rows; ++i) {
    for (int k = 0; k <= 2 * l; ++k) m(i, i - l + k) = -table_.interior[static_cast<std::size_t>(k)] / h_;
  }
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const double v = table_.m_rows[static_cast<std::size_t>(i * cols + j)] / h_;
      m(i, j) = v;
      m(n_ - 1 - i, n_ - 1 - j) = v;
    }
  }
  return m;
}

Eigen::MatrixXd SbpD2Operator::dense_bs() const {
  Eigen::MatrixXd bs = Eigen::MatrixXd::Zero(n_, n_);
  const auto sf = s_first();
  const auto sl = s_last();
  const int w = s_width();
  for (int j = 0; j < w; ++j) {
    bs(0, j) = -sf[static_cast<std::size_t>(j)];
    bs(n_ - 1, n_ - w + j) = sl[static_cast<std::size_t>(j)];
  }
  return bs;
}

SbpD2Operator build_sbp_d2(int order, int n, double h) {
  return SbpD2Operator(builtin_sbp_table(order), n, h);
}

SbpD2Operator build_sbp_d2(int order, const Grid1D& grid) { return build_sbp_d2(order, grid.n, grid.h); }

std::vector<double> apply_d2(const SbpD2Operator& op, std::span<const double> v) {
  std::vector<double> out(static_cast<std::size_t>(op.n()));
  op.d().apply(v, out);
  return out;
}

bool SbpPropertyReport::exact() const {
  const int p = order / 2;
  for (const auto& row : exactness) {
    if (row.degree <= 2 * p + 1 && row.interior_residual > exact_tol) return false;
    if (row.degree <= p + 1 && row.boundary_residual > exact_tol) return false;
  }
  return s_first_residual <= exact_tol;
}

bool SbpPropertyReport::passed() const {
  return h_positive() && symmetric() && semidefinite() && b_pattern_ok &&
         decomposition_residual <= 1e-12 && exact();
}

SbpPropertyReport verify_sbp_properties(const SbpD2Operator& op) {
  return verify_sbp_properties(op, op.dense_m());
}

SbpPropertyReport verify_sbp_properties(const SbpD2Operator& op, const Eigen::MatrixXd& m) {
  SbpPropertyReport r;
  r.order = op.order();
  r.n = op.n();
  for (double hv : op.h_diag()) {
    if (!(hv > 0.0)) ++r.nonpositive_h;
  }
  r.m_asymmetry = (m - m.transpose()).cwiseAbs().maxCoeff();
  r.m_max = m.cwiseAbs().maxCoeff();
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  r.m_eigmin = es.eigenvalues().minCoeff();
  r.m_norm2 = es.eigenvalues().cwiseAbs().maxCoeff();

  // B must be diag(-1, 0, ..., 0, 1): only the first and last rows of BS are populated.
  const Eigen::MatrixXd bs = op.dense_bs();
  {
    const auto sf = op.s_first();
    const auto sl = op.s_last();
    const int w = op.s_width();
    bool ok = bs.middleRows(1, op.n() - 2).cwiseAbs().maxCoeff() == 0.0;
    for (int j = 0; j < op.n(); ++j) {
      const double first = j < w ? -sf[static_cast<std::size_t>(j)] : 0.0;
      const double last = j >= op.n() - w ? sl[static_cast<std::size_t>(j - (op.n() - w))] : 0.0;
      ok = ok && bs(0, j) == first && bs(op.n() - 1, j) == last;
    }
    r.b_pattern_ok = ok;
  }
  const Eigen::MatrixXd recon = op.dense_h().diagonal().cwiseInverse().asDiagonal() * (-m + bs);
  r.decomposition_residual = (recon - op.dense_d()).cwiseAbs().maxCoeff() /
                             std::max(1.0, op.dense_d().cwiseAbs().maxCoeff());

  const int p = op.p();
  const int n = op.n();
  const double h = op.h();
  const double x_max = (n - 1) * h;
  const int rows = op.closure_rows();
  std::vector<double> f(static_cast<std::size_t>(n));
  std::vector<double> df(static_cast<std::size_t>(n));
  for (int k = 0; k <= 2 * p + 2; ++k) {
    for (int i = 0; i < n; ++i) f[static_cast<std::size_t>(i)] = std::pow(i * h, k);
    op.d().apply(f, df);
    const double scale = k >= 2 ? k * (k - 1) * std::pow(x_max, k - 2) : 1.0;
    ExactnessRow row{k, 0.0, 0.0};
    for (int i = 0; i < n; ++i) {
      const double exact = k >= 2 ? k * (k - 1) * std::pow(i * h, k - 2) : 0.0;
      const double res = std::abs(df[static_cast<std::size_t>(i)] - exact) / scale;
      const bool boundary = i < rows || i >= n - rows;
      double& slot = boundary ? row.boundary_residual : row.interior_residual;
      slot = std::max(slot, res);
    }
    r.exactness.push_back(row);
  }

  const auto sf = op.s_first();
  for (int k = 0; k <= p; ++k) {
    double acc = 0.0;
    for (std::size_t j = 0; j < sf.size(); ++j) acc += sf[j] * std::pow(static_cast<double>(j) * h, k);
    const double exact = k == 1 ? 1.0 : 0.0;
    r.s_first_residual = std::max(r.s_first_residual, std::abs(acc - exact));
  }
  return r;
}

}  // namespace wavelab
