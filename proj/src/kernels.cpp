#include "ksapprox/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "ksapprox/detail/gauss_legendre.hpp"
#include "ksapprox/error.hpp"
#include "ksapprox/special.hpp"

namespace ksapprox {

namespace {

void require_hurst(double H, const char* where) {
  if (!(H > 0.0 && H < 2.0)) {
    std::ostringstream msg;
    msg << where << ": H must lie in (0, 2), got " << H;
    throw std::invalid_argument(msg.str());
  }
}

// Integral over v in (0, 1) of v^{-p} (1 - (1 + r v^p)^{-b}). The integrand
// switches from ~ b r to ~ v^{-p} around v0 = r^{-1/p}; the part above v0 is
// integrated in log v so that very small s/t ratios stay cheap.
double fbm_inner_integral(double H, double ratio, double quad_tol) {
  const double b = 0.5 * (1.0 - H);
  const double p = 2.0 / (H + 1.0);
  auto h = [&](double v) {
    if (v <= 0.0) return b * ratio;
    const double vp = std::pow(v, p);
    return -std::expm1(-b * std::log1p(ratio * vp)) / vp;
  };
  std::uint64_t nodes = 0;
  const double v0 = std::min(1.0, std::pow(ratio, -1.0 / p));
  double total = 0.0;
  if (v0 > 0.0) total += detail::adaptive_gl15(h, 0.0, v0, quad_tol, 1e-300, nodes).value;
  if (v0 < 1.0) {
    const double span = -std::log(v0);
    auto in_log = [&](double y) {
      const double v = v0 * std::exp(y);
      return h(v) * v;
    };
    total += detail::adaptive_gl15(in_log, 0.0, span, quad_tol, 1e-300, nodes).value;
  }
  return total;
}

}  // namespace

double d_h(double H) {
  require_hurst(H, "d_h");
  const double num = H * gamma_fn(0.5 * (3.0 - H));
  const double den = gamma_fn(0.5 * (H + 1.0)) * gamma_fn(2.0 - H);
  return std::sqrt(num / den);
}

double fbm_kernel_gap(double H, double s, double gap, double quad_tol) {
  require_hurst(H, "fbm_kernel");
  if (s < 0.0) throw std::invalid_argument("fbm_kernel: s must be non-negative");
  if (!(gap > 0.0)) {
    if (gap == 0.0 && H < 1.0) throw SingularPoint("fbm_kernel: kernel diverges at s = t for H < 1");
    return 0.0;
  }
  if (H == 1.0) return 1.0;
  if (s == 0.0) throw SingularPoint("fbm_kernel: kernel diverges at s = 0 for H != 1");
  const double b = 0.5 * (1.0 - H);
  const double p = 2.0 / (H + 1.0);
  const double inner = fbm_inner_integral(H, gap / s, quad_tol);
  return d_h(H) * std::pow(gap, -b) * (1.0 + b * p * inner);
}

double fbm_kernel(double H, double t, double s, double quad_tol) {
  require_hurst(H, "fbm_kernel");
  if (t < 0.0 || s < 0.0) throw std::invalid_argument("fbm_kernel: times must be non-negative");
  if (s > t) return 0.0;
  if (s == t) {
    if (H < 1.0 && t > 0.0) throw SingularPoint("fbm_kernel: kernel diverges at s = t for H < 1");
    return 0.0;
  }
  return fbm_kernel_gap(H, s, t - s, quad_tol);
}

double lei_nualart_kernel(double H, double t, double r) {
  require_hurst(H, "lei_nualart_kernel");
  if (r < 0.0) throw std::invalid_argument("lei_nualart_kernel: r must be non-negative");
  if (t < 0.0) throw std::invalid_argument("lei_nualart_kernel: t must be non-negative");
  if (t == 0.0) return 0.0;
  if (r == 0.0) {
    // (1 - e^{-rt}) r^{-(1+H)/2} ~ t r^{(1-H)/2}
    if (H < 1.0) return 0.0;
    if (H == 1.0) return t;
    throw SingularPoint("lei_nualart_kernel: kernel diverges at r = 0 for H > 1");
  }
  return -std::expm1(-r * t) * std::pow(r, -0.5 * (1.0 + H));
}

double lei_nualart_variance(double H, double t) {
  require_hurst(H, "lei_nualart_variance");
  if (H == 1.0) return 2.0 * std::numbers::ln2 * t;
  return cov({CovKind::lei_nualart_x, H}, t, t);
}

std::string to_string(CovKind kind) {
  switch (kind) {
    case CovKind::fbm: return "fbm";
    case CovKind::sub_fbm: return "sub-fbm";
    case CovKind::lei_nualart_x: return "lei-nualart";
  }
  return "unknown";
}

double cov(const CovModel& model, double t, double s) {
  const double H = model.H;
  require_hurst(H, "cov");
  if (t < 0.0 || s < 0.0) throw std::invalid_argument("cov: times must be non-negative");
  if (t > s) std::swap(t, s);  // bit-exact symmetry
  const double th = std::pow(t, H);
  const double sh = std::pow(s, H);
  switch (model.kind) {
    case CovKind::fbm:
      return 0.5 * (th + sh - std::pow(std::abs(t - s), H));
    case CovKind::sub_fbm:
      return th + sh - 0.5 * (std::pow(t + s, H) + std::pow(std::abs(t - s), H));
    case CovKind::lei_nualart_x:
      if (H < 1.0) return gamma_fn(1.0 - H) / H * (th + sh - std::pow(t + s, H));
      if (H > 1.0) return gamma_fn(2.0 - H) / (H * (H - 1.0)) * (std::pow(t + s, H) - th - sh);
      throw UnsupportedParameter("unsupported-parameter: Lei-Nualart covariance has no closed form at H = 1");
  }
  throw std::invalid_argument("cov: unknown model");
}

double decomposition_constant(double H, DecompositionRegime regime) {
  switch (regime) {
    case DecompositionRegime::sub_from_fbm:
      if (!(H > 0.0 && H < 1.0)) throw std::invalid_argument("decomposition_constant: C1 needs H in (0, 1)");
      return std::sqrt(H / (2.0 * gamma_fn(1.0 - H)));
    case DecompositionRegime::fbm_from_sub:
      if (!(H > 1.0 && H < 2.0)) throw std::invalid_argument("decomposition_constant: C2 needs H in (1, 2)");
      return std::sqrt(H * (H - 1.0) / (2.0 * gamma_fn(2.0 - H)));
  }
  throw std::invalid_argument("decomposition_constant: unknown regime");
}

ThetaReport validate_theta(double theta, double H, double margin) {
  ThetaReport report;
  constexpr double pi = std::numbers::pi;
  if (!std::isfinite(theta) || theta <= margin || theta >= 2.0 * pi - margin ||
      std::abs(theta - pi) <= margin) {
    report.in_range = false;
    report.admissible = false;
    report.reason = "theta must lie in (0, pi) U (pi, 2 pi)";
  }
  if (!(H > 0.0 && H < 2.0)) {
    report.admissible = false;
    if (!report.reason.empty()) report.reason += "; ";
    report.reason += "H must lie in (0, 2)";
    return report;
  }
  if (H <= 0.5) {
    const auto upper = static_cast<long>(std::floor(std::floor(1.0 / H) / 2.0));
    for (long i = 0; i <= upper; ++i) {
      if (std::abs(std::cos((2.0 * static_cast<double>(i) + 1.0) * theta) - 1.0) <= margin) {
        report.violated_indices.push_back(static_cast<int>(i));
      }
    }
    if (!report.violated_indices.empty()) {
      report.admissible = false;
      std::ostringstream msg;
      msg << "cos((2i+1) theta) = 1 for i =";
      for (int i : report.violated_indices) msg << ' ' << i;
      if (!report.reason.empty()) report.reason += "; ";
      report.reason += msg.str();
    }
  }
  return report;
}

Theta::Theta(double radians, double margin) : value_(radians) {
  const auto report = validate_theta(radians, 1.0, margin);
  if (!report.in_range) throw std::invalid_argument("theta: " + report.reason);
}

double Theta::one_minus_cos() const { return 1.0 - std::cos(value_); }

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::fbm_volterra: return "fbm";
    case KernelKind::lei_nualart: return "lei-nualart";
    case KernelKind::tabulated: return "tabulated";
  }
  return "unknown";
}

KernelSpec KernelSpec::fbm_volterra(double H, double quad_tol) {
  require_hurst(H, "KernelSpec::fbm_volterra");
  if (!(quad_tol > 0.0)) throw std::invalid_argument("KernelSpec::fbm_volterra: quad_tol must be positive");
  KernelSpec k;
  k.kind_ = KernelKind::fbm_volterra;
  k.hurst_ = H;
  k.quad_tol_ = quad_tol;
  return k;
}

KernelSpec KernelSpec::lei_nualart(double H) {
  require_hurst(H, "KernelSpec::lei_nualart");
  KernelSpec k;
  k.kind_ = KernelKind::lei_nualart;
  k.hurst_ = H;
  return k;
}

KernelSpec KernelSpec::tabulated(TabulatedTable table) {
  const auto& g = table.grid;
  if (g.size() < 2) throw std::invalid_argument("tabulated kernel: need at least two grid nodes");
  const std::size_t expected =
      table.interpolation == Interpolation::linear ? g.size() : g.size() - 1;
  if (table.values.size() != expected) {
    throw std::invalid_argument("tabulated kernel: value count does not match the grid");
  }
  if (g.front() < 0.0) throw std::invalid_argument("tabulated kernel: grid must be non-negative");
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!std::isfinite(g[i])) throw std::invalid_argument("tabulated kernel: non-finite grid node");
    if (i > 0 && !(g[i] > g[i - 1])) throw std::invalid_argument("tabulated kernel: grid must be strictly increasing");
  }
  for (double v : table.values) {
    if (!std::isfinite(v)) throw std::invalid_argument("tabulated kernel: non-finite value");
  }
  KernelSpec k;
  k.kind_ = KernelKind::tabulated;
  k.hurst_ = std::numeric_limits<double>::quiet_NaN();
  k.table_ = std::move(table);
  return k;
}

double KernelSpec::operator()(double t, double s) const { return evaluate_with_gap(t, s, t - s); }

double KernelSpec::evaluate_with_gap(double t, double s, double gap) const {
  switch (kind_) {
    case KernelKind::fbm_volterra:
      if (t <= 0.0 || s > t) return 0.0;
      if (s == 0.0 && gap > 0.0 && hurst_ != 1.0) {
        throw SingularPoint("fbm_kernel: kernel diverges at s = 0 for H != 1");
      }
      return fbm_kernel_gap(hurst_, s, gap, quad_tol_);
    case KernelKind::lei_nualart:
      return lei_nualart_kernel(hurst_, t, s);
    case KernelKind::tabulated: {
      const auto& g = table_.grid;
      const auto& v = table_.values;
      if (table_.gate_at_t && s > t) return 0.0;
      if (s < g.front() || s > g.back()) return 0.0;
      auto it = std::upper_bound(g.begin(), g.end(), s);
      std::size_t i = static_cast<std::size_t>(it - g.begin());
      i = (i == 0) ? 0 : i - 1;
      if (table_.interpolation == Interpolation::step) return v[std::min(i, v.size() - 1)];
      if (i >= g.size() - 1) return v.back();
      const double w = (s - g[i]) / (g[i + 1] - g[i]);
      return v[i] + w * (v[i + 1] - v[i]);
    }
  }
  return 0.0;
}

double KernelSpec::support_end(double t) const {
  switch (kind_) {
    case KernelKind::fbm_volterra: return std::max(t, 0.0);
    case KernelKind::lei_nualart: return std::numeric_limits<double>::infinity();
    case KernelKind::tabulated:
      return table_.gate_at_t ? std::clamp(t, 0.0, table_.grid.back()) : table_.grid.back();
  }
  return 0.0;
}

std::vector<double> KernelSpec::breakpoints(double t, double lo, double hi) const {
  std::vector<double> out;
  auto add = [&](double x) {
    if (x > lo && x < hi) out.push_back(x);
  };
  switch (kind_) {
    case KernelKind::fbm_volterra: add(t); break;
    case KernelKind::lei_nualart: break;
    case KernelKind::tabulated: {
      const auto& g = table_.grid;
      auto it = std::upper_bound(g.begin(), g.end(), lo);
      for (; it != g.end() && *it < hi; ++it) out.push_back(*it);
      if (table_.gate_at_t) add(t);
      std::sort(out.begin(), out.end());
      out.erase(std::unique(out.begin(), out.end()), out.end());
      break;
    }
  }
  return out;
}

double KernelSpec::exponent_at_zero() const {
  switch (kind_) {
    case KernelKind::fbm_volterra: return 0.5 * std::abs(1.0 - hurst_);
    case KernelKind::lei_nualart: return 0.5 * (hurst_ - 1.0);
    case KernelKind::tabulated: return 0.0;
  }
  return 0.0;
}

double KernelSpec::exponent_at_t() const {
  return kind_ == KernelKind::fbm_volterra ? 0.5 * (1.0 - hurst_) : 0.0;
}

double KernelSpec::admissibility_h() const {
  return kind_ == KernelKind::tabulated ? 1.0 : hurst_;
}

std::string KernelSpec::describe() const {
  std::ostringstream out;
  out.precision(17);
  switch (kind_) {
    case KernelKind::fbm_volterra: out << "fbm(H=" << hurst_ << ")"; break;
    case KernelKind::lei_nualart: out << "lei-nualart(H=" << hurst_ << ")"; break;
    case KernelKind::tabulated:
      out << "tabulated(" << table_.grid.size() << " nodes, "
          << (table_.interpolation == Interpolation::linear ? "linear" : "step")
          << (table_.gate_at_t ? ", gated" : "") << ")";
      break;
  }
  return out.str();
}

}  // namespace ksapprox
