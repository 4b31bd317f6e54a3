#include "ksapprox/quad_oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "ksapprox/error.hpp"

namespace ksapprox::oracle {

namespace {

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};
constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077929037744100, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Piece {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Piece& other) const { return error < other.error; }
};

template <class F>
Piece kronrod21(const F& f, double a, double b) {
  constexpr double epmach = std::numeric_limits<double>::epsilon();
  constexpr double uflow = std::numeric_limits<double>::min();
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double abs_half = std::abs(half);

  std::array<double, 10> f1{};
  std::array<double, 10> f2{};
  const double fc = f(center);
  double resg = 0.0;
  double resk = kWgk[10] * fc;
  double resabs = std::abs(resk);
  for (std::size_t j = 0; j < 5; ++j) {
    const std::size_t jtw = 2 * j + 1;
    const double dx = half * kXgk[jtw];
    const double v1 = f(center - dx);
    const double v2 = f(center + dx);
    f1[jtw] = v1;
    f2[jtw] = v2;
    resg += kWg[j] * (v1 + v2);
    resk += kWgk[jtw] * (v1 + v2);
    resabs += kWgk[jtw] * (std::abs(v1) + std::abs(v2));
  }
  for (std::size_t j = 0; j < 5; ++j) {
    const std::size_t jtwm1 = 2 * j;
    const double dx = half * kXgk[jtwm1];
    const double v1 = f(center - dx);
    const double v2 = f(center + dx);
    f1[jtwm1] = v1;
    f2[jtwm1] = v2;
    resk += kWgk[jtwm1] * (v1 + v2);
    resabs += kWgk[jtwm1] * (std::abs(v1) + std::abs(v2));
  }
  const double reskh = resk * 0.5;
  double resasc = kWgk[10] * std::abs(fc - reskh);
  for (std::size_t j = 0; j < 10; ++j) {
    resasc += kWgk[j] * (std::abs(f1[j] - reskh) + std::abs(f2[j] - reskh));
  }
  const double result = resk * half;
  resabs *= abs_half;
  resasc *= abs_half;
  double err = std::abs((resk - resg) * half);
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  if (resabs > uflow / (50.0 * epmach)) err = std::max(epmach * 50.0 * resabs, err);
  if (!std::isfinite(result)) err = std::numeric_limits<double>::infinity();
  return {a, b, result, err};
}

// A node as an anchor (a cut point) plus an offset that is exact even when
// anchor + offset rounds back onto the anchor.
struct Node {
  double r;
  double anchor;
  double offset;
};

double kernel_at(const KernelSpec& k, double t, const Node& n) {
  const double gap = n.anchor == t ? -n.offset : t - n.r;
  try {
    return k.evaluate_with_gap(t, n.r, gap);
  } catch (const SingularPoint&) {
    // only reachable when a node lands exactly on r = 0
    return 0.0;
  }
}

std::vector<double> kernel_singular_points(const KernelSpec& k, double t, double upper) {
  std::vector<double> pts;
  if (t > 0.0 && t < upper) pts.push_back(t);
  if (k.kind() == KernelKind::tabulated) {
    for (double g : k.table().grid) {
      if (g > 0.0 && g < upper) pts.push_back(g);
    }
  }
  return pts;
}

double domain_end(const KernelSpec& k, double t) { return k.support_end(t); }

double checked(const QuadResult& r, const char* what) {
  if (!r.converged) {
    std::ostringstream msg;
    msg << what << ": oracle integration did not converge (estimate " << r.value << ", error "
        << r.abs_error_estimate << ")";
    throw NonConvergence(msg.str());
  }
  return r.value;
}

}  // namespace

QuadResult integrate(const std::function<double(double)>& f, double a, double b, double tol,
                     std::span<const double> singular_points, OracleOptions options) {
  if (!(tol > 0.0)) throw std::invalid_argument("integrate: tol must be positive");
  if (std::isnan(a) || std::isnan(b) || !std::isfinite(a)) {
    throw std::invalid_argument("integrate: lower limit must be finite");
  }
  QuadResult out;
  if (b == a) {
    out.converged = true;
    return out;
  }
  if (b < a) throw std::invalid_argument("integrate: require a <= b");

  const bool infinite = std::isinf(b);
  // [a, inf) is integrated in z in [-1, 1]: r = a + z for z >= 0 and
  // r = a - 1/z below. Both r -> a and r -> inf sit at z -> 0, where doubles
  // are densest.
  std::function<double(double)> g;
  double lo = a;
  double hi = b;
  std::vector<double> cuts;
  if (infinite) {
    g = [&f, a](double z) {
      if (z >= 0.0) return f(a + z);
      const double y = -z;
      return f(a + 1.0 / y) / (y * y);
    };
    lo = -1.0;
    hi = 1.0;
    cuts.push_back(0.0);
    for (double p : singular_points) {
      if (!(p > a) || !std::isfinite(p)) continue;
      const double d = p - a;
      cuts.push_back(d <= 1.0 ? d : -1.0 / d);
    }
  } else {
    g = f;
    for (double p : singular_points) {
      if (p > a && p < b) cuts.push_back(p);
    }
  }
  cuts.push_back(lo);
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::priority_queue<Piece> active;
  double settled_value = 0.0;
  double settled_error = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    active.push(kronrod21(g, cuts[i], cuts[i + 1]));
    out.nodes_used += 21;
  }

  // priority_queue has no iteration, so the running sums are tracked
  // incrementally and refreshed from a copy now and then
  auto resum = [&](double& value, double& error) {
    value = settled_value;
    error = settled_error;
    auto copy = active;
    while (!copy.empty()) {
      value += copy.top().value;
      error += copy.top().error;
      copy.pop();
    }
  };
  double value = 0.0;
  double error = 0.0;
  resum(value, error);

  while (error > tol && !active.empty()) {
    if (out.nodes_used + 42 > options.max_nodes) break;
    Piece worst = active.top();
    active.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    // the outermost Kronrod node of a half sits 0.0043 half-widths inside;
    // once that is below the spacing of doubles it would land on an endpoint
    const double spacing = std::numeric_limits<double>::epsilon() *
                           std::max(std::abs(worst.a), std::abs(worst.b));
    if (!(mid > worst.a && mid < worst.b) || 0.5 * (mid - worst.a) * (1.0 - kXgk[0]) < spacing) {
      // cannot split further; freeze it
      settled_value += worst.value;
      settled_error += worst.error;
      continue;
    }
    const Piece left = kronrod21(g, worst.a, mid);
    const Piece right = kronrod21(g, mid, worst.b);
    out.nodes_used += 42;
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    active.push(left);
    active.push(right);
    if ((active.size() & (active.size() - 1)) == 0) resum(value, error);
  }

  double v = settled_value;
  double e = settled_error;
  while (!active.empty()) {
    v += active.top().value;
    e += active.top().error;
    active.pop();
  }
  out.value = v;
  out.abs_error_estimate = e;
  out.converged = std::isfinite(v) && e <= tol;
  return out;
}

namespace {

// Splits [0, upper] at the cuts and integrates each half-piece in its
// distance to the nearer cut, so kernels see exact gaps next to their
// singular points.
QuadResult integrate_anchored(const std::function<double(const Node&)>& h, std::vector<double> cuts,
                              double upper, double tol) {
  cuts.push_back(0.0);
  if (std::isfinite(upper)) cuts.push_back(upper);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  const std::size_t finite_pieces = cuts.size() - 1;
  const std::size_t parts = 2 * finite_pieces + (std::isfinite(upper) ? 0 : 1);
  const double part_tol = tol / static_cast<double>(parts);

  QuadResult out;
  out.converged = true;
  auto add = [&out](const QuadResult& r) {
    out.value += r.value;
    out.abs_error_estimate += r.abs_error_estimate;
    out.nodes_used += r.nodes_used;
    out.converged = out.converged && r.converged;
  };
  for (std::size_t i = 0; i < finite_pieces; ++i) {
    const double p = cuts[i];
    const double q = cuts[i + 1];
    const double half = 0.5 * (q - p);
    add(integrate([&](double u) { return h({p + u, p, u}); }, 0.0, half, part_tol));
    add(integrate([&](double u) { return h({q - u, q, -u}); }, 0.0, half, part_tol));
  }
  if (!std::isfinite(upper)) {
    const double p = cuts.back();
    add(integrate([&](double u) { return h({p + u, p, u}); }, 0.0, kInfinity, part_tol));
  }
  out.converged = out.converged && out.abs_error_estimate <= tol;
  return out;
}

}  // namespace

double kernel_inner_product(const KernelSpec& k, double t, double s, double tol) {
  return cross_inner_product(k, t, k, s, tol);
}

double cross_inner_product(const KernelSpec& f, double t, const KernelSpec& g, double s, double tol) {
  const double upper = std::min(domain_end(f, t), domain_end(g, s));
  if (!(upper > 0.0)) return 0.0;
  auto pts = kernel_singular_points(f, t, upper);
  for (double p : kernel_singular_points(g, s, upper)) pts.push_back(p);
  auto integrand = [&](const Node& n) { return kernel_at(f, t, n) * kernel_at(g, s, n); };
  return checked(integrate_anchored(integrand, pts, upper, tol), "cross_inner_product");
}

double kernel_increment_norm(const KernelSpec& k, double t, double s, double tol) {
  const double upper = std::max(domain_end(k, t), domain_end(k, s));
  if (!(upper > 0.0)) return 0.0;
  auto pts = kernel_singular_points(k, t, upper);
  for (double p : kernel_singular_points(k, s, upper)) pts.push_back(p);
  auto integrand = [&](const Node& n) {
    const double d = kernel_at(k, t, n) - kernel_at(k, s, n);
    return d * d;
  };
  return checked(integrate_anchored(integrand, pts, upper, tol), "kernel_increment_norm");
}

}  // namespace ksapprox::oracle
