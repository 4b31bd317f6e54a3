#include "ksapprox/ks_transform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "ksapprox/detail/gauss_legendre.hpp"
#include "ksapprox/error.hpp"
#include "ksapprox/kernel_primitives.hpp"

namespace ksapprox {

std::string to_string(Channel channel) { return channel == Channel::cos ? "cos" : "sin"; }

double truncation_radius_for(const KernelSpec& kernel, const Theta& theta, double tail_tol,
                             double horizon_time) {
  if (!(tail_tol > 0.0) || !std::isfinite(tail_tol)) {
    throw std::invalid_argument("truncation_radius_for: tail_tol must be positive");
  }
  if (kernel.kind() != KernelKind::lei_nualart) return kernel.support_end(horizon_time);
  const double H = kernel.hurst();
  return std::pow(4.0 / (H * theta.one_minus_cos() * tail_tol * tail_tol), 1.0 / H);
}

double default_tail_tol(double H, double horizon_time) {
  if (!(horizon_time > 0.0)) throw std::invalid_argument("default_tail_tol: horizon time must be positive");
  return 0.05 * std::sqrt(lei_nualart_variance(H, horizon_time));
}

namespace {

std::shared_ptr<const FbmPrimitive> fbm_primitive_for(double H, double tol) {
  static std::mutex mutex;
  static std::map<std::pair<double, double>, std::shared_ptr<const FbmPrimitive>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{H, tol}];
  if (!slot) slot = std::make_shared<const FbmPrimitive>(H, tol);
  return slot;
}

// cos/sin(theta k) for k = 0, 1, 2, ... by rotation, resynchronised with
// the library functions every 64 steps.
class PhaseRotor {
 public:
  explicit PhaseRotor(double theta) : theta_(theta), step_c_(std::cos(theta)), step_s_(std::sin(theta)) {}

  void advance_to(std::uint64_t k) {
    if (k == k_) return;
    if (k == k_ + 1 && (k & 63U) != 0) {
      const double c = c_ * step_c_ - s_ * step_s_;
      s_ = s_ * step_c_ + c_ * step_s_;
      c_ = c;
    } else {
      const double angle = theta_ * static_cast<double>(k);
      c_ = std::cos(angle);
      s_ = std::sin(angle);
    }
    k_ = k;
  }
  double cos() const { return c_; }
  double sin() const { return s_; }

 private:
  double theta_;
  double step_c_;
  double step_s_;
  std::uint64_t k_ = 0;
  double c_ = 1.0;
  double s_ = 0.0;
};

struct GridPoint {
  std::size_t index;
  double t;
};

std::vector<GridPoint> positive_points(const std::vector<double>& grid) {
  std::vector<GridPoint> pts;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] > 0.0) pts.push_back({i, grid[i]});
  }
  return pts;
}

class BudgetedPass : public detail::TransformPass {
 public:
  BudgetedPass(std::size_t grid_size, double scale, std::uint64_t budget)
      : cos_(grid_size, 0.0), sin_(grid_size, 0.0), scale_(scale), budget_(budget) {}

  void finish(std::span<double> cos_out, std::span<double> sin_out) override {
    finalize();
    for (std::size_t i = 0; i < cos_.size(); ++i) {
      cos_out[i] = scale_ * cos_[i];
      sin_out[i] = scale_ * sin_[i];
    }
  }

 protected:
  virtual void finalize() {}

  void charge(std::uint64_t nodes, std::size_t grid_index) {
    nodes_ += nodes;
    if (nodes_ > budget_) {
      std::vector<double> c(cos_.size());
      std::vector<double> s(sin_.size());
      for (std::size_t i = 0; i < c.size(); ++i) {
        c[i] = scale_ * cos_[i];
        s[i] = scale_ * sin_[i];
      }
      std::ostringstream msg;
      msg << "node budget of " << budget_ << " exhausted after " << segments_ << " segments";
      throw BudgetExceeded(msg.str(), grid_index, segments_, std::move(c), std::move(s));
    }
  }

  std::vector<double> cos_;
  std::vector<double> sin_;
  double scale_;
  std::uint64_t budget_;
  std::uint64_t nodes_ = 0;
  std::size_t segments_ = 0;
};

// int_0^s K(t, r) dr = t^{(H+1)/2} L(s/t): one table lookup per segment and
// grid time.
class FbmPass final : public BudgetedPass {
 public:
  FbmPass(const FbmPrimitive& prim, const std::vector<double>& grid, double scale, std::uint64_t budget)
      : BudgetedPass(grid.size(), scale, budget), prim_(prim) {
    points_ = positive_points(grid);
    std::sort(points_.begin(), points_.end(), [](const GridPoint& a, const GridPoint& b) { return a.t < b.t; });
    const double full = prim.profile_integral(1.0);
    const double exponent = 0.5 * (prim.hurst() + 1.0);
    for (const auto& p : points_) {
      const double tp = std::pow(p.t, exponent);
      t_power_.push_back(tp);
      full_.push_back(tp * full);
    }
    prev_.assign(points_.size(), 0.0);
  }

  void consume(const Segment& seg, double c, double s) override {
    while (first_ < points_.size() && points_[first_].t <= seg.lo) ++first_;
    for (std::size_t j = first_; j < points_.size(); ++j) {
      const double t = points_[j].t;
      const double F = seg.hi >= t ? full_[j] : t_power_[j] * prim_.profile_integral(seg.hi / t);
      const double d = F - prev_[j];
      prev_[j] = F;
      cos_[points_[j].index] += c * d;
      sin_[points_[j].index] += s * d;
    }
    ++segments_;
    charge(points_.size() - first_, first_ < points_.size() ? points_[first_].index : 0);
  }

 private:
  const FbmPrimitive& prim_;
  std::vector<GridPoint> points_;
  std::vector<double> t_power_;
  std::vector<double> full_;
  std::vector<double> prev_;
  std::size_t first_ = 0;
};

// Lei-Nualart antiderivative. Past s t = kTailCut the increments of
// int_0^s f(t, r) dr no longer depend on t, so all grid times share one
// running tail sum A; a time entering the tail records A at its crossover
// and finally adds A_end - A_record.
class LeiNualartPass final : public BudgetedPass {
 public:
  LeiNualartPass(const LeiNualartPrimitive& prim, const std::vector<double>& grid, double scale,
                 std::uint64_t budget)
      : BudgetedPass(grid.size(), scale, budget), prim_(prim) {
    points_ = positive_points(grid);
    std::sort(points_.begin(), points_.end(), [](const GridPoint& a, const GridPoint& b) { return a.t > b.t; });
    const double c = 0.5 * (1.0 - prim.hurst());
    for (const auto& p : points_) {
      crossover_.push_back(LeiNualartPrimitive::kTailCut / p.t);
      t_power_.push_back(std::pow(p.t, -c));
    }
    base_ = crossover_.empty() ? std::numeric_limits<double>::infinity() : crossover_.front();
    const std::size_t n = points_.size();
    prev_.assign(n, 0.0);
    record_cos_.assign(n, 0.0);
    record_sin_.assign(n, 0.0);
  }

  void consume(const Segment& seg, double c, double s) override {
    std::uint64_t evaluations = 0;
    for (std::size_t j = next_tail_; j < points_.size(); ++j) {
      const double hi = std::min(seg.hi, crossover_[j]);
      const double F = t_power_[j] * prim_.psi(points_[j].t * hi);
      const double d = F - prev_[j];
      prev_[j] = F;
      cos_[points_[j].index] += c * d;
      sin_[points_[j].index] += s * d;
      ++evaluations;
    }
    if (seg.hi > base_) {
      const double lo = std::max(seg.lo, base_);
      const double p_lo = (lo == tail_at_) ? tail_value_ : prim_.power_tail(lo);
      while (next_tail_ < points_.size() && crossover_[next_tail_] < seg.hi) {
        const double pc = prim_.power_tail(crossover_[next_tail_]);
        record_cos_[next_tail_] = tail_cos_ + c * (pc - p_lo);
        record_sin_[next_tail_] = tail_sin_ + s * (pc - p_lo);
        ++next_tail_;
      }
      const double p_hi = prim_.power_tail(seg.hi);
      tail_cos_ += c * (p_hi - p_lo);
      tail_sin_ += s * (p_hi - p_lo);
      tail_at_ = seg.hi;
      tail_value_ = p_hi;
      ++evaluations;
    }
    ++segments_;
    charge(evaluations, next_tail_ < points_.size() ? points_[next_tail_].index : 0);
  }

 protected:
  void finalize() override {
    for (std::size_t j = 0; j < next_tail_; ++j) {
      cos_[points_[j].index] += tail_cos_ - record_cos_[j];
      sin_[points_[j].index] += tail_sin_ - record_sin_[j];
    }
    next_tail_ = 0;  // finalize once
    points_.clear();
  }

 private:
  const LeiNualartPrimitive& prim_;
  std::vector<GridPoint> points_;  // descending t, ascending crossover
  std::vector<double> crossover_;
  std::vector<double> t_power_;
  std::vector<double> prev_;
  std::vector<double> record_cos_;
  std::vector<double> record_sin_;
  double base_;
  double tail_cos_ = 0.0;
  double tail_sin_ = 0.0;
  double tail_at_ = -1.0;
  double tail_value_ = 0.0;
  std::size_t next_tail_ = 0;
};

// Adaptive Gauss-Legendre per segment, split at kernel breakpoints, with the
// endpoint substitution wherever the kernel is singular (s = 0, s = t).
class QuadraturePass final : public BudgetedPass {
 public:
  QuadraturePass(const KernelSpec& kernel, const std::vector<double>& grid, double s_max, double quad_tol,
                 double scale, std::uint64_t budget)
      : BudgetedPass(grid.size(), scale, budget), kernel_(kernel), quad_tol_(quad_tol) {
    for (const auto& p : positive_points(grid)) {
      const double end = std::min(kernel.support_end(p.t), s_max);
      if (end > 0.0) {
        points_.push_back(p);
        end_.push_back(end);
      }
    }
  }

  void consume(const Segment& seg, double c, double s) override {
    const double zero_exp = kernel_.exponent_at_zero();
    const double t_exp = kernel_.exponent_at_t();
    for (std::size_t j = 0; j < points_.size(); ++j) {
      const double t = points_[j].t;
      const double b = std::min(seg.hi, end_[j]);
      if (!(b > seg.lo)) continue;
      std::vector<double> cuts = kernel_.breakpoints(t, seg.lo, b);
      cuts.insert(cuts.begin(), seg.lo);
      cuts.push_back(b);
      double total = 0.0;
      std::uint64_t nodes = 0;
      for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double x0 = cuts[i];
        const double x1 = cuts[i + 1];
        const bool ends_at_t = x1 == t;
        auto f = [&](double x, double, double dr) {
          return kernel_.evaluate_with_gap(t, x, ends_at_t ? dr : t - x);
        };
        const double left = x0 == 0.0 ? zero_exp : 0.0;
        const double right = ends_at_t ? t_exp : 0.0;
        total += detail::adaptive_gl15_endpoints(f, x0, x1, left, right, quad_tol_, 1e-300, nodes).value;
      }
      cos_[points_[j].index] += c * total;
      sin_[points_[j].index] += s * total;
      charge(nodes, points_[j].index);
    }
    ++segments_;
  }

 private:
  const KernelSpec& kernel_;
  double quad_tol_;
  std::vector<GridPoint> points_;
  std::vector<double> end_;
};

void drive(std::span<const Transformer* const> transformers,
           std::span<std::unique_ptr<detail::TransformPass>> passes, SegmentStream& segments) {
  PhaseRotor rotor(transformers.front()->params().theta.value());
  Segment seg{};
  while (segments.next(seg)) {
    rotor.advance_to(seg.count);
    for (std::size_t i = 0; i < passes.size(); ++i) {
      const double end = transformers[i]->s_max();
      if (seg.lo >= end) continue;
      passes[i]->consume({seg.lo, std::min(seg.hi, end), seg.count}, rotor.cos(), rotor.sin());
    }
  }
}

}  // namespace

struct Transformer::Shared {
  std::shared_ptr<const FbmPrimitive> fbm;
  std::shared_ptr<const LeiNualartPrimitive> lei_nualart;
};

Transformer::Transformer(KernelSpec kernel, std::vector<double> grid, ApproxParams params)
    : kernel_(std::move(kernel)), grid_(std::move(grid)), params_(params) {
  const double eps = params_.epsilon;
  if (!std::isfinite(eps) || eps <= 0.0) throw std::invalid_argument("epsilon must be positive");
  if (!(params_.quad_tol > 0.0 && params_.quad_tol <= 1e-2)) {
    throw std::invalid_argument("quad_tol must lie in (0, 1e-2]");
  }
  if (params_.max_nodes == 0) throw std::invalid_argument("max_nodes must be positive");
  if (grid_.empty()) throw std::invalid_argument("time grid is empty");
  for (double t : grid_) {
    if (!std::isfinite(t) || t < 0.0) throw std::invalid_argument("grid times must be finite and non-negative");
  }
  const auto report = validate_theta(params_.theta.value(), kernel_.admissibility_h());
  if (!report.admissible) throw std::invalid_argument("theta not admissible: " + report.reason);

  const double horizon_time = *std::max_element(grid_.begin(), grid_.end());
  route_ = params_.route;
  if (kernel_.kind() == KernelKind::tabulated) route_ = Route::quadrature;

  auto shared = std::make_shared<Shared>();
  if (kernel_.kind() == KernelKind::lei_nualart) {
    if (params_.truncation_radius) {
      if (!(*params_.truncation_radius > 0.0) || !std::isfinite(*params_.truncation_radius)) {
        throw std::invalid_argument("truncation radius must be positive and finite");
      }
      s_max_ = *params_.truncation_radius;
    } else if (horizon_time > 0.0) {
      const double tol = params_.tail_tol.value_or(default_tail_tol(kernel_.hurst(), horizon_time));
      s_max_ = truncation_radius_for(kernel_, params_.theta, tol, horizon_time);
    } else {
      s_max_ = 0.0;
    }
    if (route_ == Route::automatic) shared->lei_nualart = std::make_shared<LeiNualartPrimitive>(kernel_.hurst());
  } else {
    s_max_ = 0.0;
    for (double t : grid_) s_max_ = std::max(s_max_, kernel_.support_end(t));
    if (kernel_.kind() == KernelKind::fbm_volterra && route_ == Route::automatic && s_max_ > 0.0) {
      shared->fbm = fbm_primitive_for(kernel_.hurst(), kernel_.quad_tol());
    }
  }
  params_.truncation_radius = s_max_;
  shared_ = std::move(shared);

  const double events = required_horizon();
  if (events > params_.max_expected_events) {
    std::ostringstream msg;
    msg << "horizon guard: expected " << events << " Poisson events per path exceeds the ceiling of "
        << params_.max_expected_events << " (increase epsilon or the tail tolerance)";
    throw HorizonGuard(msg.str());
  }
}

Transformer::~Transformer() = default;
Transformer::Transformer(Transformer&&) noexcept = default;
Transformer& Transformer::operator=(Transformer&&) noexcept = default;

double Transformer::required_horizon() const { return 2.0 * s_max_ / (params_.epsilon * params_.epsilon); }

std::unique_ptr<detail::TransformPass> Transformer::start() const {
  const double scale = 2.0 / params_.epsilon;
  if (route_ == Route::automatic && shared_->fbm) {
    return std::make_unique<FbmPass>(*shared_->fbm, grid_, scale, params_.max_nodes);
  }
  if (route_ == Route::automatic && shared_->lei_nualart) {
    return std::make_unique<LeiNualartPass>(*shared_->lei_nualart, grid_, scale, params_.max_nodes);
  }
  return std::make_unique<QuadraturePass>(kernel_, grid_, s_max_, params_.quad_tol, scale, params_.max_nodes);
}

PathValues Transformer::package(PathTag tag, std::vector<double> c, std::vector<double> s) const {
  PathValues out;
  out.grid = grid_;
  out.cos_values = std::move(c);
  out.sin_values = std::move(s);
  out.params = params_;
  out.tag = tag;
  out.kernel_kind = kernel_.kind();
  out.hurst = kernel_.hurst();
  return out;
}

PathValues Transformer::operator()(const PoissonPath& path) const {
  std::vector<double> c(grid_.size(), 0.0);
  std::vector<double> s(grid_.size(), 0.0);
  if (s_max_ > 0.0) {
    SegmentStream segments(path, params_.epsilon, s_max_);
    const Transformer* self = this;
    transform_joint({&self, 1}, segments, {&c, 1}, {&s, 1});
  }
  return package(path.tag(), std::move(c), std::move(s));
}

PathValues Transformer::simulate(std::uint64_t seed, std::uint64_t stream) const {
  std::vector<double> c(grid_.size(), 0.0);
  std::vector<double> s(grid_.size(), 0.0);
  if (s_max_ > 0.0) {
    SegmentStream segments(seed, stream, params_.epsilon, s_max_);
    const Transformer* self = this;
    transform_joint({&self, 1}, segments, {&c, 1}, {&s, 1});
  }
  return package(PathTag{seed, stream, false}, std::move(c), std::move(s));
}

void transform_joint(std::span<const Transformer* const> transformers, SegmentStream& segments,
                     std::span<std::vector<double>> cos_out, std::span<std::vector<double>> sin_out) {
  if (transformers.empty()) return;
  if (cos_out.size() != transformers.size() || sin_out.size() != transformers.size()) {
    throw std::invalid_argument("transform_joint: one output slot per transformer required");
  }
  const auto& first = transformers.front()->params();
  double needed = 0.0;
  for (const Transformer* tr : transformers) {
    if (tr->params().epsilon != first.epsilon || tr->params().theta.value() != first.theta.value()) {
      throw InvalidCombination("transform_joint: transformers must share epsilon and theta");
    }
    needed = std::max(needed, tr->s_max());
  }
  if (segments.s_max() < needed) {
    throw std::invalid_argument("transform_joint: segment stream ends before the largest s_max");
  }
  std::vector<std::unique_ptr<detail::TransformPass>> passes;
  passes.reserve(transformers.size());
  for (const Transformer* tr : transformers) passes.push_back(tr->start());
  drive(transformers, passes, segments);
  for (std::size_t i = 0; i < passes.size(); ++i) {
    cos_out[i].assign(transformers[i]->grid().size(), 0.0);
    sin_out[i].assign(transformers[i]->grid().size(), 0.0);
    passes[i]->finish(cos_out[i], sin_out[i]);
  }
}

PathValues transform(const KernelSpec& kernel, std::span<const double> grid, const PoissonPath& path,
                     const ApproxParams& params) {
  Transformer tr(kernel, std::vector<double>(grid.begin(), grid.end()), params);
  return tr(path);
}

std::vector<double> subfbm_combine(const PathValues& x_vals, Channel x_channel, const PathValues& b_vals,
                                   Channel b_channel, double H) {
  if (!(H > 0.0 && H < 1.0)) throw std::invalid_argument("subfbm_combine: H must lie in (0, 1)");
  if (x_channel == b_channel) {
    throw InvalidCombination("subfbm_combine: the two inputs must use opposite channels");
  }
  if (!(x_vals.tag == b_vals.tag)) throw InvalidCombination("subfbm_combine: inputs come from different paths");
  if (x_vals.grid != b_vals.grid) throw InvalidCombination("subfbm_combine: grids differ");
  if (x_vals.params.epsilon != b_vals.params.epsilon ||
      x_vals.params.theta.value() != b_vals.params.theta.value()) {
    throw InvalidCombination("subfbm_combine: epsilon or theta differ");
  }
  if (x_vals.kernel_kind != KernelKind::lei_nualart || b_vals.kernel_kind != KernelKind::fbm_volterra) {
    throw InvalidCombination("subfbm_combine: expected a Lei-Nualart input and an fBm input");
  }
  if (x_vals.hurst != H || b_vals.hurst != H) throw InvalidCombination("subfbm_combine: H differs from the inputs");
  const double c1 = decomposition_constant(H, DecompositionRegime::sub_from_fbm);
  const auto x = x_vals.channel(x_channel);
  const auto b = b_vals.channel(b_channel);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = c1 * x[i] + b[i];
  return out;
}

}  // namespace ksapprox
