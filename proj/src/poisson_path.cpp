#include "ksapprox/poisson_path.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "ksapprox/error.hpp"

namespace ksapprox {

namespace {

void check_horizon(double horizon) {
  if (!std::isfinite(horizon) || horizon <= 0.0) {
    throw std::invalid_argument("horizon must be finite and positive");
  }
}

void check_epsilon_smax(double epsilon, double s_max) {
  if (!std::isfinite(epsilon) || epsilon <= 0.0) throw std::invalid_argument("epsilon must be positive");
  if (!std::isfinite(s_max) || s_max <= 0.0) throw std::invalid_argument("s_max must be positive");
}

}  // namespace

PoissonPath PoissonPath::simulate(double horizon, std::uint64_t seed, std::uint64_t stream) {
  check_horizon(horizon);
  CounterStream rng(seed, stream);
  std::vector<double> jumps;
  jumps.reserve(static_cast<std::size_t>(std::min(horizon + 6.0 * std::sqrt(horizon) + 16.0, 1e8)));
  double u = 0.0;
  while (true) {
    u += rng.exponential();
    if (u > horizon) break;
    jumps.push_back(u);
  }
  return PoissonPath(std::move(jumps), horizon, PathTag{seed, stream, false});
}

PoissonPath PoissonPath::from_interarrivals(std::span<const double> interarrivals, double horizon) {
  check_horizon(horizon);
  std::vector<double> jumps;
  double u = 0.0;
  for (double gap : interarrivals) {
    if (!(gap > 0.0) || !std::isfinite(gap)) throw std::invalid_argument("interarrivals must be positive");
    u += gap;
    if (u > horizon) break;
    jumps.push_back(u);
  }
  return PoissonPath(std::move(jumps), horizon, PathTag{0, 0, true});
}

PoissonPath PoissonPath::from_jump_times(std::vector<double> jump_times, double horizon) {
  check_horizon(horizon);
  double prev = 0.0;
  for (double u : jump_times) {
    if (!(u > prev) || u > horizon) {
      throw std::invalid_argument("jump times must be strictly increasing in (0, horizon]");
    }
    prev = u;
  }
  return PoissonPath(std::move(jump_times), horizon, PathTag{0, 0, true});
}

std::uint64_t PoissonPath::count_at(double u) const {
  if (std::isnan(u) || u < 0.0) throw std::invalid_argument("count_at: u must be non-negative");
  if (u > horizon_) {
    std::ostringstream msg;
    msg << "count_at: u = " << u << " beyond path horizon " << horizon_;
    throw OutOfHorizon(msg.str());
  }
  return static_cast<std::uint64_t>(std::upper_bound(jumps_.begin(), jumps_.end(), u) - jumps_.begin());
}

SegmentStream::SegmentStream(const PoissonPath& path, double epsilon, double s_max)
    : path_(&path), rng_(0, 0), scale_(0.5 * epsilon * epsilon), s_max_(s_max), tag_(path.tag()) {
  check_epsilon_smax(epsilon, s_max);
  const double needed = s_max / scale_;
  if (needed > path.horizon()) {
    std::ostringstream msg;
    msg << "path horizon " << path.horizon() << " is shorter than 2 s_max / eps^2 = " << needed;
    throw OutOfHorizon(msg.str());
  }
}

SegmentStream::SegmentStream(std::uint64_t seed, std::uint64_t stream, double epsilon, double s_max)
    : rng_(seed, stream), scale_(0.5 * epsilon * epsilon), s_max_(s_max), tag_{seed, stream, false} {
  check_epsilon_smax(epsilon, s_max);
}

double SegmentStream::next_breakpoint() {
  if (path_ != nullptr) {
    const auto jumps = path_->jump_times();
    if (index_ >= jumps.size()) return std::numeric_limits<double>::infinity();
    return scale_ * jumps[index_++];
  }
  clock_ += rng_.exponential();
  return scale_ * clock_;
}

bool SegmentStream::next(Segment& out) {
  if (done_) return false;
  const double b = next_breakpoint();
  if (b >= s_max_) {
    out = {lo_, s_max_, count_};
    done_ = true;
    return true;
  }
  out = {lo_, b, count_};
  lo_ = b;
  ++count_;
  return true;
}

std::vector<Segment> segment_iter(const PoissonPath& path, double epsilon, double s_max) {
  SegmentStream stream(path, epsilon, s_max);
  std::vector<Segment> out;
  Segment seg{};
  while (stream.next(seg)) out.push_back(seg);
  return out;
}

}  // namespace ksapprox
