#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <vector>

#include "ksapprox/rng.hpp"

namespace ksapprox {

/// Where a path's randomness came from. Injected paths carry no seed.
struct PathTag {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  bool injected = false;

  friend bool operator==(const PathTag&, const PathTag&) = default;
};

/// Jump times of a unit-rate Poisson process on (0, horizon].
///
/// The counting function is right-continuous: a jump exactly at u counts
/// towards N_u.
class PoissonPath {
 public:
  /// Partial sums of unit exponentials from stream `stream` of `seed`, up to
  /// and including the last jump <= horizon.
  static PoissonPath simulate(double horizon, std::uint64_t seed, std::uint64_t stream);

  /// Test hook: jumps at the partial sums of `interarrivals` that fall in
  /// (0, horizon]. Interarrivals must be positive.
  static PoissonPath from_interarrivals(std::span<const double> interarrivals, double horizon);

  /// Test hook with explicit, strictly increasing jump times in (0, horizon].
  static PoissonPath from_jump_times(std::vector<double> jump_times, double horizon);

  std::span<const double> jump_times() const { return jumps_; }
  double horizon() const { return horizon_; }
  const PathTag& tag() const { return tag_; }

  /// N_u; throws OutOfHorizon for u > horizon.
  std::uint64_t count_at(double u) const;

 private:
  PoissonPath(std::vector<double> jumps, double horizon, PathTag tag)
      : jumps_(std::move(jumps)), horizon_(horizon), tag_(tag) {}

  std::vector<double> jumps_;
  double horizon_;
  PathTag tag_;
};

/// Interval of the s axis on which N_{2s/eps^2} equals `count`.
struct Segment {
  double lo;
  double hi;
  std::uint64_t count;

  friend bool operator==(const Segment&, const Segment&) = default;
};

/// Walks the segments of [0, s_max] in order, either over a stored path or
/// generating jumps on the fly (O(1) memory). Both sources visit identical
/// segments for the same seed and stream.
class SegmentStream {
 public:
  /// Over a stored path; throws OutOfHorizon if 2 s_max / eps^2 exceeds the
  /// path horizon.
  SegmentStream(const PoissonPath& path, double epsilon, double s_max);

  /// Streaming over (seed, stream).
  SegmentStream(std::uint64_t seed, std::uint64_t stream, double epsilon, double s_max);

  /// Next segment, or false once s_max has been reached.
  bool next(Segment& out);

  double s_max() const { return s_max_; }
  PathTag tag() const { return tag_; }

 private:
  double next_breakpoint();

  const PoissonPath* path_ = nullptr;
  std::size_t index_ = 0;
  CounterStream rng_;
  double clock_ = 0.0;  // internal time of the last generated jump (streaming)
  double scale_;        // eps^2 / 2
  double s_max_;
  double lo_ = 0.0;
  std::uint64_t count_ = 0;
  bool done_ = false;
  PathTag tag_;
};

/// All segments of [0, s_max] for a stored path.
std::vector<Segment> segment_iter(const PoissonPath& path, double epsilon, double s_max);

}  // namespace ksapprox
