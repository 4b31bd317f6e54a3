#pragma once

#include <array>
#include <cstdint>

namespace ksapprox {

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers:
/// as easy as 1, 2, 3"). Stateless: the output depends only on the counter
/// and the key.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Sequential view of one Philox stream.
///
/// The key is the 64-bit seed; the upper half of the counter holds the
/// stream index and the lower half the draw position. Every uniform is a
/// pure function of (seed, stream, position), so replicas running on
/// different threads never share state and results do not depend on the
/// schedule.
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, std::uint64_t stream);

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  /// Unit-mean exponential by inversion, -log(1 - U).
  double exponential();

  /// Number of uniforms consumed so far.
  std::uint64_t position() const { return position_; }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t position_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
};

/// Random access to the same sequence CounterStream produces.
double uniform_at(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

}  // namespace ksapprox
