#include "ksapprox/rng.hpp"

#include <cmath>

namespace ksapprox {

namespace {

constexpr std::uint32_t kMulA = 0xD2511F53u;
constexpr std::uint32_t kMulB = 0xCD9E8D57u;
constexpr std::uint32_t kWeylA = 0x9E3779B9u;
constexpr std::uint32_t kWeylB = 0xBB67AE85u;

inline double to_unit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

std::array<std::uint32_t, 4> counter_for(std::uint64_t stream, std::uint64_t block) {
  return {static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
          static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
}

std::array<std::uint32_t, 2> key_for(std::uint64_t seed) {
  return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

std::array<std::uint64_t, 2> block_bits(std::uint64_t seed, std::uint64_t stream,
                                        std::uint64_t block) {
  const auto out = philox4x32(counter_for(stream, block), key_for(seed));
  return {(static_cast<std::uint64_t>(out[1]) << 32) | out[0],
          (static_cast<std::uint64_t>(out[3]) << 32) | out[2]};
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMulA) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMulB) * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
           static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
           static_cast<std::uint32_t>(p0)};
    key[0] += kWeylA;
    key[1] += kWeylB;
  }
  return ctr;
}

CounterStream::CounterStream(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream) {}

void CounterStream::refill() { buffer_ = block_bits(seed_, stream_, position_ / 2); }

double CounterStream::uniform() {
  if (position_ % 2 == 0) refill();
  const double u = to_unit(buffer_[position_ % 2]);
  ++position_;
  return u;
}

// 1 - U is exact on the 2^-53 grid, so log needs no log1p here.
double CounterStream::exponential() { return -std::log(1.0 - uniform()); }

double uniform_at(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return to_unit(block_bits(seed, stream, index / 2)[index % 2]);
}

}  // namespace ksapprox
