#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace mc2 {

// Seeded generator. The pair (seed, stream) fully determines the sequence;
// chains and replicates use distinct stream ids.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  std::uint64_t next_u64() { return eng_(); }
  // 53-bit uniform on [0, 1).
  double uniform();
  // Uniform on (0, 1), never returns 0.
  double uniform_open();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Inverse-cdf normal; slower than polar methods but platform independent.
  double normal();
  double exponential(double rate);
  std::size_t index(std::size_t n);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 eng_;
};

}  // namespace mc2
