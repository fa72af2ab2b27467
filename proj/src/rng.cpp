#include "mc2/rng.hpp"

#include <cmath>

#include <boost/math/special_functions/erf.hpp>

namespace mc2 {

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x6d633232u};
  eng_.seed(seq);
}

double RngStream::uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

double RngStream::uniform_open() {
  return (static_cast<double>(eng_() >> 12) + 0.5) * 0x1.0p-52;
}

double RngStream::normal() {
  const double u = uniform_open();
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * u);
}

double RngStream::exponential(double rate) { return -std::log(uniform_open()) / rate; }

std::size_t RngStream::index(std::size_t n) {
  auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
  return i < n ? i : n - 1;
}

}  // namespace mc2
