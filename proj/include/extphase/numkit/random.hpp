#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace xps::numkit {

// Deterministic uniform sampler. Converts raw mt19937_64 bits directly so
// the stream does not depend on the standard library's distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 42) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  std::vector<double> uniform_vector(std::size_t n, double a, double b) {
    std::vector<double> v(n);
    for (auto& x : v) x = uniform(a, b);
    return v;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace xps::numkit
