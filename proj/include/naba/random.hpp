#pragma once

#include <naba/tensor.hpp>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace naba {

// Draws derived directly from mt19937_64 bits so sequences do not depend on
// the standard library's distribution implementations.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int index(int count) { return static_cast<int>(gen_() % static_cast<std::uint64_t>(count)); }
  Cx box(double half) { return {uniform(-half, half), uniform(-half, half)}; }
  Cx disk(double radius) {
    double r = radius * std::sqrt(uniform());
    double th = 2 * std::numbers::pi * uniform();
    return std::polar(r, th);
  }
  std::uint64_t bits() { return gen_(); }

private:
  std::mt19937_64 gen_;
};

} // namespace naba
