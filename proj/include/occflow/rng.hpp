#pragma once

#include <cstdint>
#include <random>

namespace occflow {

// mt19937_64 with a fixed mapping to doubles so generated artifacts are
// reproducible bit-for-bit independent of the standard library's
// distribution implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }  // [0,1)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  uint64_t next() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace occflow
