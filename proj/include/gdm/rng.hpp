#pragma once

#include <cstdint>
#include <random>

namespace gdm {

// Random stream used by every simulation routine.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. All derived variates are computed here rather than through the
// <random> distributions, whose algorithms are implementation-defined, so a
// given seed reproduces the same draws with any standard library:
//   uniform  u = ((x >> 11) + 0.5) * 2^-53         in (0, 1)
//   gumbel   -log(-log(u))
//   normal   Box-Muller, cosine branch only (one normal per two uniforms)
//   index    floor(u * n)
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double gumbel();
  double normal();
  std::size_t index(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace gdm
