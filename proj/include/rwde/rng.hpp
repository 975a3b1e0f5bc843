// Copyright 2026 The RWDE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RWDE_RNG_HPP_
#define RWDE_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace rwde {

// Counter-based generator: output i is a hash of (key, i), so a stream is
// fully determined by its key and streams for (seed, replicate, vertex)
// tuples can be derived independently of thread schedule.  The mixer is the
// splitmix64 finalizer.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t key) : key_(key) {}

  static constexpr std::uint64_t min() { return 0; }
  static constexpr std::uint64_t max() {
    return std::numeric_limits<std::uint64_t>::max();
  }

  std::uint64_t operator()() {
    return mix(key_ + (++counter_) * 0x9e3779b97f4a7c15ull);
  }

  // Derives an independent stream; does not disturb this stream's counter.
  Rng split(std::uint64_t tag) const {
    return Rng(mix(key_ ^ mix(tag + 0xa0761d6478bd642full)));
  }

  // Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; one pair per call, second value unused,
  // which keeps the stream position independent of call history.
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // Gamma(shape, 1) by Marsaglia-Tsang squeeze/rejection.  Shapes below one
  // go through the boost trick: draw Gamma(shape + 1) and multiply by
  // U^(1/shape).
  double gamma(double shape) {
    if (!(shape > 0.0)) throw std::invalid_argument("gamma: shape must be positive");
    if (shape < 1.0) {
      double boost = std::pow(uniform(), 1.0 / shape);
      return gamma(shape + 1.0) * boost;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x;
      double v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  // Beta(a, b) as a ratio of gammas.
  double beta(double a, double b) {
    const double x = gamma(a);
    const double y = gamma(b);
    return x / (x + y);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Stream for one (replicate, vertex) pair under a master seed.  Sampling a
// replicate in parallel workers gives identical output for identical seeds
// because nothing here depends on scheduling.
inline Rng stream_for(std::uint64_t master_seed, std::uint64_t replicate,
                      std::uint64_t vertex) {
  return Rng(master_seed).split(replicate).split(vertex);
}

}  // namespace rwde

#endif  // RWDE_RNG_HPP_
