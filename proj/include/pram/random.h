//
// Copyright 2026 The PRAM Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// Counter-based random streams.
//
// A stream is a 64-bit key. Draw number c of stream k is
//   SplitMix64(k ^ SplitMix64(c * golden + golden))
// so any draw can be computed without touching the others. Substreams derive
// child keys from (parent key, index) the same way. Every random quantity in
// the toolkit is addressed as (master seed, substream path, counter), which
// makes results independent of thread scheduling.

#ifndef PRAM_RANDOM_H_
#define PRAM_RANDOM_H_

#include <cstdint>

namespace pram {

// SplitMix64 finalizer.
std::uint64_t Mix64(std::uint64_t x);

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : key_(Mix64(seed)) {}

  std::uint64_t key() const { return key_; }
  RandomStream Substream(std::uint64_t index) const;

  std::uint64_t Bits(std::uint64_t counter) const;
  // Uniform on [0, 1) with 53 random bits.
  double Uniform(std::uint64_t counter) const;
  // Uniform on (0, 1).
  double OpenUniform(std::uint64_t counter) const;
  // Standard normal via Box-Muller from counters 2c and 2c+1.
  double Normal(std::uint64_t counter) const;
  // Unit-rate exponential.
  double Exponential(std::uint64_t counter) const;

 private:
  struct FromKey {};
  RandomStream(FromKey, std::uint64_t key) : key_(key) {}

  std::uint64_t key_;
};

}  // namespace pram

#endif  // PRAM_RANDOM_H_
