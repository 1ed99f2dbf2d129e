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

#include "pram/random.h"

#include <cmath>
#include <numbers>

namespace pram {
namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
constexpr double kTwoPow53 = 9007199254740992.0;

}  // namespace

std::uint64_t Mix64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RandomStream RandomStream::Substream(std::uint64_t index) const {
  return RandomStream(FromKey{},
                      Mix64(key_ + Mix64((index + 1) * kGolden) + kGolden));
}

std::uint64_t RandomStream::Bits(std::uint64_t counter) const {
  return Mix64(key_ ^ Mix64(counter * kGolden + kGolden));
}

double RandomStream::Uniform(std::uint64_t counter) const {
  return static_cast<double>(Bits(counter) >> 11) / kTwoPow53;
}

double RandomStream::OpenUniform(std::uint64_t counter) const {
  return (static_cast<double>(Bits(counter) >> 11) + 0.5) / kTwoPow53;
}

double RandomStream::Normal(std::uint64_t counter) const {
  const double u1 = OpenUniform(2 * counter);
  const double u2 = Uniform(2 * counter + 1);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

double RandomStream::Exponential(std::uint64_t counter) const {
  return -std::log(OpenUniform(counter));
}

}  // namespace pram
