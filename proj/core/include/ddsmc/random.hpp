/* Copyright 2026 The DDSMC Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <array>
#include <cstdint>

namespace ddsmc {

// Philox4x32-10 block function (Salmon et al., SC'11). Stateless: maps a
// 128-bit counter and a 64-bit key to 128 random bits.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter Generate(Counter counter, Key key);
};

// Identifies one random substream. Streams with distinct keys never share
// Philox blocks, so results depend only on the key and never on which thread
// consumes the stream.
struct StreamKey {
  std::uint64_t seed = 0;
  std::uint32_t domain = 0;    // which consumer (init, proposal, resampling, ...)
  std::uint32_t step = 0;      // SMC step or run index
  std::uint32_t particle = 0;  // particle or sample index
};

// Random domains used by the library. Kept in one place so two subsystems
// cannot accidentally draw from the same stream.
enum class RandomDomain : std::uint32_t {
  kInit = 1,
  kPropose = 2,
  kResample = 3,
  kFinalDraw = 4,
  kProblem = 5,
  kExactSampler = 6,
  kProjections = 7,
  kTest = 8,
};

inline StreamKey MakeKey(std::uint64_t seed, RandomDomain domain,
                         std::uint32_t step = 0, std::uint32_t particle = 0) {
  return {seed, static_cast<std::uint32_t>(domain), step, particle};
}

// Mixes several integers into a 64-bit seed (splitmix64 finalizer chain).
std::uint64_t DeriveSeed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

// Sequential view over one Philox substream: the block counter advances, the
// remaining counter words and the key are fixed by the StreamKey.
class CounterRng {
 public:
  explicit CounterRng(const StreamKey& key);

  std::uint32_t NextU32();
  std::uint64_t NextU64();

  // Uniform on the open interval (0, 1), 53 bits of resolution.
  double Uniform();

  // Standard normal via Box-Muller; the second variate of each pair is cached.
  double Normal();

  // Uniform integer in [0, n) by rejection (unbiased).
  std::uint64_t UniformInt(std::uint64_t n);

  // Exponential(1).
  double Exponential();

 private:
  void Refill();

  Philox4x32::Key key_;
  Philox4x32::Counter counter_;
  Philox4x32::Counter block_{};
  int used_ = 4;
  bool has_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

}  // namespace ddsmc
