// Copyright 2026 The skewent Authors
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

#pragma once

// Reproducible random streams. A root seed plus a stream tag identify an
// RngStream; numbered substreams are derived from it by hashing the
// (root, tag, index) triple, so the i-th shard of an estimate always sees
// the same draws no matter how many workers run it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <numbers>
#include <random>
#include <thread>
#include <type_traits>
#include <vector>

namespace skewent {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Exclusively-owned generator: a 64-bit Mersenne twister plus a
/// Box-Muller normal cache. std::normal_distribution is avoided because its
/// algorithm differs between standard libraries.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const double radius = std::sqrt(-2.0 * std::log(uniform()));
    const double angle = 2.0 * std::numbers::pi * uniform();
    cached_ = radius * std::sin(angle);
    has_cached_ = true;
    return radius * std::cos(angle);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

class RngStream {
 public:
  constexpr explicit RngStream(std::uint64_t root_seed, std::uint64_t tag = 0) noexcept
      : root_(root_seed), tag_(tag) {}

  [[nodiscard]] constexpr std::uint64_t root() const noexcept { return root_; }
  [[nodiscard]] constexpr std::uint64_t tag() const noexcept { return tag_; }

  /// Independent child stream, e.g. one per command or per estimator.
  [[nodiscard]] constexpr RngStream child(std::uint64_t tag) const noexcept {
    return RngStream(root_, splitmix64(tag_ ^ splitmix64(tag + 0x5851f42d4c957f2dULL)));
  }

  [[nodiscard]] RandomStream substream(std::uint64_t index) const {
    const std::uint64_t seed =
        splitmix64(splitmix64(splitmix64(root_) ^ tag_) + splitmix64(index ^ 0xda3e39cb94b95bdbULL));
    return RandomStream(seed);
  }

 private:
  std::uint64_t root_;
  std::uint64_t tag_;
};

/// Samples per shard. Shard boundaries depend only on the sample index.
inline constexpr std::size_t kShardSize = 4096;

/// Draws `count` observations, one per call of `observe(stream)`.
/// Shard k covers indices [k*kShardSize, (k+1)*kShardSize) and uses
/// substream k, so the returned vector is identical for any worker count.
template <class Observe>
auto sharded_observations(const RngStream& stream, std::size_t count, unsigned workers, Observe&& observe)
    -> std::vector<std::invoke_result_t<Observe&, RandomStream&>> {
  using Value = std::invoke_result_t<Observe&, RandomStream&>;
  std::vector<Value> values(count);
  const std::size_t shards = (count + kShardSize - 1) / kShardSize;
  auto run_shard = [&](std::size_t shard) {
    RandomStream rs = stream.substream(shard);
    const std::size_t begin = shard * kShardSize;
    const std::size_t end = std::min(count, begin + kShardSize);
    for (std::size_t i = begin; i < end; ++i) values[i] = observe(rs);
  };
  workers = static_cast<unsigned>(std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(shards, 1)));
  if (workers == 1) {
    for (std::size_t s = 0; s < shards; ++s) run_shard(s);
    return values;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::vector<std::exception_ptr> failures(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t s = w; s < shards; s += workers) run_shard(s);
      } catch (...) {
        failures[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& f : failures)
    if (f) std::rethrow_exception(f);
  return values;
}

struct SampleSummary {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t count = 0;
};

/// Two-pass mean and standard error, summed in index order.
inline SampleSummary summarize(const std::vector<double>& values) {
  SampleSummary out;
  out.count = values.size();
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) return out;
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  const double var = ss / static_cast<double>(values.size() - 1);
  out.std_error = std::sqrt(var / static_cast<double>(values.size()));
  return out;
}

}  // namespace skewent
