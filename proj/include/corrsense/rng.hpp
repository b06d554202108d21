#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace corrsense {

/// Philox4x32-10 block function (Salmon et al., SC'11).
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;
PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key);

/// Stateless random stream: draw i is a pure function of (key, stream, i),
/// so any subset of draws can be computed in any order on any thread.
class CounterStream {
 public:
  CounterStream(PhiloxKey key, std::uint64_t stream) : key_(key), stream_(stream) {}

  std::uint64_t bits(std::uint64_t index) const;
  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform(std::uint64_t index) const;
  /// Standard normal via the inverse CDF of uniform(index).
  double normal(std::uint64_t index) const;

 private:
  PhiloxKey key_;
  std::uint64_t stream_;
};

/// Sorted uniform sample of count distinct values from [0, total), by a
/// partial Fisher-Yates shuffle driven by draws 0..count-1 of the stream.
std::vector<std::int64_t> sample_without_replacement(std::int64_t total, std::int64_t count,
                                                     const CounterStream& stream);

/// Hierarchical seed: a master value plus a path of (label, index) pairs.
/// Two seeds with equal master and path yield identical streams.
class Seed {
 public:
  explicit Seed(std::uint64_t master = 0) : master_(master) {}

  Seed child(std::string label, std::uint64_t index = 0) const;
  CounterStream stream() const;

  std::uint64_t master() const { return master_; }
  const std::vector<std::pair<std::string, std::uint64_t>>& path() const { return path_; }

 private:
  std::uint64_t master_;
  std::vector<std::pair<std::string, std::uint64_t>> path_;
};

}  // namespace corrsense
