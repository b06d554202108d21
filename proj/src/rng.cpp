#include "corrsense/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/special_functions/erf.hpp>

namespace corrsense {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

inline PhiloxCounter round(const PhiloxCounter& c, const PhiloxKey& k) {
  std::uint32_t hi0, lo0, hi1, lo1;
  mulhilo(kMul0, c[0], hi0, lo0);
  mulhilo(kMul1, c[2], hi1, lo1);
  return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

// splitmix64 finalizer
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001B3ull;
  }
  return h;
}

}  // namespace

PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key) {
  counter = round(counter, key);
  for (int r = 1; r < 10; ++r) {
    key[0] += kWeyl0;
    key[1] += kWeyl1;
    counter = round(counter, key);
  }
  return counter;
}

std::uint64_t CounterStream::bits(std::uint64_t index) const {
  const PhiloxCounter ctr{static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                          static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
  const PhiloxCounter out = philox4x32_10(ctr, key_);
  return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
}

double CounterStream::uniform(std::uint64_t index) const {
  constexpr double kScale = 0x1.0p-53;
  return (static_cast<double>(bits(index) >> 11) + 0.5) * kScale;
}

double CounterStream::normal(std::uint64_t index) const {
  // Phi^{-1}(u) = -sqrt(2) * erfc^{-1}(2u)
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * uniform(index));
}

Seed Seed::child(std::string label, std::uint64_t index) const {
  Seed out = *this;
  out.path_.emplace_back(std::move(label), index);
  return out;
}

CounterStream Seed::stream() const {
  std::uint64_t h = mix64(master_);
  for (const auto& [label, index] : path_) {
    h = mix64(h ^ fnv1a(label));
    h = mix64(h ^ mix64(index));
  }
  const std::uint64_t stream = mix64(h ^ 0x5851F42D4C957F2Dull);
  return CounterStream({static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)}, stream);
}

std::vector<std::int64_t> sample_without_replacement(std::int64_t total, std::int64_t count,
                                                     const CounterStream& stream) {
  std::vector<std::int64_t> idx(static_cast<std::size_t>(total));
  std::iota(idx.begin(), idx.end(), 0);
  for (std::int64_t i = 0; i < count; ++i) {
    const auto span = static_cast<double>(total - i);
    auto j = i + static_cast<std::int64_t>(stream.uniform(static_cast<std::uint64_t>(i)) * span);
    j = std::min(j, total - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  idx.resize(static_cast<std::size_t>(count));
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace corrsense
