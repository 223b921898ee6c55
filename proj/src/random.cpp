#include "mfsde/random.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace mfsde {

namespace {

constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32) | lo;
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

StreamKey::StreamKey(std::uint64_t master_seed) : seed_(master_seed), digest_(mix64(master_seed)) {}

StreamKey StreamKey::with(std::string_view tag, std::int64_t index) const {
  StreamKey child = *this;
  child.labels_.push_back({std::string(tag), index});
  child.digest_ = mix64(mix64(digest_ ^ fnv1a(tag)) ^ static_cast<std::uint64_t>(index));
  return child;
}

std::string StreamKey::to_string() const {
  std::ostringstream os;
  os << seed_;
  for (const auto& l : labels_) os << '/' << l.tag << ':' << l.index;
  return os.str();
}

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kM0 = 0xD2511F53u;
  constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u;
  constexpr std::uint32_t kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

CounterRng::CounterRng(std::uint64_t digest)
    : key_{static_cast<std::uint32_t>(digest), static_cast<std::uint32_t>(digest >> 32)} {}

std::array<std::uint32_t, 4> CounterRng::block(std::uint64_t counter, std::uint32_t lane) const {
  return philox4x32({static_cast<std::uint32_t>(counter), static_cast<std::uint32_t>(counter >> 32),
                     lane, 0u},
                    key_);
}

double CounterRng::uniform(std::uint64_t index) const {
  const auto b = block(index, 1u);
  return to_open_unit(b[0], b[1]);
}

double CounterRng::normal(std::uint64_t index) const {
  const auto b = block(index / 2, 0u);
  const double u1 = to_open_unit(b[0], b[1]);
  const double u2 = to_open_unit(b[2], b[3]);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return (index % 2 == 0) ? r * std::cos(angle) : r * std::sin(angle);
}

void CounterRng::fill_normals(std::span<double> out, std::uint64_t first) const {
  std::size_t i = 0;
  if (first % 2 == 1 && !out.empty()) {
    out[0] = normal(first);
    i = 1;
  }
  for (; i + 1 < out.size(); i += 2) {
    const auto b = block((first + i) / 2, 0u);
    const double r = std::sqrt(-2.0 * std::log(to_open_unit(b[0], b[1])));
    const double angle = 2.0 * std::numbers::pi * to_open_unit(b[2], b[3]);
    out[i] = r * std::cos(angle);
    out[i + 1] = r * std::sin(angle);
  }
  if (i < out.size()) out[i] = normal(first + i);
}

}  // namespace mfsde
