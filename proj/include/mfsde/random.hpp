#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mfsde {

/**
 * Deterministic name of a random stream: a master seed plus an ordered list
 * of (tag, index) labels, e.g. (seed, [("rep", 3), ("particle", 17)]).
 *
 * The labels are folded into a 64-bit digest which keys a counter-based
 * generator, so the stream a task reads never depends on scheduling order.
 */
class StreamKey {
 public:
  struct Label {
    std::string tag;
    std::int64_t index;
    bool operator==(const Label&) const = default;
  };

  explicit StreamKey(std::uint64_t master_seed = 0);

  /// Child key with one more label appended.
  StreamKey with(std::string_view tag, std::int64_t index) const;

  std::uint64_t master_seed() const noexcept { return seed_; }
  const std::vector<Label>& labels() const noexcept { return labels_; }
  std::uint64_t digest() const noexcept { return digest_; }

  std::string to_string() const;

  bool operator==(const StreamKey& other) const {
    return seed_ == other.seed_ && labels_ == other.labels_;
  }

 private:
  std::uint64_t seed_;
  std::vector<Label> labels_;
  std::uint64_t digest_;
};

/// Philox4x32-10 block function.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/**
 * Random access stream of uniforms and standard normals keyed by a StreamKey.
 * Value i is a pure function of (key, i); the object holds no mutable state.
 */
class CounterRng {
 public:
  explicit CounterRng(const StreamKey& key) : CounterRng(key.digest()) {}
  explicit CounterRng(std::uint64_t digest);

  /// Uniform on the open interval (0, 1).
  double uniform(std::uint64_t index) const;

  /// Standard normal number `index` of the stream.
  double normal(std::uint64_t index) const;

  /// out[i] = normal(first + i); cheaper than calling normal() per entry.
  void fill_normals(std::span<double> out, std::uint64_t first = 0) const;

 private:
  std::array<std::uint32_t, 4> block(std::uint64_t counter, std::uint32_t lane) const;

  std::array<std::uint32_t, 2> key_;
};

}  // namespace mfsde
