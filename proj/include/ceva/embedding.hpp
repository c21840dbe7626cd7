#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ceva {

inline constexpr double kUnitNormTolerance = 1e-9;

// Unit-L2-norm vector of a backend's advertised dimension.
struct EmbeddingVector {
  std::vector<double> values;

  std::size_t dimension() const { return values.size(); }
  bool operator==(const EmbeddingVector&) const = default;
};

double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> v);
// Cosine on raw vectors; 0 when either is the zero vector.
double cosine(std::span<const double> a, std::span<const double> b);
bool is_unit_norm(const EmbeddingVector& v,
                  double tolerance = kUnitNormTolerance);

// Scales to unit length. Returns false (and leaves v untouched) for zero or
// non-finite input.
bool normalize_in_place(std::vector<double>& v);

// Deterministic bag-of-tokens embedder used by the mock backend: every token
// is hashed to one of `dimension` buckets with a +-1 sign drawn from a second,
// independent hash stream; the sum is L2-normalized. Texts without tokens (or
// whose signed buckets cancel exactly) map to the basis vector e0.
class HashingEmbedder {
 public:
  static constexpr std::size_t kDefaultDimension = 64;
  static constexpr std::uint64_t kDefaultSeed = 0x5eedc0deULL;

  explicit HashingEmbedder(std::size_t dimension = kDefaultDimension,
                           std::uint64_t seed = kDefaultSeed);

  std::size_t dimension() const { return dimension_; }
  EmbeddingVector embed(std::string_view text) const;
  EmbeddingVector embed_tokens(const std::vector<std::string>& tokens) const;

 private:
  std::size_t dimension_;
  std::uint64_t seed_;
};

// 64-bit FNV-1a over the bytes, finished with a splitmix64 mix of `seed`.
std::uint64_t stable_hash(std::string_view bytes, std::uint64_t seed);

}  // namespace ceva
