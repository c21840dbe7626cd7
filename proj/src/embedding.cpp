#include "ceva/embedding.hpp"

#include <cmath>

#include "ceva/error.hpp"
#include "ceva/ingest.hpp"

namespace ceva {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double l2_norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

double cosine(std::span<const double> a, std::span<const double> b) {
  double na = l2_norm(a);
  double nb = l2_norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

bool is_unit_norm(const EmbeddingVector& v, double tolerance) {
  return std::abs(l2_norm(v.values) - 1.0) <= tolerance;
}

bool normalize_in_place(std::vector<double>& v) {
  double n = l2_norm(v);
  if (!(n > 0.0) || !std::isfinite(n)) return false;
  for (double& x : v) x /= n;
  return true;
}

std::uint64_t stable_hash(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(h ^ splitmix64(seed));
}

HashingEmbedder::HashingEmbedder(std::size_t dimension, std::uint64_t seed)
    : dimension_(dimension), seed_(seed) {
  if (dimension == 0) throw ArgumentError("embedding dimension must be > 0");
}

EmbeddingVector HashingEmbedder::embed(std::string_view text) const {
  return embed_tokens(tokenize(text));
}

EmbeddingVector HashingEmbedder::embed_tokens(
    const std::vector<std::string>& tokens) const {
  std::vector<double> v(dimension_, 0.0);
  const std::uint64_t sign_seed = splitmix64(seed_ ^ 0xa5a5a5a5a5a5a5a5ULL);
  for (const auto& token : tokens) {
    std::uint64_t bucket = stable_hash(token, seed_) % dimension_;
    bool negative = (stable_hash(token, sign_seed) >> 63) != 0;
    v[bucket] += negative ? -1.0 : 1.0;
  }
  if (!normalize_in_place(v)) {
    v.assign(dimension_, 0.0);
    v[0] = 1.0;
  }
  return {std::move(v)};
}

}  // namespace ceva
