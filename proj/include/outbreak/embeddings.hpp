#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace outbreak {

/// Lowercases ASCII letters, trims surrounding whitespace and collapses
/// internal whitespace runs to one space. Non-ASCII bytes pass through.
std::string normalize_key(std::string_view text);

struct Embedding {
  std::vector<double> values;

  std::size_t dim() const noexcept { return values.size(); }
  bool operator==(const Embedding&) const = default;
};

/// Precomputed text embeddings, read-only once loaded. Iteration order is
/// file order so a load/write cycle reproduces the file.
class EmbeddingCache {
 public:
  EmbeddingCache(std::size_t dim, std::string source_label);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return keys_.size(); }
  bool empty() const noexcept { return keys_.empty(); }
  const std::string& source_label() const noexcept { return source_label_; }
  const std::vector<std::string>& keys() const noexcept { return keys_; }

  /// Lookup by already-normalized key.
  const Embedding* find(const std::string& key) const;

  // Construction-time only; load_cache/parse_cache are the normal entry points.
  void insert(std::string key, Embedding value);

 private:
  std::size_t dim_;
  std::string source_label_;
  std::vector<std::string> keys_;
  std::unordered_map<std::string, Embedding> entries_;
};

/// EMBCACHE v1 reader. Throws Error with BadMagic, DimMismatch, DuplicateKey,
/// NonFiniteValue, MalformedLine or UnnormalizedKey; messages carry the line.
EmbeddingCache parse_cache(std::istream& in, std::string source_label = "stream");
EmbeddingCache load_cache(const std::filesystem::path& path);

void write_cache(std::ostream& out, const EmbeddingCache& cache);

/// Signed feature hashing of space-separated tokens, L2-normalized.
/// Whitespace-only input gives the zero vector.
Embedding hash_embed(std::string_view text, std::size_t dim, std::uint64_t seed);

/// `zero` marks a block filled with zeros because there was nothing to embed.
enum class EmbeddingSource { cache, fallback, zero };

struct EmbedResult {
  Embedding embedding;
  EmbeddingSource source;
};

struct EmbedderOptions {
  std::size_t fallback_dim = 64;
  std::uint64_t seed = 0;
};

/// Cache-first text embedder with a hashing fallback. Without a cache the
/// fallback runs at `fallback_dim`; with one, at the cache's dim.
class Embedder {
 public:
  explicit Embedder(EmbedderOptions options = {}, std::optional<EmbeddingCache> cache = std::nullopt);

  std::size_t dim() const noexcept;
  const EmbeddingCache* cache() const noexcept { return cache_ ? &*cache_ : nullptr; }
  const EmbedderOptions& options() const noexcept { return options_; }

  EmbedResult embed_text(std::string_view text) const;

  /// Mean of the per-symptom embeddings; an empty list gives zeros. The
  /// source is `cache` only when every symptom hit the cache.
  EmbedResult embed_symptom_list(std::span<const std::string> symptoms) const;

  Embedding zero() const { return Embedding{std::vector<double>(dim(), 0.0)}; }

 private:
  EmbedderOptions options_;
  std::optional<EmbeddingCache> cache_;
};

}  // namespace outbreak
