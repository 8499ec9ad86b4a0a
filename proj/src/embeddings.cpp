#include "outbreak/embeddings.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

#include "outbreak/error.hpp"
#include "outbreak/io.hpp"

namespace outbreak {

namespace {

constexpr std::string_view kMagicPrefix = "EMBCACHE v1 dim=";

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t token_hash(std::string_view token, std::uint64_t seed) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ splitmix64(seed);
  for (unsigned char c : token) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(h);
}

void add_token(std::vector<double>& acc, std::string_view token, std::uint64_t seed) {
  const std::uint64_t h = token_hash(token, seed);
  const std::size_t bucket = h % acc.size();
  // Sign comes from bits independent of the bucket index.
  const double sign = (splitmix64(h ^ 0x5bd1e9955bd1e995ULL) & 1U) ? 1.0 : -1.0;
  acc[bucket] += sign;
}

bool all_zero(const std::vector<double>& v) {
  for (double x : v) {
    if (x != 0.0) return false;
  }
  return true;
}

std::string line_tag(std::size_t line) { return "line " + std::to_string(line) + ": "; }

}  // namespace

std::string normalize_key(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (unsigned char c : text) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c));
  }
  return out;
}

EmbeddingCache::EmbeddingCache(std::size_t dim, std::string source_label)
    : dim_(dim), source_label_(std::move(source_label)) {
  if (dim_ == 0) throw Error(Errc::DimMismatch, "embedding cache dim must be positive");
}

const Embedding* EmbeddingCache::find(const std::string& key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

void EmbeddingCache::insert(std::string key, Embedding value) {
  if (value.dim() != dim_) {
    throw Error(Errc::DimMismatch, "key '" + key + "' has " + std::to_string(value.dim()) +
                                       " values, expected " + std::to_string(dim_));
  }
  for (double x : value.values) {
    if (!std::isfinite(x)) throw Error(Errc::NonFiniteValue, "key '" + key + "'");
  }
  if (key.empty() || normalize_key(key) != key) {
    throw Error(Errc::UnnormalizedKey, "key '" + key + "' is not normalized");
  }
  if (entries_.count(key)) throw Error(Errc::DuplicateKey, "key '" + key + "'");
  keys_.push_back(key);
  entries_.emplace(std::move(key), std::move(value));
}

EmbeddingCache parse_cache(std::istream& in, std::string source_label) {
  std::string line;
  if (!io::read_line(in, line) || !line.starts_with(kMagicPrefix)) {
    throw Error(Errc::BadMagic, line_tag(1) + "expected '" + std::string(kMagicPrefix) + "<D>'");
  }
  auto dim = io::parse_int(std::string_view(line).substr(kMagicPrefix.size()));
  if (!dim || *dim <= 0) throw Error(Errc::BadMagic, line_tag(1) + "bad dim in header");

  EmbeddingCache cache(static_cast<std::size_t>(*dim), std::move(source_label));
  std::size_t line_no = 1;
  while (io::read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw Error(Errc::MalformedLine, line_tag(line_no) + "expected '<key>\\t<values>'");
    }
    std::string key = line.substr(0, tab);
    Embedding emb;
    emb.values.reserve(cache.dim());
    for (auto field : io::split(std::string_view(line).substr(tab + 1), ' ')) {
      if (field.empty()) continue;
      auto v = io::parse_double(field);
      if (!v) throw Error(Errc::MalformedLine, line_tag(line_no) + "bad number '" + std::string(field) + "'");
      if (!std::isfinite(*v)) throw Error(Errc::NonFiniteValue, line_tag(line_no) + "key '" + key + "'");
      emb.values.push_back(*v);
    }
    if (emb.dim() != cache.dim()) {
      throw Error(Errc::DimMismatch, line_tag(line_no) + std::to_string(emb.dim()) + " values, header dim=" +
                                         std::to_string(cache.dim()));
    }
    if (normalize_key(key) != key) {
      throw Error(Errc::UnnormalizedKey, line_tag(line_no) + "key '" + key + "' is not normalized");
    }
    if (cache.find(key)) throw Error(Errc::DuplicateKey, line_tag(line_no) + "key '" + key + "'");
    cache.insert(std::move(key), std::move(emb));
  }
  return cache;
}

EmbeddingCache load_cache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());
  return parse_cache(in, path.string());
}

void write_cache(std::ostream& out, const EmbeddingCache& cache) {
  out << kMagicPrefix << cache.dim() << '\n';
  char buf[40];
  for (const auto& key : cache.keys()) {
    out << key << '\t';
    const auto& values = cache.find(key)->values;
    for (std::size_t i = 0; i < values.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.9e", values[i]);
      if (i) out << ' ';
      out << buf;
    }
    out << '\n';
  }
}

Embedding hash_embed(std::string_view text, std::size_t dim, std::uint64_t seed) {
  std::vector<double> acc(dim, 0.0);
  if (dim == 0) return Embedding{std::move(acc)};
  const std::string key = normalize_key(text);
  if (key.empty()) return Embedding{std::move(acc)};

  for (auto token : io::split(key, ' ')) add_token(acc, token, seed);
  // Opposite-signed collisions can cancel exactly; the whole key then
  // stands in as one token so the output stays a unit vector.
  if (all_zero(acc)) add_token(acc, key, seed);

  double sq = 0.0;
  for (double x : acc) sq += x * x;
  const double norm = std::sqrt(sq);
  for (double& x : acc) x /= norm;
  return Embedding{std::move(acc)};
}

Embedder::Embedder(EmbedderOptions options, std::optional<EmbeddingCache> cache)
    : options_(options), cache_(std::move(cache)) {
  if (!cache_ && options_.fallback_dim == 0) {
    throw Error(Errc::DimMismatch, "fallback embedding dim must be positive");
  }
}

std::size_t Embedder::dim() const noexcept { return cache_ ? cache_->dim() : options_.fallback_dim; }

EmbedResult Embedder::embed_text(std::string_view text) const {
  if (cache_) {
    if (const Embedding* hit = cache_->find(normalize_key(text))) {
      return {*hit, EmbeddingSource::cache};
    }
  }
  return {hash_embed(text, dim(), options_.seed), EmbeddingSource::fallback};
}

EmbedResult Embedder::embed_symptom_list(std::span<const std::string> symptoms) const {
  if (symptoms.empty()) return {zero(), EmbeddingSource::zero};
  std::vector<double> sum(dim(), 0.0);
  bool all_cached = true;
  for (const auto& s : symptoms) {
    auto r = embed_text(s);
    all_cached = all_cached && r.source == EmbeddingSource::cache;
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += r.embedding.values[i];
  }
  const double n = static_cast<double>(symptoms.size());
  for (double& x : sum) x /= n;
  return {Embedding{std::move(sum)}, all_cached ? EmbeddingSource::cache : EmbeddingSource::fallback};
}

}  // namespace outbreak
