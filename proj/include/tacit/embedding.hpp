#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

namespace tacit {

// Pluggable text embedding. Implementations must be deterministic (same text,
// same vector) and return unit-L2-norm vectors of dimension().
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::size_t dimension() const = 0;
  // Maximum input size in estimated tokens; longer inputs are truncated by
  // the store before embedding.
  virtual std::int64_t token_limit() const = 0;
  virtual std::vector<double> embed_text(const std::string& text) const = 0;
};

// Deterministic, network-free provider: seeded random hyperplane projection
// of token hash features.
//
// Construction (mirrored verbatim by the test oracle):
//   1. tokens = lowercase_tokens(text); if empty, the whole raw text is one token
//   2. per token occurrence: eng = mt19937_64(fnv1a64(token) ^ seed),
//      component i of the token vector = (eng() >> 11) * 2^-53 * 2 - 1
//   3. accumulate token vectors in text order, then L2-normalize
struct HashEmbeddingConfig {
  std::uint64_t seed = 0x68617368ULL;
  std::size_t dimension = 256;
  std::int64_t token_limit = 8000;
};

class HashEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit HashEmbeddingProvider(HashEmbeddingConfig config = {});

  std::size_t dimension() const override { return config_.dimension; }
  std::int64_t token_limit() const override { return config_.token_limit; }
  std::vector<double> embed_text(const std::string& text) const override;

 private:
  const std::vector<double>& token_vector(const std::string& token) const;

  HashEmbeddingConfig config_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<std::uint64_t, std::vector<double>> cache_;
};

// Truncates to the provider's token limit and embeds. Throws
// std::invalid_argument on text that is empty after truncation.
std::vector<double> embed(const EmbeddingProvider& provider, const std::string& text);

double dot(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace tacit
