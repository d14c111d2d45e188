#include "tacit/embedding.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "tacit/tokens.hpp"
#include "tacit/util.hpp"

namespace tacit {

HashEmbeddingProvider::HashEmbeddingProvider(HashEmbeddingConfig config)
    : config_(config) {
  if (config_.dimension == 0) throw std::invalid_argument("embedding dimension must be > 0");
}

const std::vector<double>& HashEmbeddingProvider::token_vector(const std::string& token) const {
  std::uint64_t h = fnv1a64(token);
  std::scoped_lock lock(mutex_);
  auto it = cache_.find(h);
  if (it != cache_.end()) return it->second;
  std::mt19937_64 eng(h ^ config_.seed);
  std::vector<double> v(config_.dimension);
  for (double& x : v) x = static_cast<double>(eng() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
  return cache_.emplace(h, std::move(v)).first->second;
}

std::vector<double> HashEmbeddingProvider::embed_text(const std::string& text) const {
  std::vector<std::string> tokens = lowercase_tokens(text);
  if (tokens.empty()) tokens.push_back(text);
  std::vector<double> acc(config_.dimension, 0.0);
  for (const std::string& token : tokens) {
    const std::vector<double>& tv = token_vector(token);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += tv[i];
  }
  double norm = std::sqrt(dot(acc, acc));
  if (norm == 0.0) {
    acc.assign(config_.dimension, 0.0);
    acc[0] = 1.0;
    return acc;
  }
  for (double& x : acc) x /= norm;
  return acc;
}

std::vector<double> embed(const EmbeddingProvider& provider, const std::string& text) {
  std::string truncated = truncate_for_embedding(text, provider.token_limit());
  if (truncated.empty()) throw std::invalid_argument("cannot embed empty text");
  return provider.embed_text(truncated);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("vector dimension mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

}  // namespace tacit
