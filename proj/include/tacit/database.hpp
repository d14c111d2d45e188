#pragma once

#include <cstdint>
#include <memory>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "tacit/embedding.hpp"
#include "tacit/rng.hpp"
#include "tacit/types.hpp"

namespace tacit {

struct StoreError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One query|answer record with its embedding and provenance metadata.
struct Segment {
  std::string id;
  std::string query_text;
  std::string answer_text;
  std::vector<double> query_embedding;
  std::string scenario_tag;
  std::int64_t created_at_ns = 0;
  std::int64_t updated_at_ns = 0;
  std::int64_t revision = 0;
};

struct ScoredSegment {
  Segment segment;
  double score = 0.0;
  double semantic_component = 0.0;
  double keyword_component = 0.0;
};

enum class DbName { H, V, E };
std::string to_string(DbName name);
DbName db_name_from_string(const std::string& s);

// Equal-weight blend of embedding similarity and keyword similarity:
//   semantic = clamp((1 + dot(query_vec, segment.query_embedding)) / 2, 0, 1)
//   keyword  = Jaccard over lowercase alphanumeric token sets
//              (two empty sets count as identical -> 1)
//   score    = 0.5 * semantic + 0.5 * keyword
// Both vectors must be unit-norm and share a dimension.
ScoredSegment hybrid_score(const std::string& query_text, const std::vector<double>& query_vec,
                           const Segment& segment);

struct WriteOutcome {
  enum class Kind { Created, Updated };
  Kind kind = Kind::Created;
  Segment segment;
};

// One of the three dynamic query-answer stores. Many concurrent readers,
// serialized writers; retrieve sees a consistent snapshot.
class Database {
 public:
  Database(DbName name, DatabaseConfig config, std::shared_ptr<const EmbeddingProvider> provider);

  // Thresholded top-k hybrid retrieval within one scenario partition.
  // Sorted by score descending; ties broken by updated_at descending, then id
  // ascending. Every returned score >= config.threshold.
  std::vector<ScoredSegment> retrieve(const std::string& query_text,
                                      const std::string& scenario_tag) const;

  // Appends a fresh segment (revision 0, embedding of the truncated query).
  Segment store(const std::string& query_text, const std::string& answer_text,
                const std::string& scenario_tag);

  // Replaces the answer of an existing segment; query text and embedding are
  // untouched, revision +1, updated_at advanced. Throws StoreError on an
  // unknown id.
  Segment update(const std::string& segment_id, const std::string& new_answer);

  // Draws u in [0,1): updates the top-scoring retrieved segment when
  // u < update_rate and `retrieved` is non-empty, otherwise creates.
  WriteOutcome store_or_update(const std::string& query_text, const std::string& answer_text,
                               const std::string& scenario_tag,
                               const std::vector<ScoredSegment>& retrieved, SeededRng& rng);

  // Import path: inserts a segment verbatim (id, timestamps, revision kept).
  void insert_raw(Segment segment);
  void clear_scenario(const std::string& scenario_tag);

  std::size_t size() const;
  std::vector<Segment> snapshot() const;
  std::vector<std::string> scenarios() const;
  std::uint64_t content_hash() const;

  DbName name() const { return name_; }
  const DatabaseConfig& config() const { return config_; }
  const EmbeddingProvider& provider() const { return *provider_; }

 private:
  Segment store_locked(const std::string& query_text, const std::string& answer_text,
                       const std::string& scenario_tag);
  std::int64_t next_stamp_locked();
  std::string next_id_locked();

  DbName name_;
  DatabaseConfig config_;
  std::shared_ptr<const EmbeddingProvider> provider_;
  mutable std::shared_mutex mutex_;
  std::vector<Segment> segments_;
  std::unordered_map<std::string, std::size_t> index_by_id_;
  std::int64_t next_seq_ = 1;
  std::int64_t last_stamp_ns_ = 0;
};

// The composite retrieval key for validation segments: the observation text
// and the hypothesis text joined by a fixed marker line.
std::string compose_pair_query(const std::string& observation_text,
                               const std::string& hypothesis_text);
// Inverse of compose_pair_query; returns {text, ""} when the marker is absent.
std::pair<std::string, std::string> split_pair_query(const std::string& query_text);

}  // namespace tacit
