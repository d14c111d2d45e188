#include "tacit/database.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "tacit/tokens.hpp"
#include "tacit/util.hpp"

namespace tacit {

namespace {
constexpr const char* kPairMarker = "\n[HYPOTHESIS]\n";
}

std::string to_string(DbName name) {
  switch (name) {
    case DbName::H: return "H";
    case DbName::V: return "V";
    case DbName::E: return "E";
  }
  return "?";
}

DbName db_name_from_string(const std::string& s) {
  if (s == "H") return DbName::H;
  if (s == "V") return DbName::V;
  if (s == "E") return DbName::E;
  throw StoreError("unknown database name: " + s);
}

ScoredSegment hybrid_score(const std::string& query_text, const std::vector<double>& query_vec,
                           const Segment& segment) {
  if (query_vec.size() != segment.query_embedding.size())
    throw StoreError("hybrid_score: embedding dimension mismatch");
  double cosine = dot(query_vec, segment.query_embedding);
  double semantic = (1.0 + cosine) / 2.0;
  semantic = std::min(1.0, std::max(0.0, semantic));

  std::vector<std::string> qa = lowercase_tokens(query_text);
  std::vector<std::string> qb = lowercase_tokens(segment.query_text);
  std::set<std::string> sa(qa.begin(), qa.end());
  std::set<std::string> sb(qb.begin(), qb.end());
  std::size_t inter = 0;
  for (const auto& t : sa) inter += sb.count(t);
  std::size_t uni = sa.size() + sb.size() - inter;
  double keyword = uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);

  ScoredSegment out;
  out.segment = segment;
  out.semantic_component = semantic;
  out.keyword_component = keyword;
  out.score = 0.5 * semantic + 0.5 * keyword;
  return out;
}

Database::Database(DbName name, DatabaseConfig config,
                   std::shared_ptr<const EmbeddingProvider> provider)
    : name_(name), config_(config), provider_(std::move(provider)) {
  validate_config(config_);
  if (!provider_) throw StoreError("database requires an embedding provider");
}

std::vector<ScoredSegment> Database::retrieve(const std::string& query_text,
                                              const std::string& scenario_tag) const {
  std::vector<double> query_vec = embed(*provider_, query_text);
  std::shared_lock lock(mutex_);
  std::vector<ScoredSegment> hits;
  for (const Segment& s : segments_) {
    if (s.scenario_tag != scenario_tag) continue;
    ScoredSegment scored = hybrid_score(query_text, query_vec, s);
    if (scored.score >= config_.threshold) hits.push_back(std::move(scored));
  }
  std::sort(hits.begin(), hits.end(), [](const ScoredSegment& a, const ScoredSegment& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.segment.updated_at_ns != b.segment.updated_at_ns)
      return a.segment.updated_at_ns > b.segment.updated_at_ns;
    return a.segment.id < b.segment.id;
  });
  if (hits.size() > static_cast<std::size_t>(config_.top_k))
    hits.resize(static_cast<std::size_t>(config_.top_k));
  return hits;
}

std::int64_t Database::next_stamp_locked() {
  std::int64_t now = wall_clock_ns();
  last_stamp_ns_ = std::max(now, last_stamp_ns_ + 1);
  return last_stamp_ns_;
}

std::string Database::next_id_locked() {
  for (;;) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s-%06lld", to_string(name_).c_str(),
                  static_cast<long long>(next_seq_));
    ++next_seq_;
    if (!index_by_id_.count(buf)) return buf;
  }
}

Segment Database::store_locked(const std::string& query_text, const std::string& answer_text,
                               const std::string& scenario_tag) {
  if (query_text.empty()) throw StoreError("store: query_text must be non-empty");
  Segment s;
  s.query_embedding = embed(*provider_, query_text);  // may throw; nothing stored then
  s.id = next_id_locked();
  s.query_text = query_text;
  s.answer_text = answer_text;
  s.scenario_tag = scenario_tag;
  s.created_at_ns = next_stamp_locked();
  s.updated_at_ns = s.created_at_ns;
  s.revision = 0;
  index_by_id_.emplace(s.id, segments_.size());
  segments_.push_back(s);
  return s;
}

Segment Database::store(const std::string& query_text, const std::string& answer_text,
                        const std::string& scenario_tag) {
  std::unique_lock lock(mutex_);
  return store_locked(query_text, answer_text, scenario_tag);
}

Segment Database::update(const std::string& segment_id, const std::string& new_answer) {
  std::unique_lock lock(mutex_);
  auto it = index_by_id_.find(segment_id);
  if (it == index_by_id_.end()) throw StoreError("update: unknown segment id " + segment_id);
  Segment& s = segments_[it->second];
  s.answer_text = new_answer;
  s.revision += 1;
  s.updated_at_ns = next_stamp_locked();
  return s;
}

WriteOutcome Database::store_or_update(const std::string& query_text,
                                       const std::string& answer_text,
                                       const std::string& scenario_tag,
                                       const std::vector<ScoredSegment>& retrieved,
                                       SeededRng& rng) {
  double u = rng.uniform();
  WriteOutcome out;
  if (u < config_.update_rate && !retrieved.empty()) {
    out.kind = WriteOutcome::Kind::Updated;
    out.segment = update(retrieved.front().segment.id, answer_text);
  } else {
    out.kind = WriteOutcome::Kind::Created;
    out.segment = store(query_text, answer_text, scenario_tag);
  }
  return out;
}

void Database::insert_raw(Segment segment) {
  std::unique_lock lock(mutex_);
  if (segment.query_embedding.size() != provider_->dimension())
    throw StoreError("insert_raw: embedding dimension mismatch for segment " + segment.id);
  if (index_by_id_.count(segment.id))
    throw StoreError("insert_raw: duplicate segment id " + segment.id);
  // keep generated ids and timestamps ahead of imported ones
  long long seq = 0;
  std::string prefix = to_string(name_) + "-";
  if (segment.id.rfind(prefix, 0) == 0 &&
      std::sscanf(segment.id.c_str() + prefix.size(), "%lld", &seq) == 1)
    next_seq_ = std::max(next_seq_, static_cast<std::int64_t>(seq) + 1);
  last_stamp_ns_ = std::max(last_stamp_ns_, segment.updated_at_ns);
  index_by_id_.emplace(segment.id, segments_.size());
  segments_.push_back(std::move(segment));
}

void Database::clear_scenario(const std::string& scenario_tag) {
  std::unique_lock lock(mutex_);
  std::vector<Segment> kept;
  kept.reserve(segments_.size());
  for (Segment& s : segments_)
    if (s.scenario_tag != scenario_tag) kept.push_back(std::move(s));
  segments_ = std::move(kept);
  index_by_id_.clear();
  for (std::size_t i = 0; i < segments_.size(); ++i) index_by_id_.emplace(segments_[i].id, i);
}

std::size_t Database::size() const {
  std::shared_lock lock(mutex_);
  return segments_.size();
}

std::vector<Segment> Database::snapshot() const {
  std::shared_lock lock(mutex_);
  return segments_;
}

std::vector<std::string> Database::scenarios() const {
  std::shared_lock lock(mutex_);
  std::set<std::string> tags;
  for (const Segment& s : segments_) tags.insert(s.scenario_tag);
  return {tags.begin(), tags.end()};
}

std::uint64_t Database::content_hash() const {
  std::shared_lock lock(mutex_);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const Segment& s : segments_) {
    h = fnv1a64(s.id, h);
    h = fnv1a64(s.query_text, h);
    h = fnv1a64(s.answer_text, h);
    h = fnv1a64(s.scenario_tag, h);
    h = fnv1a64(std::to_string(s.revision), h);
    h = fnv1a64(std::to_string(s.created_at_ns), h);
    h = fnv1a64(std::to_string(s.updated_at_ns), h);
    for (double x : s.query_embedding) h = fnv1a64(double_to_string(x), h);
  }
  return h;
}

std::string compose_pair_query(const std::string& observation_text,
                               const std::string& hypothesis_text) {
  return observation_text + kPairMarker + hypothesis_text;
}

std::pair<std::string, std::string> split_pair_query(const std::string& query_text) {
  std::size_t pos = query_text.find(kPairMarker);
  if (pos == std::string::npos) return {query_text, ""};
  return {query_text.substr(0, pos), query_text.substr(pos + std::string(kPairMarker).size())};
}

}  // namespace tacit
