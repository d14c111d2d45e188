#include "tacit/persistence.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tacit/util.hpp"

namespace tacit {

using ordered_json = nlohmann::ordered_json;

std::string segment_to_jsonl(const Segment& segment, DbName db) {
  ordered_json j;
  j["id"] = segment.id;
  j["db"] = to_string(db);
  j["scenario"] = segment.scenario_tag;
  j["query"] = segment.query_text;
  j["answer"] = segment.answer_text;
  j["embedding"] = segment.query_embedding;
  j["revision"] = segment.revision;
  j["created_at"] = format_rfc3339_ns(segment.created_at_ns);
  j["updated_at"] = format_rfc3339_ns(segment.updated_at_ns);
  return j.dump();
}

Segment segment_from_jsonl(const std::string& line, DbName expected_db) {
  ordered_json j = ordered_json::parse(line);
  if (db_name_from_string(j.at("db").get<std::string>()) != expected_db)
    throw StoreError("segment is tagged for a different database: " + line);
  Segment s;
  s.id = j.at("id").get<std::string>();
  s.scenario_tag = j.at("scenario").get<std::string>();
  s.query_text = j.at("query").get<std::string>();
  s.answer_text = j.at("answer").get<std::string>();
  s.query_embedding = j.at("embedding").get<std::vector<double>>();
  s.revision = j.at("revision").get<std::int64_t>();
  s.created_at_ns = parse_rfc3339_ns(j.at("created_at").get<std::string>());
  s.updated_at_ns = parse_rfc3339_ns(j.at("updated_at").get<std::string>());
  return s;
}

DatabaseStore::DatabaseStore(DatabaseConfig h, DatabaseConfig v, DatabaseConfig e,
                             std::shared_ptr<const EmbeddingProvider> provider)
    : provider_(std::move(provider)),
      h_(std::make_unique<Database>(DbName::H, h, provider_)),
      v_(std::make_unique<Database>(DbName::V, v, provider_)),
      e_(std::make_unique<Database>(DbName::E, e, provider_)) {}

Database& DatabaseStore::by_name(DbName name) {
  switch (name) {
    case DbName::H: return *h_;
    case DbName::V: return *v_;
    case DbName::E: return *e_;
  }
  throw StoreError("bad database name");
}

std::uint64_t DatabaseStore::content_hash() const {
  std::uint64_t h = h_->content_hash();
  h = fnv1a64(std::to_string(v_->content_hash()), h);
  h = fnv1a64(std::to_string(e_->content_hash()), h);
  return h;
}

namespace {

ordered_json config_to_json(const DatabaseConfig& c) {
  ordered_json j;
  j["threshold"] = c.threshold;
  j["top_k"] = c.top_k;
  j["update_rate"] = c.update_rate;
  return j;
}

DatabaseConfig config_from_json(const ordered_json& j) {
  DatabaseConfig c;
  c.threshold = j.at("threshold").get<double>();
  c.top_k = j.at("top_k").get<int>();
  c.update_rate = j.at("update_rate").get<double>();
  return c;
}

std::string snapshot_file_name(DbName db, const std::string& scenario) {
  return to_string(db) + "_" + scenario + ".jsonl";
}

}  // namespace

void export_snapshot(const DatabaseStore& store, const std::filesystem::path& dir,
                     const std::string& source_model) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  ordered_json manifest;
  manifest["schema_version"] = kSnapshotSchemaVersion;
  manifest["source_model"] = source_model;
  manifest["exported_at"] = format_rfc3339_ns(wall_clock_ns());
  manifest["embedding_dimension"] = store.provider().dimension();
  ordered_json cfgs;
  cfgs["H"] = config_to_json(store.h().config());
  cfgs["V"] = config_to_json(store.v().config());
  cfgs["E"] = config_to_json(store.e().config());
  manifest["configs"] = cfgs;
  ordered_json files = ordered_json::array();

  for (DbName name : {DbName::H, DbName::V, DbName::E}) {
    const Database& db = name == DbName::H ? store.h() : name == DbName::V ? store.v() : store.e();
    for (const std::string& scenario : db.scenarios()) {
      std::ostringstream out;
      for (const Segment& s : db.snapshot())
        if (s.scenario_tag == scenario) out << segment_to_jsonl(s, name) << "\n";
      std::string file = snapshot_file_name(name, scenario);
      atomic_write_file(dir / file, out.str());
      files.push_back(file);
    }
  }
  manifest["files"] = files;
  atomic_write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

SnapshotManifest read_snapshot_manifest(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::path manifest_path = dir / "manifest.json";
  if (!fs::exists(manifest_path))
    throw StoreError("snapshot manifest not found: " + manifest_path.string());
  ordered_json j = ordered_json::parse(read_file(manifest_path));
  SnapshotManifest m;
  m.schema_version = j.at("schema_version").get<int>();
  if (m.schema_version != kSnapshotSchemaVersion)
    throw StoreError("snapshot schema version mismatch: have " +
                     std::to_string(m.schema_version) + ", expected " +
                     std::to_string(kSnapshotSchemaVersion));
  m.source_model = j.value("source_model", "");
  m.exported_at = j.value("exported_at", "");
  m.embedding_dimension = j.value("embedding_dimension", std::size_t{0});
  if (j.contains("configs"))
    for (auto& [key, value] : j.at("configs").items()) m.configs[key] = config_from_json(value);
  return m;
}

SnapshotManifest import_snapshot(DatabaseStore& store, const std::filesystem::path& dir,
                                 bool replace) {
  namespace fs = std::filesystem;
  SnapshotManifest manifest = read_snapshot_manifest(dir);

  for (DbName name : {DbName::H, DbName::V, DbName::E}) {
    std::string prefix = to_string(name) + "_";
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (!entry.is_regular_file()) continue;
      std::string file = entry.path().filename().string();
      if (file.rfind(prefix, 0) != 0 || entry.path().extension() != ".jsonl") continue;
      std::string scenario = file.substr(prefix.size(), file.size() - prefix.size() - 6);
      Database& db = store.by_name(name);
      if (replace) db.clear_scenario(scenario);
      std::ifstream in(entry.path());
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        db.insert_raw(segment_from_jsonl(line, name));
      }
    }
  }
  return manifest;
}

DbCounts count_segments(const DatabaseStore& store) {
  DbCounts counts;
  for (DbName name : {DbName::H, DbName::V, DbName::E}) {
    const Database& db = name == DbName::H ? store.h() : name == DbName::V ? store.v() : store.e();
    std::string key = to_string(name);
    counts.per_db[key] = db.size();
    for (const Segment& s : db.snapshot()) counts.per_db_scenario[key][s.scenario_tag] += 1;
  }
  return counts;
}

}  // namespace tacit
