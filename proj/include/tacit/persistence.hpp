#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "tacit/database.hpp"

namespace tacit {

inline constexpr int kSnapshotSchemaVersion = 1;

// One JSONL line per segment:
// {"id":...,"db":"H","scenario":...,"query":...,"answer":...,
//  "embedding":[...],"revision":...,"created_at":...,"updated_at":...}
std::string segment_to_jsonl(const Segment& segment, DbName db);
Segment segment_from_jsonl(const std::string& line, DbName expected_db);

// The H, V, E stores plus their shared embedding provider.
class DatabaseStore {
 public:
  DatabaseStore(DatabaseConfig h, DatabaseConfig v, DatabaseConfig e,
                std::shared_ptr<const EmbeddingProvider> provider);

  Database& h() { return *h_; }
  Database& v() { return *v_; }
  Database& e() { return *e_; }
  const Database& h() const { return *h_; }
  const Database& v() const { return *v_; }
  const Database& e() const { return *e_; }
  Database& by_name(DbName name);

  const EmbeddingProvider& provider() const { return *provider_; }
  std::uint64_t content_hash() const;

 private:
  std::shared_ptr<const EmbeddingProvider> provider_;
  std::unique_ptr<Database> h_, v_, e_;
};

// Snapshot directory layout: manifest.json plus one <db>_<scenario>.jsonl
// file per (database, scenario) pair present in the store.
struct SnapshotManifest {
  int schema_version = kSnapshotSchemaVersion;
  std::string source_model;
  std::string exported_at;
  std::size_t embedding_dimension = 0;            // 0 = unrecorded
  std::map<std::string, DatabaseConfig> configs;  // keyed "H"/"V"/"E"
};

void export_snapshot(const DatabaseStore& store, const std::filesystem::path& dir,
                     const std::string& source_model);

// replace=true clears each (db, scenario) partition present in the snapshot
// before inserting; replace=false merges (duplicate ids are an error).
// Throws StoreError on schema-version mismatch or a missing manifest.
SnapshotManifest import_snapshot(DatabaseStore& store, const std::filesystem::path& dir,
                                 bool replace);

SnapshotManifest read_snapshot_manifest(const std::filesystem::path& dir);

struct DbCounts {
  std::map<std::string, std::map<std::string, std::size_t>> per_db_scenario;  // db -> scenario -> n
  std::map<std::string, std::size_t> per_db;                                  // db -> n
};
DbCounts count_segments(const DatabaseStore& store);

}  // namespace tacit
