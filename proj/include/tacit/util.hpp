#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace tacit {

// 64-bit FNV-1a. Used for deterministic token hashing and content hashes.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);

// Maximal runs of ASCII [a-z0-9] after lowercasing; everything else separates.
std::vector<std::string> lowercase_tokens(std::string_view text);

// RFC 3339 UTC with nanosecond precision, e.g. "2026-08-10T12:00:00.000000001Z".
std::string format_rfc3339_ns(std::int64_t ns_since_epoch);
std::int64_t parse_rfc3339_ns(const std::string& text);  // throws std::invalid_argument

std::int64_t wall_clock_ns();

// Shortest round-trip decimal form of a double ("inf" / "-inf" for infinities).
std::string double_to_string(double value);
double double_from_string(const std::string& text);  // accepts "inf"/"-inf"

std::string read_file(const std::filesystem::path& path);  // throws on failure

// Write via temp file in the same directory, then rename over the target.
void atomic_write_file(const std::filesystem::path& path, std::string_view content);

// Exclusive lock file; throws if already held. Removed on destruction.
class DirectoryLock {
 public:
  explicit DirectoryLock(const std::filesystem::path& dir);
  ~DirectoryLock();
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  std::filesystem::path lock_path_;
};

}  // namespace tacit
