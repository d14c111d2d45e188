#include "tacit/util.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <system_error>

namespace tacit {

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<std::string> lowercase_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    unsigned char lc = static_cast<unsigned char>(std::tolower(c));
    if ((lc >= 'a' && lc <= 'z') || (lc >= '0' && lc <= '9')) {
      current.push_back(static_cast<char>(lc));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::string format_rfc3339_ns(std::int64_t ns_since_epoch) {
  const std::int64_t kBillion = 1000000000LL;
  std::int64_t secs = ns_since_epoch / kBillion;
  std::int64_t nanos = ns_since_epoch % kBillion;
  if (nanos < 0) {
    nanos += kBillion;
    secs -= 1;
  }
  std::time_t t = static_cast<std::time_t>(secs);
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%09lldZ",
                tm_utc.tm_year + 1900, tm_utc.tm_mon + 1, tm_utc.tm_mday,
                tm_utc.tm_hour, tm_utc.tm_min, tm_utc.tm_sec,
                static_cast<long long>(nanos));
  return buf;
}

std::int64_t parse_rfc3339_ns(const std::string& text) {
  int year = 0, month = 0, day = 0, hour = 0, minute = 0, second = 0;
  long long nanos = 0;
  char frac[16] = {0};
  int matched = std::sscanf(text.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d.%15[0-9]Z",
                            &year, &month, &day, &hour, &minute, &second, frac);
  if (matched == 6) {
    // allow a plain "...:SSZ" with no fraction
    matched = std::sscanf(text.c_str(), "%4d-%2d-%2dT%2d:%2d:%2dZ",
                          &year, &month, &day, &hour, &minute, &second);
    if (matched != 6) throw std::invalid_argument("bad rfc3339 timestamp: " + text);
  } else if (matched == 7) {
    std::string f(frac);
    f.resize(9, '0');  // pad/truncate to nanoseconds
    nanos = std::stoll(f);
  } else {
    throw std::invalid_argument("bad rfc3339 timestamp: " + text);
  }
  std::tm tm_utc{};
  tm_utc.tm_year = year - 1900;
  tm_utc.tm_mon = month - 1;
  tm_utc.tm_mday = day;
  tm_utc.tm_hour = hour;
  tm_utc.tm_min = minute;
  tm_utc.tm_sec = second;
  std::time_t secs = timegm(&tm_utc);
  return static_cast<std::int64_t>(secs) * 1000000000LL + nanos;
}

std::int64_t wall_clock_ns() {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::string double_to_string(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw std::runtime_error("double_to_string failed");
  return std::string(buf, ptr);
}

double double_from_string(const std::string& text) {
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw std::invalid_argument("bad number: " + text);
  return value;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read file: " + path.string());
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return content;
}

void atomic_write_file(const std::filesystem::path& path, std::string_view content) {
  namespace fs = std::filesystem;
  fs::path dir = path.parent_path();
  if (!dir.empty()) fs::create_directories(dir);
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write file: " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

DirectoryLock::DirectoryLock(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  lock_path_ = dir / ".lock";
  std::FILE* f = std::fopen(lock_path_.c_str(), "wx");
  if (!f) {
    throw std::runtime_error("run directory is locked by another process: " +
                             lock_path_.string());
  }
  std::fclose(f);
}

DirectoryLock::~DirectoryLock() {
  std::error_code ec;
  std::filesystem::remove(lock_path_, ec);
}

}  // namespace tacit
