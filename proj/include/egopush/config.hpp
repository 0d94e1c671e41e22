#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace egopush {

// Flat dotted-key config ("physics.mu_ground = 0.4"). Lines are
// `key = value`, `#` starts a comment. Values are stored as strings and
// parsed on access; unknown keys are kept so presets can round-trip.
class Config {
 public:
  Config() = default;

  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text);

  bool has(const std::string& key) const;
  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, const char* value);
  void set(const std::string& key, double value);
  void set(const std::string& key, int value);
  void set(const std::string& key, bool value);

  std::string get_str(const std::string& key, const std::string& dflt) const;
  double get_double(const std::string& key, double dflt) const;
  int get_int(const std::string& key, int dflt) const;
  std::int64_t get_i64(const std::string& key, std::int64_t dflt) const;
  bool get_bool(const std::string& key, bool dflt) const;

  // Canonical (sorted, normalized) dump; also what gets hashed.
  std::string dump() const;
  std::uint64_t hash() const;

  void merge(const Config& overrides);
  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

std::uint64_t fnv1a64(const std::string& s);

}  // namespace egopush
