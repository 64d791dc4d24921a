#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace qamem::util {

// Plain-text "key = value" configuration. '#' starts a comment, blank lines
// are ignored. Keys are kept sorted so serialization is deterministic.
class KvConfig {
 public:
  KvConfig() = default;

  static KvConfig parse(const std::string& text);
  static KvConfig load(const std::string& path);
  std::string serialize() const;
  void save(const std::string& path) const;

  bool has(const std::string& key) const;
  void set(const std::string& key, const std::string& value);
  void set_int(const std::string& key, int64_t v);
  void set_double(const std::string& key, double v);

  std::string get(const std::string& key, const std::string& fallback) const;
  std::string get_required(const std::string& key) const;
  int64_t get_int(const std::string& key, int64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  const std::map<std::string, std::string>& entries() const { return kv_; }
  // Overlay: values in `other` win.
  void merge(const KvConfig& other);

 private:
  std::map<std::string, std::string> kv_;
};

}  // namespace qamem::util
