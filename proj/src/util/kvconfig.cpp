#include "qamem/util/kvconfig.hpp"

#include <cstdio>
#include <sstream>

#include "qamem/util/io.hpp"
#include "qamem/util/status.hpp"

namespace qamem::util {

namespace {
std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}
}  // namespace

KvConfig KvConfig::parse(const std::string& text) {
  KvConfig cfg;
  std::istringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    require(eq != std::string::npos,
            "config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    require(!key.empty(), "config line " + std::to_string(lineno) + ": empty key");
    cfg.kv_[key] = value;
  }
  return cfg;
}

KvConfig KvConfig::load(const std::string& path) {
  return parse(slurp_file(path));
}

std::string KvConfig::serialize() const {
  std::string out;
  for (const auto& [k, v] : kv_) {
    out += k;
    out += " = ";
    out += v;
    out += "\n";
  }
  return out;
}

void KvConfig::save(const std::string& path) const {
  write_file(path, serialize());
}

bool KvConfig::has(const std::string& key) const { return kv_.count(key) > 0; }

void KvConfig::set(const std::string& key, const std::string& value) {
  kv_[key] = value;
}

void KvConfig::set_int(const std::string& key, int64_t v) {
  kv_[key] = std::to_string(v);
}

void KvConfig::set_double(const std::string& key, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  kv_[key] = buf;
}

std::string KvConfig::get(const std::string& key, const std::string& fallback) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

std::string KvConfig::get_required(const std::string& key) const {
  auto it = kv_.find(key);
  require(it != kv_.end(), "missing required config key: " + key);
  return it->second;
}

int64_t KvConfig::get_int(const std::string& key, int64_t fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  try {
    return std::stoll(it->second);
  } catch (const std::exception&) {
    throw ValidationError("config key " + key + ": not an integer: " + it->second);
  }
}

double KvConfig::get_double(const std::string& key, double fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    throw ValidationError("config key " + key + ": not a number: " + it->second);
  }
}

bool KvConfig::get_bool(const std::string& key, bool fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ValidationError("config key " + key + ": not a boolean: " + v);
}

void KvConfig::merge(const KvConfig& other) {
  for (const auto& [k, v] : other.kv_) kv_[k] = v;
}

}  // namespace qamem::util
