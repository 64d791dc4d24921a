#include "qamem/util/io.hpp"

#include <sstream>

#include "qamem/util/status.hpp"

namespace qamem::util {

void write_u32(std::ostream& os, uint32_t v) { write_bytes(os, &v, 4); }
void write_u64(std::ostream& os, uint64_t v) { write_bytes(os, &v, 8); }
void write_f64(std::ostream& os, double v) { write_bytes(os, &v, 8); }

void write_bytes(std::ostream& os, const void* p, size_t n) {
  os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  if (!os) throw IoError("write failed");
}

uint32_t read_u32(std::istream& is) {
  uint32_t v;
  read_bytes(is, &v, 4);
  return v;
}

uint64_t read_u64(std::istream& is) {
  uint64_t v;
  read_bytes(is, &v, 8);
  return v;
}

double read_f64(std::istream& is) {
  double v;
  read_bytes(is, &v, 8);
  return v;
}

void read_bytes(std::istream& is, void* p, size_t n) {
  is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (!is) throw IoError("read failed (truncated file?)");
}

std::string slurp_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!f) throw IoError("write failed: " + path);
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::ofstream open_out(const std::string& path, bool binary) {
  std::ofstream f(path, binary ? std::ios::binary : std::ios::out);
  if (!f) throw IoError("cannot open " + path + " for writing");
  return f;
}

std::ifstream open_in(const std::string& path, bool binary) {
  std::ifstream f(path, binary ? std::ios::binary : std::ios::in);
  if (!f) throw IoError("cannot open " + path);
  return f;
}

}  // namespace qamem::util
