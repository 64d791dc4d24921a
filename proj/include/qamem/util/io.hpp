#pragma once

#include <cstdint>
#include <fstream>
#include <span>
#include <string>
#include <vector>

namespace qamem::util {

// Little-endian binary primitives. x86 is little-endian; raw writes are the
// wire format.
void write_u32(std::ostream& os, uint32_t v);
void write_u64(std::ostream& os, uint64_t v);
void write_f64(std::ostream& os, double v);
void write_bytes(std::ostream& os, const void* p, size_t n);
uint32_t read_u32(std::istream& is);
uint64_t read_u64(std::istream& is);
double read_f64(std::istream& is);
void read_bytes(std::istream& is, void* p, size_t n);

std::string slurp_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);
std::vector<std::string> read_lines(const std::string& path);

std::ofstream open_out(const std::string& path, bool binary = false);
std::ifstream open_in(const std::string& path, bool binary = false);

}  // namespace qamem::util
