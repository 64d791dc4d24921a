#include "qamem/ad/checkpoint.hpp"

#include <algorithm>
#include <cstring>

#include "qamem/util/io.hpp"
#include "qamem/util/status.hpp"

namespace qamem::ad {

namespace {
constexpr char kMagic[4] = {'Q', 'M', 'C', 'P'};
constexpr uint32_t kVersion = 1;
}  // namespace

void save_checkpoint(const ParamStore& params, const std::string& path) {
  auto os = util::open_out(path, /*binary=*/true);
  util::write_bytes(os, kMagic, 4);
  util::write_u32(os, kVersion);
  uint8_t dtype = 8;
  util::write_bytes(os, &dtype, 1);
  util::write_u64(os, params.count());
  for (const auto& name : params.names()) {
    Tensor t = params.get(name);
    util::write_u32(os, static_cast<uint32_t>(name.size()));
    util::write_bytes(os, name.data(), name.size());
    util::write_u32(os, static_cast<uint32_t>(t.ndim()));
    for (int d : t.shape()) util::write_u64(os, static_cast<uint64_t>(d));
    auto v = t.value();
    util::write_bytes(os, v.data(), v.size() * sizeof(double));
  }
}

void load_checkpoint(ParamStore& params, const std::string& path) {
  auto is = util::open_in(path, /*binary=*/true);
  char magic[4];
  util::read_bytes(is, magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw util::IoError("checkpoint: bad magic in " + path);
  }
  uint32_t version = util::read_u32(is);
  if (version != kVersion) {
    throw util::IoError("checkpoint: unsupported version " + std::to_string(version));
  }
  uint8_t dtype;
  util::read_bytes(is, &dtype, 1);
  if (dtype != 8) throw util::IoError("checkpoint: unsupported dtype");
  uint64_t count = util::read_u64(is);
  for (uint64_t i = 0; i < count; ++i) {
    uint32_t name_len = util::read_u32(is);
    std::string name(name_len, '\0');
    util::read_bytes(is, name.data(), name_len);
    uint32_t rank = util::read_u32(is);
    util::require(rank >= 1 && rank <= 2, "checkpoint: bad rank for " + name);
    Shape shape(rank);
    for (uint32_t d = 0; d < rank; ++d) shape[d] = static_cast<int>(util::read_u64(is));
    std::vector<double> data(numel(shape));
    util::read_bytes(is, data.data(), data.size() * sizeof(double));
    if (params.contains(name)) {
      Tensor t = params.get(name);
      util::require(t.shape() == shape, "checkpoint: shape mismatch for " + name);
      auto dst = t.raw_mut();
      std::copy(data.begin(), data.end(), dst.begin());
    } else {
      params.create(name, std::move(shape), std::move(data));
    }
  }
}

}  // namespace qamem::ad
