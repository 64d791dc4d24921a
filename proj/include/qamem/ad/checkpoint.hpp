#pragma once

#include <string>

#include "qamem/ad/param_store.hpp"

namespace qamem::ad {

// Little-endian binary checkpoint: magic "QMCP", u32 version, u8 dtype
// (8 = f64), u64 parameter count, then per parameter: u32 name length,
// UTF-8 name, u32 rank, u64 dims, raw values. Round-trips bit-exactly.
void save_checkpoint(const ParamStore& params, const std::string& path);

// Loads into `params`: existing names are overwritten in place (shapes must
// match), unknown names are created.
void load_checkpoint(ParamStore& params, const std::string& path);

}  // namespace qamem::ad
