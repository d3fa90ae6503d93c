#pragma once

#include <filesystem>

#include "gcg/param_store.hpp"

namespace gcg {

// Binary checkpoint container. Layout: magic "GCGCKPT1", then one record per
// parameter in name order: u32 name length, name bytes, u32 rank, u32 dims,
// then little-endian 32-bit reals. Files round-trip bit-exactly.
void save_checkpoint(const ParamStore& store, const std::filesystem::path& path);

ParamStore load_checkpoint(const std::filesystem::path& path);

// Loads values into an existing store, validating names and shapes.
void load_checkpoint_into(const std::filesystem::path& path, ParamStore& store);

}  // namespace gcg
