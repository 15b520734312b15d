#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "nam/network.hpp"

namespace nam {

inline constexpr std::uint32_t checkpoint_version = 1;

// Little-endian layout:
//   "NAMK"  u32 version
//   repeated until end of file:
//     u32 name length, UTF-8 name bytes,
//     u32 rank, rank x u64 dims, product(dims) x f64 values
// The first record, "meta.arch", encodes the ModelSpec.

void write_checkpoint(const std::filesystem::path& path, const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> read_checkpoint(const std::filesystem::path& path);

void save_network(const std::filesystem::path& path, Network& net);
/// Rebuilds the network from its architecture record and loads its state.
Network load_network(const std::filesystem::path& path);

} // namespace nam
