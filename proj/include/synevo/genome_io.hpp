#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "synevo/genome.hpp"

namespace synevo {

// Genome container, all integers little-endian:
//
//   offset 0   8 bytes  magic "SYNEVOGN"
//   offset 8   u32      format version (kGenomeFormatVersion)
//   offset 12  u32      schema length L
//   offset 16  L bytes  schema text (id, parent, generation, input, layers)
//   ...        payload  per weighted layer: weights (f64), bias (f64),
//                       synapse mask bits, cluster mask bits (LSB first,
//                       padded to a whole byte)
//   end - 4    u32      CRC-32 of every preceding byte
//
// docs/genome-format.md has the full description.
inline constexpr char kGenomeMagic[8] = {'S', 'Y', 'N', 'E', 'V', 'O', 'G', 'N'};
inline constexpr std::uint32_t kGenomeFormatVersion = 1;

std::vector<std::uint8_t> encode_genome(const NetworkGenome& genome);
NetworkGenome decode_genome(std::span<const std::uint8_t> bytes);

void save_genome(const NetworkGenome& genome, const std::filesystem::path& path);
NetworkGenome load_genome(const std::filesystem::path& path);

// One-line-per-layer text form used inside the schema block.
std::string format_layer(const LayerSpec& layer);
LayerSpec parse_layer(const std::string& line);

}  // namespace synevo
