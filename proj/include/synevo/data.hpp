#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "synevo/tensor.hpp"

namespace synevo {

enum class Split : std::uint8_t { train, test };

// Images are (n, channels, height, width) in [0, 1].
struct Dataset {
  Tensor images;
  std::vector<int> labels;
  std::size_t class_count = 0;
  Split split = Split::train;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t sample_volume() const;
  // Copies samples [first, first + count) in the given order into a batch.
  Tensor gather(std::span<const std::size_t> order, std::size_t first, std::size_t count) const;
  std::vector<std::size_t> class_histogram() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Throws InvalidInput if labels and images disagree or a label is out of range.
void check_dataset(const Dataset& data);

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

struct IdxHeader {
  std::uint32_t magic = 0;
  std::vector<std::uint32_t> dims;
};

// Reads only the header. Files ending in .gz are decompressed transparently.
IdxHeader read_idx_header(const std::filesystem::path& path);

// Big-endian IDX; u8 pixels scaled by 1/255. class_count = max label + 1
// unless given explicitly.
Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels, Split split = Split::train,
                 std::size_t class_count = 0);

// Pixels are written as round(255 * v). Gzip-compressed when the path ends in .gz.
void write_idx(const Dataset& data, const std::filesystem::path& images, const std::filesystem::path& labels);

// Class-conditional Gaussian blobs on a single-channel size x size image.
// Each class has its own random template; samples add N(0, spread^2) noise
// and clamp to [0, 1]. Labels cycle through the classes before shuffling.
Dataset synth_blobs(std::size_t n, std::size_t class_count, std::size_t image_size, std::uint64_t seed,
                    double spread = 0.05);

// Class-stratified subset of n samples, kept in original order.
Dataset subsample(const Dataset& data, std::size_t n, std::uint64_t seed);

}  // namespace synevo
