#pragma once

#include <filesystem>
#include <vector>

#include "ccreid/world.hpp"

namespace ccreid {

/// A dataset file: the world config that produced it (so the augmentation
/// generator can be rebuilt) plus its sample records.
struct Dataset {
  WorldConfig config;
  std::vector<Sample> samples;
};

inline constexpr std::uint32_t kDatasetFormatVersion = 1;

/// Binary layout, little-endian:
///   "CCRDSET\0" | u32 version | u32 dim | u64 count | world config fields
///   then `count` records of: i32 identity | i32 clothing | i32 camera |
///   u8 synthetic | u8 split | u16 reserved | dim × f64.
/// Throws IoError or DimensionMismatch (sample size differs from config dim).
void write_dataset(const std::filesystem::path& path, const Dataset& dataset);

/// Throws IoError when the file cannot be opened and FormatError (naming the
/// header field or record index) for malformed content.
Dataset read_dataset(const std::filesystem::path& path);

/// Columns: identity_id, clothing_id, camera_id, is_synthetic, split, v0..v{D-1}.
void write_dataset_csv(const std::filesystem::path& path, const std::vector<Sample>& samples);

Dataset dataset_from_world(const SyntheticWorld& world);

}  // namespace ccreid
