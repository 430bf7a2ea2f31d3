#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "dgm/embedding_set.h"

namespace dgm {

// .dgme layout (little-endian):
//   0   char[4]  magic "DGME"
//   4   u32      version (1)
//   8   u64      n
//   16  u64      d
//   24  u8       dtype (0 = float32)
//   25  u8       flags (bit0 = labels present)
//   26  u8[6]    reserved, zero
//   32  f32[n*d] row-major values
//   ..  i32[n]   labels, when bit0 is set
// An optional "<path>.json" sidecar carries encoder_id and source_id.

inline constexpr std::uint32_t kDgmeVersion = 1;
inline constexpr std::size_t kDgmeHeaderBytes = 32;
inline constexpr std::size_t kCsvMaxRows = 10'000;

struct EmbeddingHeader {
  std::uint32_t version = kDgmeVersion;
  std::uint64_t rows = 0;
  std::uint64_t dim = 0;
  std::uint8_t dtype = 0;
  bool has_labels = false;
  std::uint64_t file_bytes = 0;
};

/// Reads a .dgme file (or a .csv file, by extension) and its optional sidecar.
/// Errors name the offending byte offset (or CSV line).
EmbeddingSet read_embeddings(const std::filesystem::path& path);

/// Header fields only; validates magic, version, dtype and total size.
EmbeddingHeader read_header(const std::filesystem::path& path);

/// Writes atomically (temp file + rename). A ".csv" extension selects the CSV form.
void write_embeddings(const EmbeddingSet& set, const std::filesystem::path& path);

std::filesystem::path sidecar_path(const std::filesystem::path& path);

}  // namespace dgm
