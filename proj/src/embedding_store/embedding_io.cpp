#include "dgm/embedding_io.h"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <sstream>
#include <string>
#include <unistd.h>

#include "dgm/error.h"

namespace dgm {

namespace fs = std::filesystem;

namespace {

constexpr std::array<char, 4> kMagic = {'D', 'G', 'M', 'E'};

template <typename T>
T load_le(const unsigned char* p) {
  T value;
  std::memcpy(&value, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    auto* b = reinterpret_cast<unsigned char*>(&value);
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
  }
  return value;
}

template <typename T>
void store_le(std::string& out, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
  }
  out.append(reinterpret_cast<const char*>(bytes), sizeof(T));
}

std::string at_offset(std::uint64_t offset) { return " at byte offset " + std::to_string(offset); }

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoFailure, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) fail(ErrorCode::IoFailure, "read error on " + path.string());
  return std::move(buffer).str();
}

bool is_csv(const fs::path& path) {
  auto ext = path.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext == ".csv";
}

// Checks the fixed header and the exact payload size; returns parsed fields.
EmbeddingHeader parse_header(const std::string& bytes, const fs::path& path) {
  const auto size = static_cast<std::uint64_t>(bytes.size());
  if (size < kMagic.size() || std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) {
    fail(ErrorCode::BadMagic, path.string() + ": expected \"DGME\"" + at_offset(0));
  }
  if (size < kDgmeHeaderBytes) {
    fail(ErrorCode::TruncatedPayload, path.string() + ": header ends early" + at_offset(size));
  }
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  EmbeddingHeader h;
  h.version = load_le<std::uint32_t>(p + 4);
  if (h.version != kDgmeVersion) {
    fail(ErrorCode::VersionUnsupported,
         path.string() + ": version " + std::to_string(h.version) + " is not supported" + at_offset(4));
  }
  h.rows = load_le<std::uint64_t>(p + 8);
  h.dim = load_le<std::uint64_t>(p + 16);
  h.dtype = p[24];
  const std::uint8_t flags = p[25];
  h.has_labels = (flags & 1U) != 0;
  h.file_bytes = size;
  if (h.dtype != 0) {
    fail(ErrorCode::UnsupportedDtype, path.string() + ": dtype " + std::to_string(h.dtype) + at_offset(24));
  }
  if ((flags & ~1U) != 0) fail(ErrorCode::BadHeader, path.string() + ": unknown flag bits" + at_offset(25));
  for (std::size_t i = 26; i < kDgmeHeaderBytes; ++i) {
    if (p[i] != 0) fail(ErrorCode::BadHeader, path.string() + ": reserved byte is not zero" + at_offset(i));
  }
  if (h.rows == 0 || h.dim == 0) fail(ErrorCode::EmptySet, path.string() + ": header declares an empty set");

  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  if (h.rows > kMax / h.dim || h.rows * h.dim > (kMax - kDgmeHeaderBytes) / 8) {
    fail(ErrorCode::BadHeader, path.string() + ": header sizes overflow" + at_offset(8));
  }
  const std::uint64_t expected =
      kDgmeHeaderBytes + h.rows * h.dim * sizeof(float) + (h.has_labels ? h.rows * sizeof(std::int32_t) : 0);
  if (size < expected) {
    fail(ErrorCode::TruncatedPayload, path.string() + ": expected " + std::to_string(expected) +
                                          " bytes, file has " + std::to_string(size) + at_offset(size));
  }
  if (size > expected) {
    fail(ErrorCode::TrailingBytes,
         path.string() + ": " + std::to_string(size - expected) + " unexpected bytes" + at_offset(expected));
  }
  return h;
}

EmbeddingMeta read_sidecar(const fs::path& path) {
  EmbeddingMeta meta;
  const fs::path side = sidecar_path(path);
  if (!fs::exists(side)) return meta;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(slurp(side));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, side.string() + ": " + e.what());
  }
  if (j.contains("encoder_id")) meta.encoder_id = j.at("encoder_id").get<std::string>();
  if (j.contains("source_id")) meta.source_id = j.at("source_id").get<std::string>();
  return meta;
}

EmbeddingSet read_dgme(const fs::path& path) {
  const std::string bytes = slurp(path);
  const EmbeddingHeader h = parse_header(bytes, path);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t count = h.rows * h.dim;
  std::vector<float> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t offset = kDgmeHeaderBytes + i * sizeof(float);
    values[i] = load_le<float>(p + offset);
    if (!std::isfinite(values[i])) {
      fail(ErrorCode::NonFiniteValue, path.string() + ": row " + std::to_string(i / h.dim) + ", column " +
                                          std::to_string(i % h.dim) + at_offset(offset));
    }
  }
  std::optional<std::vector<std::int32_t>> labels;
  if (h.has_labels) {
    labels.emplace(h.rows);
    const std::size_t base = kDgmeHeaderBytes + count * sizeof(float);
    for (std::size_t i = 0; i < h.rows; ++i) {
      const std::size_t offset = base + i * sizeof(std::int32_t);
      (*labels)[i] = load_le<std::int32_t>(p + offset);
      if ((*labels)[i] < 0) fail(ErrorCode::InvalidLabel, path.string() + ": negative label" + at_offset(offset));
    }
  }
  return EmbeddingSet(h.rows, h.dim, std::move(values), std::move(labels), read_sidecar(path));
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  for (auto& f : fields) {
    while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
    while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r')) f.remove_suffix(1);
  }
  return fields;
}

EmbeddingSet read_csv(const fs::path& path) {
  const std::string text = slurp(path);
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  auto where = [&] { return path.string() + ":" + std::to_string(line_no); };

  if (!std::getline(in, line)) fail(ErrorCode::EmptySet, path.string() + ": empty CSV");
  ++line_no;
  const auto header = split_commas(line);
  bool has_label = !header.empty() && header.back() == "label";
  const std::size_t dim = header.size() - (has_label ? 1 : 0);
  require(dim >= 1, ErrorCode::ParseError, where() + ": header has no feature columns");
  for (std::size_t j = 0; j < dim; ++j) {
    require(header[j] == "f" + std::to_string(j), ErrorCode::ParseError,
            where() + ": expected column f" + std::to_string(j));
  }

  std::vector<float> values;
  std::vector<std::int32_t> labels;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_commas(line);
    require(fields.size() == header.size(), ErrorCode::ParseError, where() + ": wrong number of fields");
    for (std::size_t j = 0; j < dim; ++j) {
      float v = 0.0F;
      const auto [ptr, ec] = std::from_chars(fields[j].data(), fields[j].data() + fields[j].size(), v);
      require(ec == std::errc() && ptr == fields[j].data() + fields[j].size(), ErrorCode::ParseError,
              where() + ": bad number in column " + std::to_string(j));
      require(std::isfinite(v), ErrorCode::NonFiniteValue, where() + ": column " + std::to_string(j));
      values.push_back(v);
    }
    if (has_label) {
      std::int32_t label = 0;
      const auto f = fields.back();
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), label);
      require(ec == std::errc() && ptr == f.data() + f.size(), ErrorCode::ParseError, where() + ": bad label");
      labels.push_back(label);
    }
    ++rows;
    require(rows <= kCsvMaxRows, ErrorCode::ParseError,
            path.string() + ": CSV input is limited to " + std::to_string(kCsvMaxRows) + " rows; use .dgme");
  }
  std::optional<std::vector<std::int32_t>> maybe_labels;
  if (has_label) maybe_labels = std::move(labels);
  return EmbeddingSet(rows, dim, std::move(values), std::move(maybe_labels), read_sidecar(path));
}

std::string encode_dgme(const EmbeddingSet& set) {
  std::string out;
  out.reserve(kDgmeHeaderBytes + set.values().size_bytes() + set.labels().size_bytes());
  out.append(kMagic.data(), kMagic.size());
  store_le<std::uint32_t>(out, kDgmeVersion);
  store_le<std::uint64_t>(out, set.rows());
  store_le<std::uint64_t>(out, set.dim());
  out.push_back(0);
  out.push_back(set.has_labels() ? 1 : 0);
  out.append(6, '\0');
  for (float v : set.values()) store_le<float>(out, v);
  for (std::int32_t label : set.labels()) store_le<std::int32_t>(out, label);
  return out;
}

std::string encode_csv(const EmbeddingSet& set) {
  std::string out;
  for (std::size_t j = 0; j < set.dim(); ++j) {
    if (j > 0) out += ',';
    out += "f" + std::to_string(j);
  }
  if (set.has_labels()) out += ",label";
  out += '\n';
  char buf[64];
  for (std::size_t i = 0; i < set.rows(); ++i) {
    const auto row = set.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j > 0) out += ',';
      const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), row[j]);
      out.append(buf, ptr);
    }
    if (set.has_labels()) out += "," + std::to_string(set.labels()[i]);
    out += '\n';
  }
  return out;
}

void write_atomically(const fs::path& path, const std::string& bytes) {
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::IoFailure, "cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      fs::remove(tmp, ignored);
      fail(ErrorCode::IoFailure, "write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    fail(ErrorCode::IoFailure, "cannot move " + tmp.string() + " to " + path.string());
  }
}

}  // namespace

fs::path sidecar_path(const fs::path& path) {
  fs::path side = path;
  side += ".json";
  return side;
}

EmbeddingHeader read_header(const fs::path& path) {
  if (is_csv(path)) {
    const EmbeddingSet set = read_csv(path);
    EmbeddingHeader h;
    h.rows = set.rows();
    h.dim = set.dim();
    h.has_labels = set.has_labels();
    h.file_bytes = fs::file_size(path);
    return h;
  }
  return parse_header(slurp(path), path);
}

EmbeddingSet read_embeddings(const fs::path& path) { return is_csv(path) ? read_csv(path) : read_dgme(path); }

void write_embeddings(const EmbeddingSet& set, const fs::path& path) {
  if (is_csv(path)) {
    require(set.rows() <= kCsvMaxRows, ErrorCode::InvalidArgument, "CSV output is limited to 10000 rows");
    write_atomically(path, encode_csv(set));
  } else {
    write_atomically(path, encode_dgme(set));
  }
  if (!set.meta().empty()) {
    nlohmann::json side = {{"encoder_id", set.meta().encoder_id}, {"source_id", set.meta().source_id}};
    write_atomically(sidecar_path(path), side.dump(2) + "\n");
  }
}

}  // namespace dgm
