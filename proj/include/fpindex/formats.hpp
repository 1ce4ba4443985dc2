#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fpindex/descriptor.hpp"
#include "fpindex/geometry.hpp"
#include "fpindex/template.hpp"
#include "fpindex/training.hpp"

namespace fpindex {

// ---------------------------------------------------------------------------
// Little-endian byte streams
// ---------------------------------------------------------------------------

class ByteWriter {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u32(std::uint32_t v);
  void f64(double v);
  void raw(std::string_view s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }

  const std::vector<std::uint8_t>& bytes() const { return bytes_; }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  std::uint8_t u8();
  std::uint32_t u32();
  double f64();
  std::string raw(std::size_t n);
  /// Checks a 4-byte magic, naming the offending bytes on mismatch.
  void expect_magic(std::string_view magic, std::string_view what);
  bool at_end() const { return pos_ == bytes_.size(); }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const;

  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

/// Shortest text form that parses back to the identical double.
std::string format_double(double v);
double parse_double(std::string_view token);

/// Printable description of raw bytes, e.g. `"XPIX" (58 50 49 58)`.
std::string describe_bytes(const std::uint8_t* data, std::size_t n);

// ---------------------------------------------------------------------------
// Minutiae (FPMIN) and templates (FPTPL) -- UTF-8 text
// ---------------------------------------------------------------------------

std::string format_minutiae(const std::vector<Minutia>& minutiae);
std::vector<Minutia> parse_minutiae(std::string_view text);
std::vector<Minutia> read_minutiae(const std::filesystem::path& path);
void write_minutiae(const std::filesystem::path& path, const std::vector<Minutia>& minutiae);

std::string format_template(const Template& t);
/// Descriptor lines are optional (all or none).
Template parse_template(std::string_view text);
Template read_template(const std::filesystem::path& path);
void write_template(const std::filesystem::path& path, const Template& t);

// Ground-truth labels parallel to a minutiae file: `FPGT 1 <count>` then one
// integer per line, -1 for a minutia with no ground-truth identity.
std::string format_truth(const std::vector<int>& labels);
std::vector<int> parse_truth(std::string_view text);

// ---------------------------------------------------------------------------
// Transform and codebook (FPIX binary, canonical; JSON mirror for inspection)
// ---------------------------------------------------------------------------

inline constexpr std::uint32_t kFpixVersion = 1;
inline constexpr std::uint8_t kRecordTransform = 1;
inline constexpr std::uint8_t kRecordCodebook = 2;

std::vector<std::uint8_t> encode_transform(const DescriptorTransform& t);
DescriptorTransform decode_transform(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> encode_codebook(const Codebook& cb);
Codebook decode_codebook(const std::vector<std::uint8_t>& bytes);

void save_transform(const std::filesystem::path& path, const DescriptorTransform& t);
DescriptorTransform load_transform(const std::filesystem::path& path);
void save_codebook(const std::filesystem::path& path, const Codebook& cb);
Codebook load_codebook(const std::filesystem::path& path);

nlohmann::json transform_to_json(const DescriptorTransform& t);
DescriptorTransform transform_from_json(const nlohmann::json& j);
nlohmann::json codebook_to_json(const Codebook& cb);
Codebook codebook_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// Corpus manifest
// ---------------------------------------------------------------------------

// One impression per line: `subject_id impression image.pgm minutiae.fpmin [truth.fpgt]`.
// Blank lines and lines starting with '#' are ignored; relative paths resolve
// against the manifest's directory.
struct ManifestEntry {
  std::string subject_id;
  int impression = 0;
  std::filesystem::path image;
  std::filesystem::path minutiae;
  std::filesystem::path truth;  // empty when absent
};

std::vector<ManifestEntry> parse_manifest(std::string_view text,
                                          const std::filesystem::path& base_dir);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);
std::string format_manifest(const std::vector<ManifestEntry>& entries);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace fpindex
