#include "fpindex/formats.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

#include "fpindex/error.hpp"
#include "fpindex/image.hpp"

namespace fpindex {

// ---------------------------------------------------------------------------
// Byte streams
// ---------------------------------------------------------------------------

void ByteWriter::u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::f64(double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

void ByteReader::need(std::size_t n) const {
  require(bytes_.size() - pos_ >= n, ErrorKind::format,
          "unexpected end of data at byte " + std::to_string(pos_) + " (need " +
              std::to_string(n) + " more)");
}

std::uint8_t ByteReader::u8() {
  need(1);
  return bytes_[pos_++];
}

std::uint32_t ByteReader::u32() {
  need(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
  return v;
}

double ByteReader::f64() {
  need(8);
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
  return std::bit_cast<double>(bits);
}

std::string ByteReader::raw(std::size_t n) {
  need(n);
  std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
  pos_ += n;
  return s;
}

void ByteReader::expect_magic(std::string_view magic, std::string_view what) {
  const std::size_t n = std::min(magic.size(), bytes_.size() - pos_);
  if (n < magic.size() || std::memcmp(bytes_.data() + pos_, magic.data(), n) != 0)
    fail(ErrorKind::format, std::string(what) + ": bad magic " +
                                describe_bytes(bytes_.data() + pos_, n) + ", expected \"" +
                                std::string(magic) + "\"");
  pos_ += magic.size();
}

std::string describe_bytes(const std::uint8_t* data, std::size_t n) {
  std::string printable = "\"";
  std::string hex = "(";
  static constexpr char kHex[] = "0123456789abcdef";
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t b = data[i];
    printable += (b >= 0x20 && b < 0x7f) ? static_cast<char>(b) : '.';
    if (i) hex += ' ';
    hex += kHex[b >> 4];
    hex += kHex[b & 0xf];
  }
  return printable + "\" " + hex + ")";
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view token) {
  double v = 0.0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  require(res.ec == std::errc() && res.ptr == token.data() + token.size(), ErrorKind::format,
          "invalid number '" + std::string(token) + "'");
  require(std::isfinite(v), ErrorKind::format, "non-finite number '" + std::string(token) + "'");
  return v;
}

namespace {

long parse_integer(std::string_view token) {
  long v = 0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  require(res.ec == std::errc() && res.ptr == token.data() + token.size(), ErrorKind::format,
          "invalid integer '" + std::string(token) + "'");
  return v;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

// Non-empty lines, each tokenised, with 1-based line numbers for diagnostics.
struct Line {
  std::size_t number;
  std::vector<std::string_view> tokens;
};

std::vector<Line> tokenised_lines(std::string_view text) {
  std::vector<Line> lines;
  std::size_t number = 0;
  while (!text.empty()) {
    ++number;
    const std::size_t end = text.find('\n');
    const std::string_view line = text.substr(0, end);
    text = end == std::string_view::npos ? std::string_view{} : text.substr(end + 1);
    auto tokens = split_ws(line);
    if (!tokens.empty()) lines.push_back({number, std::move(tokens)});
  }
  return lines;
}

[[noreturn]] void line_error(const Line& line, const std::string& msg) {
  fail(ErrorKind::format, "line " + std::to_string(line.number) + ": " + msg);
}

template <typename F>
auto at_line(const Line& line, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    line_error(line, e.what());
  }
}

std::string minutia_line(const Minutia& m) {
  return format_double(m.x) + " " + format_double(m.y) + " " + format_double(m.theta) + " " +
         kind_code(m.kind);
}

Minutia parse_minutia_line(const Line& line) {
  if (line.tokens.size() != 4) line_error(line, "expected `x y theta kind`");
  return at_line(line, [&] {
    require(line.tokens[3].size() == 1, ErrorKind::format, "minutia kind must be E, B or U");
    return Minutia(parse_double(line.tokens[0]), parse_double(line.tokens[1]),
                   parse_double(line.tokens[2]), kind_from_code(line.tokens[3][0]));
  });
}

std::size_t parse_header(const std::vector<Line>& lines, std::string_view magic,
                         std::size_t fields) {
  require(!lines.empty(), ErrorKind::format, "empty file, expected " + std::string(magic));
  const Line& h = lines.front();
  if (h.tokens.size() != fields || h.tokens[0] != magic)
    line_error(h, "expected header `" + std::string(magic) + " 1 <count>...`");
  if (at_line(h, [&] { return parse_integer(h.tokens[1]); }) != 1)
    line_error(h, "unsupported " + std::string(magic) + " version " + std::string(h.tokens[1]));
  const long count = at_line(h, [&] { return parse_integer(h.tokens[2]); });
  if (count < 0) line_error(h, "negative count");
  return static_cast<std::size_t>(count);
}

template <typename Parse>
auto with_path(const std::filesystem::path& path, Parse&& parse) {
  try {
    return parse();
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// FPMIN
// ---------------------------------------------------------------------------

std::string format_minutiae(const std::vector<Minutia>& minutiae) {
  std::string out = "FPMIN 1 " + std::to_string(minutiae.size()) + "\n";
  for (const Minutia& m : minutiae) out += minutia_line(m) + "\n";
  return out;
}

std::vector<Minutia> parse_minutiae(std::string_view text) {
  const auto lines = tokenised_lines(text);
  const std::size_t count = parse_header(lines, "FPMIN", 3);
  require(lines.size() - 1 == count, ErrorKind::format,
          "FPMIN header announces " + std::to_string(count) + " minutiae, found " +
              std::to_string(lines.size() - 1));
  std::vector<Minutia> out;
  out.reserve(count);
  for (std::size_t i = 1; i < lines.size(); ++i) out.push_back(parse_minutia_line(lines[i]));
  return out;
}

std::vector<Minutia> read_minutiae(const std::filesystem::path& path) {
  return with_path(path, [&] { return parse_minutiae(read_text_file(path)); });
}

void write_minutiae(const std::filesystem::path& path, const std::vector<Minutia>& minutiae) {
  write_text_file(path, format_minutiae(minutiae));
}

// ---------------------------------------------------------------------------
// FPTPL
// ---------------------------------------------------------------------------

std::string format_template(const Template& t) {
  std::string out = "FPTPL 1 " + std::to_string(t.minutiae.size()) + " " +
                    std::to_string(t.source_count) + "\n";
  const bool with_descriptors = !t.descriptors.empty();
  for (std::size_t i = 0; i < t.minutiae.size(); ++i) {
    out += minutia_line(t.minutiae[i]) + "\n";
    if (!with_descriptors) continue;
    const auto& d = t.descriptors[i];
    out += "D" + std::to_string(d.size());
    for (Eigen::Index k = 0; k < d.size(); ++k) out += " " + format_double(d[k]);
    out += "\n";
  }
  return out;
}

Template parse_template(std::string_view text) {
  const auto lines = tokenised_lines(text);
  const std::size_t count = parse_header(lines, "FPTPL", 4);
  Template t;
  const long sources = at_line(lines[0], [&] { return parse_integer(lines[0].tokens[3]); });
  if (sources < 1) line_error(lines[0], "source_count must be >= 1");
  t.source_count = static_cast<std::size_t>(sources);

  std::size_t i = 1;
  while (i < lines.size()) {
    const Line& line = lines[i++];
    if (line.tokens[0][0] == 'D') line_error(line, "descriptor line without a minutia");
    t.minutiae.push_back(parse_minutia_line(line));
    if (i < lines.size() && lines[i].tokens[0][0] == 'D') {
      const Line& dl = lines[i++];
      const long dim = at_line(dl, [&] { return parse_integer(dl.tokens[0].substr(1)); });
      if (dim < 1 || static_cast<std::size_t>(dim) + 1 != dl.tokens.size())
        line_error(dl, "descriptor tag does not match its value count");
      MinutiaDescriptor d(dim);
      for (long k = 0; k < dim; ++k)
        d[k] = at_line(dl, [&] { return parse_double(dl.tokens[k + 1]); });
      t.descriptors.push_back(std::move(d));
    }
  }
  require(t.minutiae.size() == count, ErrorKind::format,
          "FPTPL header announces " + std::to_string(count) + " minutiae, found " +
              std::to_string(t.minutiae.size()));
  require(t.descriptors.empty() || t.descriptors.size() == t.minutiae.size(),
          ErrorKind::format, "FPTPL: some minutiae lack descriptors");
  return t;
}

Template read_template(const std::filesystem::path& path) {
  return with_path(path, [&] { return parse_template(read_text_file(path)); });
}

void write_template(const std::filesystem::path& path, const Template& t) {
  write_text_file(path, format_template(t));
}

// ---------------------------------------------------------------------------
// FPGT
// ---------------------------------------------------------------------------

std::string format_truth(const std::vector<int>& labels) {
  std::string out = "FPGT 1 " + std::to_string(labels.size()) + "\n";
  for (int l : labels) out += std::to_string(l) + "\n";
  return out;
}

std::vector<int> parse_truth(std::string_view text) {
  const auto lines = tokenised_lines(text);
  const std::size_t count = parse_header(lines, "FPGT", 3);
  require(lines.size() - 1 == count, ErrorKind::format, "FPGT count mismatch");
  std::vector<int> labels;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].tokens.size() != 1) line_error(lines[i], "expected one integer");
    const long label =
        at_line(lines[i], [&] { return parse_integer(lines[i].tokens[0]); });
    if (label < -1 || label > std::numeric_limits<int>::max())
      line_error(lines[i], "truth label must be >= -1");
    labels.push_back(static_cast<int>(label));
  }
  return labels;
}

// ---------------------------------------------------------------------------
// FPIX
// ---------------------------------------------------------------------------

namespace {

void write_fpix_header(ByteWriter& w, std::uint8_t type, std::uint32_t rows,
                       std::uint32_t cols) {
  w.raw("FPIX");
  w.u32(kFpixVersion);
  w.u8(type);
  w.u32(rows);
  w.u32(cols);
}

std::pair<std::uint32_t, std::uint32_t> read_fpix_header(ByteReader& r, std::uint8_t type,
                                                         std::string_view what) {
  r.expect_magic("FPIX", what);
  const std::uint32_t version = r.u32();
  require(version == kFpixVersion, ErrorKind::format,
          std::string(what) + ": unsupported FPIX version " + std::to_string(version));
  const std::uint8_t got = r.u8();
  require(got == type, ErrorKind::format,
          std::string(what) + ": record type " + std::to_string(got) + ", expected " +
              std::to_string(type));
  const std::uint32_t rows = r.u32();
  const std::uint32_t cols = r.u32();
  return {rows, cols};
}

void expect_exact_payload(const ByteReader& r, std::size_t doubles, std::string_view what) {
  require(r.remaining() == doubles * 8, ErrorKind::format,
          std::string(what) + ": payload is " + std::to_string(r.remaining()) +
              " bytes, expected " + std::to_string(doubles * 8));
}

}  // namespace

std::vector<std::uint8_t> encode_transform(const DescriptorTransform& t) {
  t.validate();
  ByteWriter w;
  write_fpix_header(w, kRecordTransform, static_cast<std::uint32_t>(t.matrix.rows()),
                    static_cast<std::uint32_t>(t.matrix.cols()));
  for (Eigen::Index i = 0; i < t.mean.size(); ++i) w.f64(t.mean[i]);
  for (Eigen::Index r = 0; r < t.matrix.rows(); ++r)
    for (Eigen::Index c = 0; c < t.matrix.cols(); ++c) w.f64(t.matrix(r, c));
  return w.take();
}

DescriptorTransform decode_transform(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes);
  const auto [rows, cols] = read_fpix_header(r, kRecordTransform, "transform");
  require(rows == kGaborFeatureDim && cols == kDescriptorDim, ErrorKind::format,
          "transform: dimensions " + std::to_string(rows) + "x" + std::to_string(cols) +
              ", expected 360x25");
  expect_exact_payload(r, std::size_t{rows} + std::size_t{rows} * cols, "transform");
  DescriptorTransform t;
  t.mean.resize(rows);
  for (std::uint32_t i = 0; i < rows; ++i) t.mean[i] = r.f64();
  t.matrix.resize(rows, cols);
  for (std::uint32_t i = 0; i < rows; ++i)
    for (std::uint32_t c = 0; c < cols; ++c) t.matrix(i, c) = r.f64();
  t.provenance = DescriptorTransform::Provenance::loaded;
  t.version = kFpixVersion;
  try {
    t.validate();
  } catch (const Error& e) {
    fail(ErrorKind::format, std::string("transform: ") + e.what());
  }
  return t;
}

std::vector<std::uint8_t> encode_codebook(const Codebook& cb) {
  cb.validate();
  ByteWriter w;
  write_fpix_header(w, kRecordCodebook, static_cast<std::uint32_t>(cb.k()),
                    static_cast<std::uint32_t>(cb.dim()));
  for (Eigen::Index r = 0; r < cb.k(); ++r)
    for (Eigen::Index c = 0; c < cb.dim(); ++c) w.f64(cb.centroids(r, c));
  return w.take();
}

Codebook decode_codebook(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes);
  const auto [k, dim] = read_fpix_header(r, kRecordCodebook, "codebook");
  require(k >= 2 && dim >= 1, ErrorKind::format, "codebook: invalid dimensions");
  expect_exact_payload(r, std::size_t{k} * dim, "codebook");
  Codebook cb;
  cb.centroids.resize(k, dim);
  for (std::uint32_t i = 0; i < k; ++i)
    for (std::uint32_t c = 0; c < dim; ++c) cb.centroids(i, c) = r.f64();
  try {
    cb.validate();
  } catch (const Error& e) {
    fail(ErrorKind::format, std::string("codebook: ") + e.what());
  }
  return cb;
}

void save_transform(const std::filesystem::path& path, const DescriptorTransform& t) {
  write_file_bytes(path, encode_transform(t));
}

DescriptorTransform load_transform(const std::filesystem::path& path) {
  return with_path(path, [&] { return decode_transform(read_file_bytes(path)); });
}

void save_codebook(const std::filesystem::path& path, const Codebook& cb) {
  write_file_bytes(path, encode_codebook(cb));
}

Codebook load_codebook(const std::filesystem::path& path) {
  return with_path(path, [&] { return decode_codebook(read_file_bytes(path)); });
}

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, Eigen::Index rows,
                                 Eigen::Index cols) {
  require(j.is_array() && static_cast<Eigen::Index>(j.size()) == rows, ErrorKind::format,
          "JSON matrix row count mismatch");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    require(row.is_array() && static_cast<Eigen::Index>(row.size()) == cols,
            ErrorKind::format, "JSON matrix column count mismatch");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

template <typename F>
auto json_guard(F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::format, std::string("JSON: ") + e.what());
  }
}

}  // namespace

nlohmann::json transform_to_json(const DescriptorTransform& t) {
  t.validate();
  return {{"format", "FPIX"},
          {"version", kFpixVersion},
          {"type", "transform"},
          {"rows", t.matrix.rows()},
          {"cols", t.matrix.cols()},
          {"mean", std::vector<double>(t.mean.data(), t.mean.data() + t.mean.size())},
          {"matrix", matrix_to_json(t.matrix)}};
}

DescriptorTransform transform_from_json(const nlohmann::json& j) {
  return json_guard([&] {
    require(j.at("type") == "transform", ErrorKind::format, "JSON is not a transform");
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    DescriptorTransform t;
    const auto mean = j.at("mean").get<std::vector<double>>();
    require(static_cast<Eigen::Index>(mean.size()) == rows, ErrorKind::format,
            "JSON transform mean length mismatch");
    t.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), rows);
    t.matrix = matrix_from_json(j.at("matrix"), rows, cols);
    t.provenance = DescriptorTransform::Provenance::loaded;
    t.validate();
    return t;
  });
}

nlohmann::json codebook_to_json(const Codebook& cb) {
  cb.validate();
  return {{"format", "FPIX"},      {"version", kFpixVersion},
          {"type", "codebook"},    {"k", cb.k()},
          {"dim", cb.dim()},       {"centroids", matrix_to_json(cb.centroids)},
          {"iterations", cb.meta.iterations}, {"inertia", cb.meta.inertia}};
}

Codebook codebook_from_json(const nlohmann::json& j) {
  return json_guard([&] {
    require(j.at("type") == "codebook", ErrorKind::format, "JSON is not a codebook");
    Codebook cb;
    cb.centroids =
        matrix_from_json(j.at("centroids"), j.at("k").get<Eigen::Index>(), j.at("dim").get<Eigen::Index>());
    cb.meta.iterations = j.value("iterations", 0);
    cb.meta.inertia = j.value("inertia", 0.0);
    cb.validate();
    return cb;
  });
}

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

std::vector<ManifestEntry> parse_manifest(std::string_view text,
                                          const std::filesystem::path& base_dir) {
  std::vector<ManifestEntry> entries;
  for (const Line& line : tokenised_lines(text)) {
    if (line.tokens[0][0] == '#') continue;
    if (line.tokens.size() != 4 && line.tokens.size() != 5)
      line_error(line, "expected `subject_id impression image minutiae [truth]`");
    ManifestEntry e;
    e.subject_id = std::string(line.tokens[0]);
    e.impression = static_cast<int>(at_line(line, [&] { return parse_integer(line.tokens[1]); }));
    auto resolve = [&](std::string_view p) {
      std::filesystem::path path{std::string(p)};
      return path.is_absolute() ? path : base_dir / path;
    };
    e.image = resolve(line.tokens[2]);
    e.minutiae = resolve(line.tokens[3]);
    if (line.tokens.size() == 5) e.truth = resolve(line.tokens[4]);
    entries.push_back(std::move(e));
  }
  return entries;
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  return with_path(path, [&] {
    return parse_manifest(read_text_file(path), path.parent_path());
  });
}

std::string format_manifest(const std::vector<ManifestEntry>& entries) {
  std::string out = "# subject_id impression image minutiae [truth]\n";
  for (const ManifestEntry& e : entries) {
    out += e.subject_id + " " + std::to_string(e.impression) + " " + e.image.string() + " " +
           e.minutiae.string();
    if (!e.truth.empty()) out += " " + e.truth.string();
    out += "\n";
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return std::string(bytes.begin(), bytes.end());
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  write_file_bytes(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

}  // namespace fpindex
