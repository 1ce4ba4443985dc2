#include "fpindex/gallery.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <mutex>
#include <numeric>

#include "fpindex/error.hpp"
#include "fpindex/formats.hpp"
#include "fpindex/image.hpp"

namespace fpindex {

namespace {
constexpr std::uint32_t kGalleryVersion = 1;
}

std::size_t penetration_cutoff(std::size_t n, double pr) {
  require(pr > 0.0 && pr <= 1.0, ErrorKind::parameter,
          "penetration rate must be in (0, 1], got " + format_double(pr));
  const double x = static_cast<double>(n) * pr;
  const double nearest = std::round(x);
  const double c = std::abs(x - nearest) <= 1e-9 * std::max(1.0, x) ? nearest : std::ceil(x);
  return std::clamp<std::size_t>(static_cast<std::size_t>(c), n == 0 ? 0 : 1, n);
}

std::shared_lock<std::shared_mutex> Gallery::read_lock() const {
  // Waiting writers hold the turnstile, so new readers queue behind them.
  std::lock_guard turnstile(turnstile_);
  return std::shared_lock(mutex_);
}

std::unique_lock<std::shared_mutex> Gallery::write_lock() const {
  std::lock_guard turnstile(turnstile_);
  return std::unique_lock(mutex_);
}

Gallery::Gallery(Eigen::Index k) : k_(k), vectors_(k, 0) {
  require(k >= 2, ErrorKind::parameter, "gallery codebook size must be >= 2");
}

Gallery::Gallery(const Gallery& other) {
  const auto lock = other.read_lock();
  k_ = other.k_;
  records_ = other.records_;
  vectors_ = other.vectors_;
  next_sequence_ = other.next_sequence_;
}

Gallery& Gallery::operator=(const Gallery& other) {
  if (this == &other) return *this;
  Gallery copy(other);
  const auto lock = write_lock();
  k_ = copy.k_;
  records_ = std::move(copy.records_);
  vectors_ = std::move(copy.vectors_);
  next_sequence_ = copy.next_sequence_;
  return *this;
}

std::size_t Gallery::size() const {
  const auto lock = read_lock();
  return records_.size();
}

bool Gallery::contains(const std::string& subject_id) const {
  return find(subject_id).has_value();
}

std::optional<EnrolledRecord> Gallery::find(const std::string& subject_id) const {
  const auto lock = read_lock();
  for (const auto& r : records_)
    if (r.subject_id == subject_id) return r;
  return std::nullopt;
}

std::vector<std::string> Gallery::ids() const {
  const auto lock = read_lock();
  std::vector<std::string> out;
  for (const auto& r : records_) out.push_back(r.subject_id);
  return out;
}

std::vector<EnrolledRecord> Gallery::records() const {
  const auto lock = read_lock();
  return records_;
}

void Gallery::add(EnrolledRecord record) {
  require(record.index_vector.k() == k_, ErrorKind::parameter,
          "index vector has " + std::to_string(record.index_vector.k()) +
              " components, gallery expects " + std::to_string(k_));
  require(record.index_vector.values.allFinite(), ErrorKind::parameter,
          "index vector has non-finite components");
  const auto lock = write_lock();
  for (const auto& r : records_)
    require(r.subject_id != record.subject_id, ErrorKind::conflict,
            "subject '" + record.subject_id + "' is already enrolled");
  record.enrolled_at = next_sequence_++;
  const auto n = static_cast<Eigen::Index>(records_.size());
  // Columns past the record count are spare capacity; doubling keeps bulk
  // enrollment linear.
  if (n == vectors_.cols()) vectors_.conservativeResize(k_, std::max<Eigen::Index>(16, 2 * n));
  vectors_.col(n) = record.index_vector.values;
  records_.push_back(std::move(record));
}

void Gallery::remove(const std::string& subject_id) {
  const auto lock = write_lock();
  const auto it = std::find_if(records_.begin(), records_.end(),
                               [&](const auto& r) { return r.subject_id == subject_id; });
  require(it != records_.end(), ErrorKind::not_found,
          "subject '" + subject_id + "' is not enrolled");
  const auto idx = static_cast<Eigen::Index>(it - records_.begin());
  const auto n = static_cast<Eigen::Index>(records_.size());
  for (Eigen::Index c = idx; c + 1 < n; ++c) vectors_.col(c) = vectors_.col(c + 1);
  records_.erase(it);
}

SearchResult Gallery::search(const Eigen::VectorXd& query, double pr) const {
  require(query.size() == k_, ErrorKind::parameter,
          "query has " + std::to_string(query.size()) + " components, gallery expects " +
              std::to_string(k_));
  const auto lock = read_lock();
  const std::size_t n = records_.size();
  require(n > 0, ErrorKind::parameter, "gallery is empty");

  SearchResult result;
  result.penetration = pr;
  result.cutoff = penetration_cutoff(n, pr);

  const Eigen::RowVectorXd dist =
      (vectors_.leftCols(static_cast<Eigen::Index>(n)).colwise() - query).colwise().norm();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const auto before = [&](std::size_t a, std::size_t b) {
    if (dist[a] != dist[b]) return dist[a] < dist[b];
    return records_[a].subject_id < records_[b].subject_id;
  };
  const auto take = static_cast<std::ptrdiff_t>(std::min(result.cutoff, n));
  std::partial_sort(order.begin(), order.begin() + take, order.end(), before);

  result.ranked.reserve(static_cast<std::size_t>(take));
  for (std::ptrdiff_t i = 0; i < take; ++i)
    result.ranked.push_back({records_[order[i]].subject_id, dist[order[i]]});
  return result;
}

std::vector<std::uint8_t> Gallery::encode() const {
  const auto lock = read_lock();
  ByteWriter w;
  w.raw("FPGL");
  w.u32(kGalleryVersion);
  w.u32(static_cast<std::uint32_t>(k_));
  w.u32(static_cast<std::uint32_t>(records_.size()));
  for (const auto& r : records_) {
    w.u32(static_cast<std::uint32_t>(r.subject_id.size()));
    w.raw(r.subject_id);
    for (Eigen::Index i = 0; i < k_; ++i) w.f64(r.index_vector.values[i]);
    const std::string blob = format_template(r.template_ref);
    w.u32(static_cast<std::uint32_t>(blob.size()));
    w.raw(blob);
  }
  return w.take();
}

Gallery Gallery::decode(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes);
  r.expect_magic("FPGL", "gallery");
  const std::uint32_t version = r.u32();
  require(version == kGalleryVersion, ErrorKind::format,
          "gallery: unsupported version " + std::to_string(version));
  const std::uint32_t k = r.u32();
  require(k >= 2, ErrorKind::format, "gallery: invalid K " + std::to_string(k));
  const std::uint32_t count = r.u32();
  Gallery g(k);
  for (std::uint32_t i = 0; i < count; ++i) {
    EnrolledRecord rec;
    rec.subject_id = r.raw(r.u32());
    rec.index_vector.values.resize(k);
    for (std::uint32_t c = 0; c < k; ++c) rec.index_vector.values[c] = r.f64();
    rec.template_ref = parse_template(r.raw(r.u32()));
    rec.index_vector.n_minutiae = rec.template_ref.size();
    try {
      g.add(std::move(rec));
    } catch (const Error& e) {
      fail(ErrorKind::format, std::string("gallery record ") + std::to_string(i) + ": " + e.what());
    }
  }
  require(r.at_end(), ErrorKind::format,
          "gallery: " + std::to_string(r.remaining()) + " trailing bytes");
  return g;
}

void Gallery::save(const std::filesystem::path& path) const {
  write_file_bytes(path, encode());
}

Gallery Gallery::load(const std::filesystem::path& path) {
  try {
    return decode(read_file_bytes(path));
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

bool Gallery::same_content(const Gallery& other) const {
  const auto mine = records();
  const auto theirs = other.records();
  if (k_ != other.k_ || mine.size() != theirs.size()) return false;
  for (std::size_t i = 0; i < mine.size(); ++i) {
    if (mine[i].subject_id != theirs[i].subject_id) return false;
    if (!(mine[i].template_ref == theirs[i].template_ref)) return false;
    for (Eigen::Index c = 0; c < k_; ++c)
      if (std::bit_cast<std::uint64_t>(mine[i].index_vector.values[c]) !=
          std::bit_cast<std::uint64_t>(theirs[i].index_vector.values[c]))
        return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

Template template_from_impression(const Impression& impression, const IndexModel& model,
                                  const PipelineParams& params) {
  return make_template(
      describe_all(impression.image, impression.minutiae, model.transform, params.features));
}

IndexVector query_vector(const Impression& impression, const IndexModel& model,
                         const PipelineParams& params) {
  return build_index(impression.image, impression.minutiae, model.transform, model.codebook,
                     params.features, params.index);
}

IndexVector template_vector(const Template& t, const IndexModel& model,
                            const PipelineParams& params) {
  t.validate();
  return index_from_descriptors(t.descriptors, model.codebook, params.index);
}

EnrolledRecord enroll(Gallery& gallery, const std::string& subject_id,
                      const std::vector<Impression>& impressions, const IndexModel& model,
                      const PipelineParams& params) {
  require(!impressions.empty(), ErrorKind::parameter, "enrollment needs an impression");
  require(model.codebook.k() == gallery.k(), ErrorKind::parameter,
          "codebook size does not match the gallery");
  require(!gallery.contains(subject_id), ErrorKind::conflict,
          "subject '" + subject_id + "' is already enrolled");
  params.validate();

  std::vector<Template> templates;
  templates.reserve(impressions.size());
  for (const Impression& imp : impressions)
    templates.push_back(template_from_impression(imp, model, params));

  EnrolledRecord record;
  record.subject_id = subject_id;
  record.template_ref = templates.size() == 1
                            ? std::move(templates.front())
                            : build_super_template(templates, params.gates);
  record.index_vector = template_vector(record.template_ref, model, params);
  gallery.add(record);
  return *gallery.find(subject_id);
}

}  // namespace fpindex
