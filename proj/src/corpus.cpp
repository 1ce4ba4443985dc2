#include "fpindex/corpus.hpp"

#include <map>
#include <string>

#include "fpindex/error.hpp"

namespace fpindex {

LoadedImpression load_impression(const ManifestEntry& entry, double dpi) {
  LoadedImpression out;
  out.entry = entry;
  out.impression.image = read_pgm(entry.image, dpi);
  out.impression.minutiae = read_minutiae(entry.minutiae);
  if (!entry.truth.empty()) {
    out.truth = parse_truth(read_text_file(entry.truth));
    require(out.truth.size() == out.impression.minutiae.size(), ErrorKind::format,
            entry.truth.string() + ": " + std::to_string(out.truth.size()) +
                " labels for " + std::to_string(out.impression.minutiae.size()) + " minutiae");
  }
  return out;
}

std::vector<LoadedImpression> load_corpus(const std::vector<ManifestEntry>& entries,
                                          double dpi) {
  std::vector<LoadedImpression> out;
  out.reserve(entries.size());
  for (const ManifestEntry& e : entries) out.push_back(load_impression(e, dpi));
  return out;
}

namespace {

Template geometry_only(const std::vector<Minutia>& minutiae) {
  Template t;
  t.minutiae = minutiae;
  t.descriptors.assign(minutiae.size(), MinutiaDescriptor());
  return t;
}

}  // namespace

std::vector<std::vector<int>> subject_labels(
    const std::vector<const LoadedImpression*>& impressions, const MatchGates& gates) {
  std::vector<std::vector<int>> labels;
  bool all_truth = true;
  for (const LoadedImpression* li : impressions) all_truth = all_truth && !li->truth.empty();
  if (all_truth) {
    for (const LoadedImpression* li : impressions) labels.push_back(li->truth);
    return labels;
  }
  if (impressions.empty()) return labels;
  const Template reference = geometry_only(impressions.front()->impression.minutiae);
  for (const LoadedImpression* li : impressions) {
    std::vector<int> l(li->impression.minutiae.size(), -1);
    if (li == impressions.front()) {
      for (std::size_t i = 0; i < l.size(); ++i) l[i] = static_cast<int>(i);
    } else if (!reference.minutiae.empty() && !l.empty()) {
      const Correspondence corr = correspond(reference, geometry_only(li->impression.minutiae), gates);
      for (const auto& [a, b] : corr.pairs) l[b] = static_cast<int>(a);
    }
    labels.push_back(std::move(l));
  }
  return labels;
}

TrainingCorpus training_corpus(const std::vector<LoadedImpression>& corpus,
                               const FeatureParams& params, const MatchGates& gates) {
  params.validate();
  std::map<std::string, std::vector<const LoadedImpression*>> by_subject;
  for (const LoadedImpression& li : corpus) by_subject[li.entry.subject_id].push_back(&li);

  TrainingCorpus out;
  out.subjects = by_subject.size();
  out.impressions = corpus.size();
  int next_class = 0;
  std::map<int, std::size_t> class_sizes;
  for (const auto& [subject, impressions] : by_subject) {
    const auto labels = subject_labels(impressions, gates);
    int max_label = -1;
    for (std::size_t k = 0; k < impressions.size(); ++k) {
      const Impression& imp = impressions[k]->impression;
      const FeatureBatch batch = extract_features(imp.image, imp.minutiae, params);
      out.skipped_minutiae += batch.skipped.size();
      for (std::size_t j = 0; j < batch.features.size(); ++j) {
        const int label = labels[k][batch.kept_indices[j]];
        const int cls = label < 0 ? -1 : next_class + label;
        out.set.features.push_back(batch.features[j]);
        out.set.class_ids.push_back(cls);
        if (cls >= 0) ++class_sizes[cls];
        max_label = std::max(max_label, label);
      }
    }
    next_class += max_label + 1;
  }
  for (const auto& [cls, n] : class_sizes)
    if (n >= 2) ++out.classes;
  return out;
}

}  // namespace fpindex
