#include "cli.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "fpindex/corpus.hpp"
#include "fpindex/evaluate.hpp"
#include "fpindex/formats.hpp"
#include "fpindex/synthgen.hpp"
#include "fpindex/training.hpp"

namespace fpindex::cli {

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parameter:
      return usage;
    case ErrorKind::format:
    case ErrorKind::io:
    case ErrorKind::conflict:
    case ErrorKind::not_found:
      return data;
    case ErrorKind::training:
    case ErrorKind::empty_template:
    case ErrorKind::degenerate_vector:
    case ErrorKind::out_of_bounds:
    case ErrorKind::evaluation:
      return pipeline;
  }
  return pipeline;
}

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

void Config::validate() const {
  pipeline.validate();
  require(dpi > 0.0 && std::isfinite(dpi), ErrorKind::parameter, "dpi must be positive");
  require(clusters >= 1, ErrorKind::parameter, "clusters must be >= 1");
  for (double pr : pr_grid)
    require(pr > 0.0 && pr <= 1.0, ErrorKind::parameter,
            "penetration grid values must lie in (0, 1], got " + format_double(pr));
}

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  require(j.is_object(), ErrorKind::parameter, "config: " + where + " must be an object");
  for (const auto& [key, _] : j.items())
    require(allowed.count(key) > 0, ErrorKind::parameter,
            "config: unknown key '" + key + "' in " + where);
}

template <typename T>
void read_value(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    fail(ErrorKind::parameter, "config: " + where + "." + key + " has the wrong type");
  }
}

}  // namespace

Config config_from_json(const json& j) {
  Config c;
  c.pr_grid = default_pr_grid();
  check_keys(j, "config", {"enhance", "gabor", "gates", "index", "pr_grid", "dpi", "clusters"});
  if (j.contains("enhance")) {
    const json& e = j["enhance"];
    check_keys(e, "enhance", {"sigma_narrow", "sigma_wide", "window", "eps"});
    EnhanceParams& p = c.pipeline.features.enhance;
    read_value(e, "sigma_narrow", p.sigma_narrow, "enhance");
    read_value(e, "sigma_wide", p.sigma_wide, "enhance");
    read_value(e, "window", p.window, "enhance");
    read_value(e, "eps", p.eps, "enhance");
  }
  if (j.contains("gabor")) {
    const json& g = j["gabor"];
    check_keys(g, "gabor", {"ring_radius", "frequencies", "bandwidth", "support"});
    GaborBankParams& p = c.pipeline.features.gabor;
    read_value(g, "ring_radius", p.ring_radius, "gabor");
    read_value(g, "bandwidth", p.bandwidth, "gabor");
    read_value(g, "support", p.support, "gabor");
    if (g.contains("frequencies")) {
      std::vector<double> f;
      read_value(g, "frequencies", f, "gabor");
      require(f.size() == p.frequencies.size(), ErrorKind::parameter,
              "config: gabor.frequencies needs exactly 5 values");
      std::copy(f.begin(), f.end(), p.frequencies.begin());
    }
  }
  if (j.contains("gates")) {
    const json& g = j["gates"];
    check_keys(g, "gates", {"max_distance", "max_angle_deg", "dedup_distance", "dedup_angle_deg"});
    MatchGates& p = c.pipeline.gates;
    double max_angle = degrees(p.max_angle);
    double dedup_angle = degrees(p.dedup_angle);
    read_value(g, "max_distance", p.max_distance, "gates");
    read_value(g, "dedup_distance", p.dedup_distance, "gates");
    read_value(g, "max_angle_deg", max_angle, "gates");
    read_value(g, "dedup_angle_deg", dedup_angle, "gates");
    p.max_angle = radians(max_angle);
    p.dedup_angle = radians(dedup_angle);
  }
  if (j.contains("index")) {
    check_keys(j["index"], "index", {"normalize_unit"});
    read_value(j["index"], "normalize_unit", c.pipeline.index.normalize_unit, "index");
  }
  read_value(j, "pr_grid", c.pr_grid, "config");
  read_value(j, "dpi", c.dpi, "config");
  read_value(j, "clusters", c.clusters, "config");
  c.validate();
  return c;
}

json config_to_json(const Config& c) {
  const auto& e = c.pipeline.features.enhance;
  const auto& g = c.pipeline.features.gabor;
  const auto& m = c.pipeline.gates;
  return json{
      {"enhance",
       {{"sigma_narrow", e.sigma_narrow}, {"sigma_wide", e.sigma_wide}, {"window", e.window},
        {"eps", e.eps}}},
      {"gabor",
       {{"ring_radius", g.ring_radius},
        {"frequencies", std::vector<double>(g.frequencies.begin(), g.frequencies.end())},
        {"bandwidth", g.bandwidth},
        {"support", g.support}}},
      {"gates",
       {{"max_distance", m.max_distance},
        {"max_angle_deg", degrees(m.max_angle)},
        {"dedup_distance", m.dedup_distance},
        {"dedup_angle_deg", degrees(m.dedup_angle)}}},
      {"index", {{"normalize_unit", c.pipeline.index.normalize_unit}}},
      {"pr_grid", c.pr_grid},
      {"dpi", c.dpi},
      {"clusters", c.clusters}};
}

Config load_config(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::format, path.string() + ": " + e.what());
  }
  try {
    return config_from_json(j);
  } catch (const Error& e) {
    fail(e.kind(), path.string() + ": " + e.what());
  }
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ',')) {
    const auto first = token.find_first_not_of(" \t");
    const auto last = token.find_last_not_of(" \t");
    token = first == std::string::npos ? "" : token.substr(first, last - first + 1);
    try {
      grid.push_back(parse_double(token));
    } catch (const Error&) {
      fail(ErrorKind::parameter, "invalid penetration grid value '" + token + "'");
    }
  }
  require(!grid.empty(), ErrorKind::parameter, "penetration grid is empty");
  return grid;
}

// ---------------------------------------------------------------------------
// Lock
// ---------------------------------------------------------------------------

GalleryLock::GalleryLock(const std::filesystem::path& gallery, bool exclusive) {
  const std::string path = gallery.string() + ".lock";
  fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  require(fd_ >= 0, ErrorKind::io, "cannot open lock file " + path + ": " + std::strerror(errno));
  if (::flock(fd_, (exclusive ? LOCK_EX : LOCK_SH) | LOCK_NB) != 0) {
    const int e = errno;
    ::close(fd_);
    fd_ = -1;
    fail(e == EWOULDBLOCK ? ErrorKind::conflict : ErrorKind::io,
         "gallery " + gallery.string() + " is in use by another process (" + path + ")");
  }
}

GalleryLock::~GalleryLock() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

namespace {

bool is_json(const std::filesystem::path& p) { return p.extension() == ".json"; }

json read_json_file(const std::filesystem::path& path) {
  try {
    return json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    fail(ErrorKind::format, path.string() + ": " + e.what());
  }
}

DescriptorTransform read_transform(const std::filesystem::path& path) {
  if (!is_json(path)) return load_transform(path);
  try {
    return transform_from_json(read_json_file(path));
  } catch (const Error& e) {
    fail(e.kind(), path.string() + ": " + e.what());
  }
}

Codebook read_codebook(const std::filesystem::path& path) {
  if (!is_json(path)) return load_codebook(path);
  try {
    return codebook_from_json(read_json_file(path));
  } catch (const Error& e) {
    fail(e.kind(), path.string() + ": " + e.what());
  }
}

void write_transform(const std::filesystem::path& path, const DescriptorTransform& t) {
  if (is_json(path))
    write_text_file(path, transform_to_json(t).dump(1) + "\n");
  else
    save_transform(path, t);
}

void write_codebook(const std::filesystem::path& path, const Codebook& cb) {
  if (is_json(path))
    write_text_file(path, codebook_to_json(cb).dump(1) + "\n");
  else
    save_codebook(path, cb);
}

struct CommonFlags {
  std::string config;
  std::optional<double> dpi;

  void add(CLI::App* app) {
    app->add_option("--config", config, "JSON parameter file (flags override it)");
    app->add_option("--dpi", dpi, "resolution of input images");
  }

  Config resolve() const {
    Config c;
    c.pr_grid = default_pr_grid();
    if (!config.empty()) c = load_config(config);
    if (dpi) c.dpi = *dpi;
    c.validate();
    return c;
  }
};

struct ModelFlags {
  std::string transform;
  std::string codebook;

  void add(CLI::App* app) {
    app->add_option("--transform", transform, "descriptor transform file")->required();
    app->add_option("--codebook", codebook, "codebook file")->required();
  }

  IndexModel load() const { return {read_transform(transform), read_codebook(codebook)}; }
};

Impression read_impression(const std::string& image, const std::string& minutiae, double dpi) {
  return {read_pgm(image, dpi), read_minutiae(minutiae)};
}

Gallery open_gallery(const std::filesystem::path& path, Eigen::Index k, bool create) {
  std::error_code ec;
  if (create && !std::filesystem::exists(path, ec)) return Gallery(k);
  Gallery g = Gallery::load(path);
  require(g.k() == k, ErrorKind::format,
          path.string() + ": gallery vectors are " + std::to_string(g.k()) +
              "-D but the codebook has " + std::to_string(k) + " centroids");
  return g;
}

struct TrainCmd {
  CommonFlags common;
  std::string manifest, transform, codebook;
  std::optional<std::uint64_t> seed;
  std::optional<long long> clusters;

  void add(CLI::App& root) {
    CLI::App* app = root.add_subcommand("train", "learn the descriptor transform and codebook");
    common.add(app);
    app->add_option("--manifest", manifest, "training corpus manifest")->required();
    app->add_option("--transform-out", transform, "output transform file")->required();
    app->add_option("--codebook-out", codebook, "output codebook file")->required();
    app->add_option("--seed", seed, "k-means seed")->required();
    app->add_option("--clusters", clusters, "codebook size");
  }

  int run(std::ostream& out) const {
    Config c = common.resolve();
    if (clusters) c.clusters = *clusters;
    c.validate();
    const auto corpus = load_corpus(read_manifest(manifest), c.dpi);
    const TrainingCorpus tc = training_corpus(corpus, c.pipeline.features, c.pipeline.gates);
    TrainingOptions opt;
    opt.kmeans.k = c.clusters;
    opt.kmeans.seed = *seed;
    const TrainedModel model = train_model(tc.set, opt);
    write_transform(transform, model.transform);
    write_codebook(codebook, model.codebook);
    out << "subjects=" << tc.subjects << "\n"
        << "impressions=" << tc.impressions << "\n"
        << "samples=" << model.samples << "\n"
        << "skipped_minutiae=" << tc.skipped_minutiae << "\n"
        << "classes=" << model.lda.classes_used << "\n"
        << "dropped_classes=" << model.lda.dropped_classes << "\n"
        << "pca_rank=" << model.pca.rank << "\n"
        << "kmeans_iterations=" << model.codebook.meta.iterations << "\n"
        << "kmeans_inertia=" << format_double(model.codebook.meta.inertia) << "\n";
    return ok;
  }
};

struct EnrollCmd {
  CommonFlags common;
  ModelFlags model;
  std::string gallery, subject;
  std::vector<std::string> images, minutiae;

  void add(CLI::App& root) {
    CLI::App* app = root.add_subcommand("enroll", "enroll one subject from 1+ impressions");
    common.add(app);
    model.add(app);
    app->add_option("--gallery", gallery, "gallery file (created when absent)")->required();
    app->add_option("--subject", subject, "subject id")->required();
    app->add_option("--image", images, "impression image (PGM), repeatable")->required();
    app->add_option("--minutiae", minutiae, "impression minutiae (FPMIN), repeatable")
        ->required();
  }

  int run(std::ostream& out) const {
    const Config c = common.resolve();
    require(images.size() == minutiae.size(), ErrorKind::parameter,
            "--image and --minutiae must be given the same number of times");
    require(!subject.empty() && subject.find_first_of(" \t\n") == std::string::npos,
            ErrorKind::parameter, "subject id must be non-empty without whitespace");
    const IndexModel m = model.load();
    std::vector<Impression> imps;
    for (std::size_t i = 0; i < images.size(); ++i)
      imps.push_back(read_impression(images[i], minutiae[i], c.dpi));

    GalleryLock lock(gallery, true);
    Gallery g = open_gallery(gallery, m.codebook.k(), true);
    const EnrolledRecord rec = enroll(g, subject, imps, m, c.pipeline);
    g.save(gallery);
    out << "enrolled " << rec.subject_id << " source_count=" << rec.template_ref.source_count
        << " minutiae=" << rec.template_ref.size() << " records=" << g.size() << "\n";
    return ok;
  }
};

struct IdentifyCmd {
  CommonFlags common;
  ModelFlags model;
  std::string gallery, image, minutiae;
  double pr = 1.0;

  void add(CLI::App& root) {
    CLI::App* app = root.add_subcommand("identify", "rank enrolled subjects for one impression");
    common.add(app);
    model.add(app);
    app->add_option("--gallery", gallery, "gallery file")->required();
    app->add_option("--image", image, "query image (PGM)")->required();
    app->add_option("--minutiae", minutiae, "query minutiae (FPMIN)")->required();
    app->add_option("--pr", pr, "penetration rate in (0, 1]");
  }

  int run(std::ostream& out) const {
    const Config c = common.resolve();
    require(pr > 0.0 && pr <= 1.0, ErrorKind::parameter, "--pr must lie in (0, 1]");
    const IndexModel m = model.load();
    const IndexVector q = query_vector(read_impression(image, minutiae, c.dpi), m, c.pipeline);
    GalleryLock lock(gallery, false);
    const Gallery g = open_gallery(gallery, m.codebook.k(), false);
    for (const SearchHit& hit : g.search(q.values, pr).ranked)
      out << hit.subject_id << " " << format_double(hit.distance) << "\n";
    return ok;
  }
};

struct EvaluateCmd {
  CommonFlags common;
  ModelFlags model;
  std::string gallery, queries, grid, csv;
  int bench = 0;

  void add(CLI::App& root) {
    CLI::App* app = root.add_subcommand("evaluate", "penetration vs error curve over a query set");
    common.add(app);
    model.add(app);
    app->add_option("--gallery", gallery, "gallery file")->required();
    app->add_option("--queries", queries, "query manifest")->required();
    app->add_option("--grid", grid, "comma-separated penetration rates");
    app->add_option("--out", csv, "CSV output (stdout when omitted)");
    app->add_option("--bench", bench, "also time N passes of search over the queries");
  }

  int run(std::ostream& out) const {
    Config c = common.resolve();
    if (!grid.empty()) c.pr_grid = parse_grid(grid);
    c.validate();
    require(bench >= 0, ErrorKind::parameter, "--bench must be >= 0");
    const IndexModel m = model.load();
    std::vector<Query> qs;
    for (const ManifestEntry& e : read_manifest(queries)) {
      const IndexVector v =
          query_vector(read_impression(e.image.string(), e.minutiae.string(), c.dpi), m,
                       c.pipeline);
      qs.push_back({v.values, e.subject_id});
    }
    GalleryLock lock(gallery, false);
    const Gallery g = open_gallery(gallery, m.codebook.k(), false);
    const PrErCurve curve = pr_er_curve(g, qs, c.pr_grid);
    if (csv.empty())
      out << curve_csv(curve);
    else
      write_text_file(csv, curve_csv(curve));
    if (bench > 0) {
      std::vector<Eigen::VectorXd> vs;
      for (const Query& q : qs) vs.push_back(q.vector);
      out << bench_report(bench_search(g, vs, bench));
    }
    return ok;
  }
};

struct SynthCmd {
  std::string dir;
  std::size_t fingers = 0, impressions = 0;
  std::optional<std::uint64_t> seed;

  void add(CLI::App& root) {
    CLI::App* app = root.add_subcommand("synth", "write a synthetic corpus with a manifest");
    app->add_option("--out", dir, "output directory")->required();
    app->add_option("--fingers", fingers, "number of fingers")->required();
    app->add_option("--impressions", impressions, "impressions per finger")->required();
    app->add_option("--seed", seed, "corpus seed")->required();
  }

  int run(std::ostream& out) const {
    const auto entries = write_corpus(dir, fingers, impressions, *seed);
    out << "fingers=" << fingers << "\n"
        << "impressions=" << entries.size() << "\n"
        << "manifest=" << (std::filesystem::path(dir) / "manifest.txt").string() << "\n";
    return ok;
  }
};

struct InspectCmd {
  std::string gallery;

  void add(CLI::App& root) {
    CLI::App* group = root.add_subcommand("gallery", "gallery utilities");
    group->require_subcommand(1);
    CLI::App* app = group->add_subcommand("inspect", "summarise a gallery file");
    app->add_option("--gallery", gallery, "gallery file")->required();
  }

  int run(std::ostream& out) const {
    GalleryLock lock(gallery, false);
    const Gallery g = Gallery::load(gallery);
    out << "k=" << g.k() << "\n"
        << "records=" << g.size() << "\n";
    for (const EnrolledRecord& r : g.records())
      out << r.subject_id << " source_count=" << r.template_ref.source_count
          << " minutiae=" << r.template_ref.size() << " n=" << r.index_vector.n_minutiae
          << "\n";
    return ok;
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("Fingerprint indexing pre-filter", "fpindex");
  app.require_subcommand(1);
  TrainCmd train;
  EnrollCmd enroll_cmd;
  IdentifyCmd identify;
  EvaluateCmd evaluate;
  SynthCmd synth;
  InspectCmd inspect;
  train.add(app);
  enroll_cmd.add(app);
  identify.add(app);
  evaluate.add(app);
  synth.add(app);
  inspect.add(app);

  std::vector<std::string> rest(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(rest.begin(), rest.end());  // CLI11 consumes a reversed vector
  try {
    app.parse(rest);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : usage;
  }

  try {
    if (app.got_subcommand("train")) return train.run(out);
    if (app.got_subcommand("enroll")) return enroll_cmd.run(out);
    if (app.got_subcommand("identify")) return identify.run(out);
    if (app.got_subcommand("evaluate")) return evaluate.run(out);
    if (app.got_subcommand("synth")) return synth.run(out);
    if (app.got_subcommand("gallery")) return inspect.run(out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return data;
  }
  return usage;
}

}  // namespace fpindex::cli
