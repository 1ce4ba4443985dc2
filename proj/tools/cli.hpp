#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fpindex/error.hpp"
#include "fpindex/gallery.hpp"

namespace fpindex::cli {

enum ExitCode : int { ok = 0, usage = 1, data = 2, pipeline = 3 };

int exit_code(ErrorKind kind);

/// Parameter blocks shared by the subcommands. Loaded from an optional JSON
/// file, then overridden by flags, then validated.
struct Config {
  PipelineParams pipeline;
  std::vector<double> pr_grid;
  double dpi = kCanonicalDpi;
  long long clusters = 200;

  void validate() const;
};

/// Unknown keys and out-of-range values are parameter errors.
Config config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const Config& c);
Config load_config(const std::filesystem::path& path);

/// Parses "0.1,0.2,1" into a grid.
std::vector<double> parse_grid(const std::string& text);

/// Exclusive (writers) or shared (readers) advisory lock on `<gallery>.lock`,
/// held for the lifetime of the object. Fails immediately when contended.
class GalleryLock {
 public:
  GalleryLock(const std::filesystem::path& gallery, bool exclusive);
  ~GalleryLock();
  GalleryLock(const GalleryLock&) = delete;
  GalleryLock& operator=(const GalleryLock&) = delete;

 private:
  int fd_ = -1;
};

/// Full command line, argv[0] included. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fpindex::cli
