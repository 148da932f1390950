#pragma once
// Helpers for driving the command-line front end in-process.
#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <nlohmann/json.hpp>

#include "sawlab/cli/app.hpp"
#include "sawlab/io.hpp"

namespace sawlab::clitest {

namespace fs = std::filesystem;

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

inline CliResult run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::string pattern = (fs::temp_directory_path() / "sawlab-test-XXXXXX").string();
    path_ = mkdtemp(pattern.data());
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  std::string str(const std::string& sub = "") const { return (sub.empty() ? path_ : path_ / sub).string(); }

 private:
  fs::path path_;
};

inline nlohmann::json manifest(const fs::path& dir) { return nlohmann::json::parse(io::read_file(dir / "manifest.json")); }

// Files under dir (relative paths), manifest excluded.
inline std::vector<std::string> listed_files(const fs::path& dir) {
  std::vector<std::string> names;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), dir).generic_string();
    if (rel != "manifest.json") names.push_back(rel);
  }
  std::sort(names.begin(), names.end());
  return names;
}

inline std::vector<std::string> manifest_outputs(const fs::path& dir) {
  auto names = manifest(dir).at("outputs").get<std::vector<std::string>>();
  std::sort(names.begin(), names.end());
  return names;
}

inline std::string shipped_config() {
  return (fs::path(SAWLAB_SOURCE_DIR) / "configs" / "reference.yaml").string();
}

}  // namespace sawlab::clitest
