#pragma once
// Entry point of the `sawlab` command-line tool, callable in-process.
//
//   sawlab <subcommand> --config <path> [--out <dir>] [--seed <u64>] [flags]
//
// Exit codes: 0 success, 1 model or fit failure, 2 usage or config error.
// Outputs go to --out, else $SAWLAB_OUT, else ./sawlab-out. Every run that
// reaches the models (exit 0 or 1) writes one manifest.json listing its
// outputs; usage and config errors write nothing.
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace sawlab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitModel = 1;
inline constexpr int kExitUsage = 2;

inline constexpr const char* kOutDirEnv = "SAWLAB_OUT";

// Bad command-line input detected after parsing (exit code 2).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Figure ids accepted by `reproduce`.
const std::vector<std::string>& figure_ids();

}  // namespace sawlab::cli
