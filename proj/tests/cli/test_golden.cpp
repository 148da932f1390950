// Byte-exact golden files for every `reproduce` target.
//
// tests/golden/<figure>/<file> holds the expected bytes; outputs larger than
// kInlineLimit are stored as <file>.sha256 instead. Set
// SAWLAB_UPDATE_GOLDEN=1 to rewrite the golden tree from the current build.
#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <string>

#include <openssl/evp.h>

#include "cli_support.hpp"

using namespace sawlab;
using namespace sawlab::clitest;

namespace {

constexpr std::size_t kInlineLimit = 512 * 1024;

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex + "\n";
}

fs::path golden_root() { return fs::path(SAWLAB_SOURCE_DIR) / "tests" / "golden"; }

bool updating() {
  const char* v = std::getenv("SAWLAB_UPDATE_GOLDEN");
  return v && std::string(v) == "1";
}

class GoldenReproduce : public ::testing::TestWithParam<std::string> {};

}  // namespace

TEST_P(GoldenReproduce, MatchesGoldenFiles) {
  const std::string id = GetParam();
  TempDir out;
  const auto r = run_cli({"reproduce", id, "--out", out.str()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto produced = listed_files(out.path());
  ASSERT_EQ(produced, manifest_outputs(out.path()));

  const auto dir = golden_root() / id;
  if (updating()) {
    fs::remove_all(dir);
    for (const auto& f : produced) {
      const auto bytes = io::read_file(out.path() / f);
      if (bytes.size() > kInlineLimit) {
        io::write_file(dir / (f + ".sha256"), sha256_hex(bytes));
      } else {
        io::write_file(dir / f, bytes);
      }
    }
    GTEST_SKIP() << "golden files rewritten";
  }

  ASSERT_TRUE(fs::is_directory(dir)) << "no golden files for " << id;
  std::vector<std::string> expected;
  for (const auto& e : fs::directory_iterator(dir)) {
    auto name = e.path().filename().string();
    if (name.size() > 7 && name.substr(name.size() - 7) == ".sha256") name.resize(name.size() - 7);
    expected.push_back(name);
  }
  std::sort(expected.begin(), expected.end());
  EXPECT_EQ(produced, expected);

  for (const auto& f : produced) {
    const auto bytes = io::read_file(out.path() / f);
    if (fs::exists(dir / f)) {
      EXPECT_TRUE(bytes == io::read_file(dir / f)) << id << "/" << f << " differs from golden";
    } else if (fs::exists(dir / (f + ".sha256"))) {
      EXPECT_EQ(sha256_hex(bytes), io::read_file(dir / (f + ".sha256"))) << id << "/" << f;
    } else {
      ADD_FAILURE() << "no golden file for " << id << "/" << f;
    }
  }
}

INSTANTIATE_TEST_SUITE_P(AllFigures, GoldenReproduce, ::testing::ValuesIn(cli::figure_ids()),
                         [](const auto& info) { return info.param; });
