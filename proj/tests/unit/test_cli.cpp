#include <gtest/gtest.h>

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "json.hpp"

#include "arise/corpus.hpp"
#include "cli.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kSource = ARISE_SOURCE_DIR;
const fs::path kSnapshots = ARISE_SNAPSHOT_DIR;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "arise");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = arise::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("arise-cli-" + name + "-" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

const std::string kSeed = (kSource / "data/toy/seed").string();
const std::string kValidation = (kSource / "data/toy/validation").string();

}  // namespace

TEST(Cli, NoSubcommandIsUsageError) { EXPECT_EQ(run({}).code, arise::cli::kExitUsage); }

TEST(Cli, UnknownFlagIsUsageError) {
  const auto r = run({"extract", "--corpus", kSeed, "--no-such-flag"});
  EXPECT_EQ(r.code, arise::cli::kExitUsage);
  EXPECT_FALSE(r.err.empty());
}

TEST(Cli, ValidateConfig) {
  const auto ok = run({"validate-config", (kSource / "data/toy/config.json").string()});
  EXPECT_EQ(ok.code, arise::cli::kExitOk) << ok.err;
  EXPECT_EQ(ok.err, "OK\n");
  const fs::path dir = scratch("vc");
  arise::write_file(dir / "bad.json", R"({"seed":{"docs":"a","parses":"b"},"generator":{"mode":"file","path":"c"},"oops":1})");
  const auto bad = run({"validate-config", "--config", (dir / "bad.json").string()});
  EXPECT_EQ(bad.code, arise::cli::kExitDomain);
  EXPECT_NE(bad.err.find("arise validate-config: config error:"), std::string::npos) << bad.err;
  EXPECT_NE(bad.err.find("oops"), std::string::npos);
  fs::remove_all(dir);
}

TEST(Cli, CorpusDirExcludesFiles) {
  const auto r = run({"extract", "--corpus", kSeed, "--docs", "a", "--parses", "b"});
  EXPECT_EQ(r.code, arise::cli::kExitUsage);
  EXPECT_NE(r.err.find("--corpus"), std::string::npos);
}

TEST(Cli, MissingCorpusNamesTheStage) {
  const auto r = run({"extract", "--corpus", "/no/such/dir"});
  EXPECT_EQ(r.code, arise::cli::kExitDomain);
  EXPECT_EQ(r.err.rfind("arise extract: ", 0), 0u) << r.err;
  EXPECT_NE(r.err.find(" error: "), std::string::npos);
}

TEST(Cli, PipelineOfSubcommands) {
  const fs::path dir = scratch("pipe");
  const std::string out = dir.string();
  ASSERT_EQ(run({"extract", "--corpus", kSeed, "--out-dir", out}).code, 0);
  const auto features = nlohmann::json::parse(arise::read_file(dir / "features.json"));
  EXPECT_TRUE(features.is_array());
  EXPECT_FALSE(features.empty());

  auto r = run({"induce", "--corpus", kSeed, "--out-dir", out});
  ASSERT_EQ(r.code, 0) << r.err;
  r = run({"filter", "--corpus", kValidation, "--candidates", (dir / "candidates.json").string(), "--budget", "5",
           "--out-dir", out});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto selected = nlohmann::json::parse(arise::read_file(dir / "selected.json"));
  EXPECT_LE(selected["rules"].size(), 5u);
  EXPECT_TRUE(fs::exists(dir / "trace.jsonl"));

  r = run({"label-model", "--corpus", kSeed, "--rules", (dir / "selected.json").string(), "--out-dir", out});
  ASSERT_EQ(r.code, 0) << r.err;
  r = run({"joint-train", "--corpus", kSeed, "--rules", (dir / "selected.json").string(), "--hash-dim", "64",
           "--epochs", "20", "--out", (dir / "joint.json").string(), "--out-dir", out});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(arise::read_file(dir / "training_log.csv").rfind("epoch,ce,nll,kl,total\n", 0), 0u);

  r = run({"filter-data", "--rules", (dir / "selected.json").string(), "--params",
           (dir / "params.json").string(), "--candidates", (kSource / "data/toy/candidates.jsonl").string(),
           "--out-dir", out, "--rejected", (dir / "rej.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "kept.jsonl"));
  EXPECT_TRUE(fs::exists(dir / "rej.jsonl"));
  fs::remove_all(dir);
}

TEST(Cli, BootstrapNeedsConfig) {
  const auto r = run({"bootstrap"});
  EXPECT_NE(r.code, arise::cli::kExitOk);
}

class HelpSnapshot : public ::testing::TestWithParam<std::string> {};

TEST_P(HelpSnapshot, MatchesStoredText) {
  const std::string cmd = GetParam();
  std::vector<std::string> args;
  if (cmd != "arise") args.push_back(cmd);
  args.push_back("--help");
  const auto r = run(args);
  EXPECT_EQ(r.code, arise::cli::kExitOk);
  const fs::path snap = kSnapshots / (cmd + ".txt");
  if (std::getenv("ARISE_UPDATE_SNAPSHOTS")) {
    arise::write_file(snap, r.out);
    GTEST_SKIP() << "snapshot updated";
  }
  ASSERT_TRUE(fs::exists(snap)) << "missing snapshot " << snap << " (set ARISE_UPDATE_SNAPSHOTS=1)";
  EXPECT_EQ(r.out, arise::read_file(snap));
}

INSTANTIATE_TEST_SUITE_P(Commands, HelpSnapshot,
                         ::testing::Values("arise", "extract", "induce", "filter", "label-model", "joint-train",
                                           "filter-data", "bootstrap", "validate-config"),
                         [](const auto& info) {
                           std::string n = info.param;
                           std::replace(n.begin(), n.end(), '-', '_');
                           return n;
                         });
