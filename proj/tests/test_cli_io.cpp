#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "wavelab/cli_io.hpp"

using namespace wavelab;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "wavelab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = parse_and_dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

class TempDir {
 public:
  TempDir() : path_(fs::temp_directory_path() / ("wavelab_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
                                                  ::testing::UnitTest::GetInstance()->current_test_info()->name())) {
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

}  // namespace

TEST(Config, EmptyTextKeepsDefaults) {
  const auto rc = parse_config("# nothing here\n\n");
  const SimulationConfig defaults;
  EXPECT_EQ(rc.sim.order, defaults.order);
  EXPECT_EQ(rc.sim.dim, defaults.dim);
  EXPECT_EQ(rc.levels, (std::vector<int>{41, 81, 161, 321}));
  for (const auto& key : config_keys()) EXPECT_EQ(rc.provenance.at(key), Provenance::default_value) << key;
}

TEST(Config, ParsesKeysAndMarksFileProvenance) {
  const auto rc = parse_config("order = 6\nbc = neumann  # trailing comment\npenalty_factor = 1.5\nlevels = 21,41,81\n");
  EXPECT_EQ(rc.sim.order, 6);
  EXPECT_EQ(rc.sim.bc, BoundaryKind::neumann);
  EXPECT_DOUBLE_EQ(rc.sim.penalty_factor, 1.5);
  EXPECT_EQ(rc.levels, (std::vector<int>{21, 41, 81}));
  EXPECT_EQ(rc.provenance.at("order"), Provenance::file);
  EXPECT_EQ(rc.provenance.at("penalty-factor"), Provenance::file);
  EXPECT_EQ(rc.provenance.at("cfl"), Provenance::default_value);
}

TEST(Config, RejectsBadInput) {
  EXPECT_THROW(parse_config("cfl = -1\n"), std::invalid_argument);
  EXPECT_THROW(parse_config("colour = blue\n"), std::invalid_argument);
  EXPECT_THROW(parse_config("order = four\n"), std::invalid_argument);
  EXPECT_THROW(parse_config("order = 4.5\n"), std::invalid_argument);
  EXPECT_THROW(parse_config("order 4\n"), std::invalid_argument);
  EXPECT_THROW(parse_levels("41,,81"), std::invalid_argument);
  EXPECT_THROW(load_config("/nonexistent/wavelab.cfg"), std::runtime_error);
}

TEST(Config, ErrorNamesTheLine) {
  try {
    parse_config("order = 4\ncfl = x\n", "run.cfg");
    FAIL() << "expected an exception";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("run.cfg:2"), std::string::npos) << e.what();
  }
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"converge", "--bogus"}).code, 2);
  EXPECT_EQ(run({"converge", "--cfl", "-1"}).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, OperatorCheckPasses) {
  const auto r = run({"operator-check", "--order", "4", "--n", "41"});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["order"].get<int>(), 4);
}

TEST(Cli, FlagOverridesFile) {
  TempDir dir;
  const auto cfg = dir.path() / "run.cfg";
  std::ofstream(cfg) << "dim = 1\norder = 4\nbc = neumann\ntf = 0.5\nlevels = 21,41,81\n";
  const auto out = dir.path() / "report.json";
  const auto r = run({"converge", "--config", cfg.string(), "--order", "6", "--format", "json", "--out", out.string()});
  ASSERT_NE(r.code, 2) << r.err;
  const auto j = nlohmann::json::parse(slurp(out));
  EXPECT_EQ(j["metadata"]["provenance.order"].get<std::string>(), "flag");
  EXPECT_EQ(j["metadata"]["provenance.bc"].get<std::string>(), "file");
  EXPECT_EQ(j["metadata"]["provenance.cfl"].get<std::string>(), "default");
  EXPECT_EQ(j["metadata"]["order"].get<std::string>(), "6");
}

TEST(Cli, CsvOutputIsReproducible) {
  TempDir dir;
  const auto a = dir.path() / "a.csv";
  const auto b = dir.path() / "b.csv";
  const std::vector<std::string> common{"converge", "--dim", "1", "--order", "2", "--tf", "0.5", "--levels", "21,41,81"};
  auto args_a = common;
  args_a.insert(args_a.end(), {"--out", a.string()});
  auto args_b = common;
  args_b.insert(args_b.end(), {"--out", b.string()});
  EXPECT_EQ(run(args_a).code, 0);
  EXPECT_EQ(run(args_b).code, 0);
  const auto text = slurp(a);
  EXPECT_FALSE(text.empty());
  EXPECT_EQ(text, slurp(b));
}

TEST(Cli, InvalidThreadCountIsAUsageError) {
  ::setenv("WAVELAB_THREADS", "zero", 1);
  const auto r = run({"operator-check", "--order", "2"});
  ::unsetenv("WAVELAB_THREADS");
  EXPECT_EQ(r.code, 2);
}
