#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

#include <json.hpp>

#include "helpers.hpp"
#include "resilisim/commands.hpp"
#include "resilisim/episode_store.hpp"

using namespace resilisim;
using namespace testing_support;

namespace {

// Small run file: a 12 x 12 grid keeps every stage well under a second.
fs::path write_run_file(const TempDir& dir, const std::string& extra = "") {
  const auto path = dir / "run.toml";
  std::ofstream(path) << "[run]\nmaster_seed = 5\noutput_dir = \"out\"\n"
                      << "[testbed]\ngrid_rows = 12\ngrid_cols = 12\nbuildings = 700\nsubstations = 2\n"
                      << "[inputs]\nwind_samples = \"" << source_file("data/wind_samples.csv").string() << "\"\n"
                      << "[simulation]\nepisodes = 30\n"
                      << "[ga]\npopulation = 6\ngenerations = 3\n"
                      << extra;
  return path;
}

int run(Command cmd, const fs::path& config, const Overrides& o = {}, std::string* out_text = nullptr) {
  std::ostringstream out, err;
  const int code = run_command(cmd, config, o, out, err);
  if (out_text) *out_text = out.str() + err.str();
  return code;
}

int shell(const std::string& args) {
  const auto cmd = std::string(RESILISIM_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Cli, FullPipeline) {
  TempDir dir("cli");
  const auto cfg = write_run_file(dir);
  std::string text;
  ASSERT_EQ(run(Command::Testbed, cfg, {}, &text), kExitOk) << text;
  ASSERT_EQ(run(Command::Synth, cfg, {}, &text), kExitOk) << text;
  EXPECT_NE(text.find("network:"), std::string::npos);
  ASSERT_EQ(run(Command::Estimate, cfg, {}, &text), kExitOk) << text;
  EXPECT_NE(text.find("lambda: 0.8"), std::string::npos);
  const auto out = dir.path() / "out";
  for (const char* f : {"network.bin", "network.geojson", "episodes.bin", "resilience.csv", "convergence.csv",
                        "resilience.geojson", "storm_0.geojson"})
    EXPECT_TRUE(fs::exists(out / f)) << f;
  EXPECT_EQ(EpisodeStore::open(out / "episodes.bin").size(), 30u);

  ASSERT_EQ(run(Command::Report, cfg, {}, &text), kExitOk) << text;
  EXPECT_NE(text.find("Worst area"), std::string::npos);
  EXPECT_EQ(text.find("DER plan"), std::string::npos);

  Overrides o;
  o.areas = std::vector<std::string>{"SUB1"};
  ASSERT_EQ(run(Command::Enhance, cfg, o, &text), kExitOk) << text;
  for (const char* f : {"plan.json", "ga_history.csv", "plan.geojson", "enhance_summary.json"})
    EXPECT_TRUE(fs::exists(out / f)) << f;
  const auto summary = nlohmann::json::parse(slurp(out / "enhance_summary.json"));
  EXPECT_GE(summary.at("best_fitness").get<double>(), summary.at("baseline_fitness").get<double>());
  const auto geo = nlohmann::json::parse(slurp(out / "resilience.geojson"));
  EXPECT_EQ(geo.at("features").size(), 2u);

  std::string first, second;
  ASSERT_EQ(run(Command::Report, cfg, {}, &first), kExitOk);
  ASSERT_EQ(run(Command::Report, cfg, {}, &second), kExitOk);
  EXPECT_EQ(first, second);
  EXPECT_NE(first.find("DER plan"), std::string::npos);
}

TEST(Cli, ThreadCountDoesNotChangeArtifacts) {
  TempDir dir("cli");
  const auto cfg = write_run_file(dir);
  ASSERT_EQ(run(Command::Testbed, cfg), kExitOk);
  ASSERT_EQ(run(Command::Synth, cfg), kExitOk);
  Overrides one, four;
  one.threads = 1;
  four.threads = 4;
  ASSERT_EQ(run(Command::Estimate, cfg, one), kExitOk);
  const auto csv1 = slurp(dir.path() / "out/resilience.csv");
  const auto bin1 = slurp(dir.path() / "out/episodes.bin");
  ASSERT_EQ(run(Command::Estimate, cfg, four), kExitOk);
  EXPECT_EQ(slurp(dir.path() / "out/resilience.csv"), csv1);
  EXPECT_EQ(slurp(dir.path() / "out/episodes.bin"), bin1);
}

TEST(Cli, ExitCodes) {
  TempDir dir("cli");
  const auto cfg = write_run_file(dir);
  EXPECT_EQ(run(Command::Synth, cfg), kExitConfig);     // inputs missing
  EXPECT_EQ(run(Command::Report, cfg), kExitRuntime);   // nothing estimated yet
  EXPECT_EQ(run(Command::Testbed, dir / "missing.toml"), kExitConfig);
  Overrides zero;
  zero.episodes = 0;
  EXPECT_EQ(run(Command::Testbed, cfg, zero), kExitConfig);

  const auto bad = write_run_file(dir, "[simulation]\nlambda = 2.0\n");
  EXPECT_EQ(run(Command::Testbed, bad), kExitConfig);

  ASSERT_EQ(run(Command::Testbed, write_run_file(dir)), kExitOk);
  ASSERT_EQ(run(Command::Synth, cfg), kExitOk);
  ASSERT_EQ(run(Command::Estimate, cfg), kExitOk);
  Overrides unknown;
  unknown.areas = std::vector<std::string>{"NOPE"};
  EXPECT_EQ(run(Command::Enhance, cfg, unknown), kExitConfig);
  std::ofstream(dir.path() / "out/episodes.bin") << "garbage";
  EXPECT_EQ(run(Command::Enhance, cfg), kExitRuntime);
}

TEST(Cli, Binary) {
  TempDir dir("cli");
  const auto cfg = write_run_file(dir).string();
  EXPECT_EQ(shell("testbed --config " + cfg + " --seed 3"), 0);
  EXPECT_EQ(shell("synth --config " + cfg), 0);
  EXPECT_EQ(shell("estimate --config " + cfg + " --episodes 5 --threads 2"), 0);
  EXPECT_EQ(EpisodeStore::open(dir.path() / "out/episodes.bin").size(), 5u);
  EXPECT_EQ(shell("enhance --config " + cfg + " --areas SUB1,SUB2"), 0);
  EXPECT_EQ(shell("report --config " + cfg), 0);
  EXPECT_EQ(shell("estimate --config " + cfg + " --episodes 0"), 1);
  EXPECT_EQ(shell("estimate --config " + cfg + " --episodes -3"), 1);
  EXPECT_EQ(shell("estimate"), 1);
  EXPECT_EQ(shell("fly --config " + cfg), 1);
  EXPECT_EQ(shell("report --config " + (dir / "none.toml").string()), 1);
}
