#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "skelanon/formats.hpp"
#include "support.hpp"

using namespace skelanon;
using nlohmann::json;

namespace
{

struct CliRun
{
  int status{0};
  std::string out;
  std::string err;
};

std::string slurp(const std::filesystem::path& p)
{
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CliRun cli(const fixtures::TempDir& dir, const std::string& args)
{
  const std::string cmd = std::string("\"") + SKELANON_CLI + "\" " + args + " >\"" +
                          (dir / "stdout").string() + "\" 2>\"" + (dir / "stderr").string() +
                          "\"";
  const int raw = std::system(cmd.c_str());
  CliRun r;
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = slurp(dir / "stdout");
  r.err = slurp(dir / "stderr");
  return r;
}

}  // namespace

TEST(Cli, SynthInferFuseEvaluate)
{
  fixtures::TempDir dir("cli1");
  const std::string o = "--output \"" + dir.path().string() + "\" --log-level off ";
  ASSERT_EQ(cli(dir, o + "synth --seed 5 --frames 10 --pedestrians 4").status, 0);
  for (const char* f : {"labels.json", "poses.json", "faces.json", "tally.json"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }
  ASSERT_EQ(cli(dir, o + "infer-heads --poses \"" + (dir / "poses.json").string() + "\"").status,
            0);
  ASSERT_EQ(cli(dir, o + "fuse --fusion keep-both --heads \"" + (dir / "heads.json").string() +
                         "\" --faces \"" + (dir / "faces.json").string() + "\"")
                .status,
            0);
  const CliRun r = cli(dir, o + "evaluate --detections \"" + (dir / "fused.json").string() +
                             "\" --labels \"" + (dir / "labels.json").string() + "\"");
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("Both"), std::string::npos) << r.out;
  const EvalCounts counts = counts_from_json(read_json(dir / "report.json"));
  // zero-noise scene: every labeled head is found
  EXPECT_EQ(counts.head_none, 0);
  EXPECT_EQ(counts.none_of_pair, 0);
}

TEST(Cli, ErrorsAreJsonOnStderr)
{
  fixtures::TempDir dir("cli2");
  const CliRun r = cli(dir, "--log-level off evaluate --detections \"" +
                             (dir / "missing.json").string() + "\" --labels x.json");
  EXPECT_EQ(r.status, 1);
  const json err = json::parse(r.err);
  EXPECT_EQ(err["error"]["kind"], "io");
  EXPECT_FALSE(err["error"]["message"].get<std::string>().empty());

  EXPECT_EQ(cli(dir, "frobnicate").status, 2);
}

TEST(Cli, RunFromConfig)
{
  fixtures::TempDir dir("cli3");
  const std::string o = "--log-level off --output \"" + dir.path().string() + "\" ";
  ASSERT_EQ(cli(dir, o + "synth --seed 9 --frames 8").status, 0);
  write_json(dir / "run.json",
             {{"stages", {"infer-heads", "fuse", "evaluate"}},
              {"inputs",
               {{"poses", "poses.json"}, {"faces", "faces.json"}, {"labels", "labels.json"}}},
              {"output", "run_out"}});
  const CliRun r = cli(dir, "--log-level off --config \"" + (dir / "run.json").string() + "\" run");
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_TRUE(std::filesystem::exists(dir / "run_out/report.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "run_out/timings.json"));
}
