#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "codec/corpus.h"
#include "json.hpp"
#include "test_util.h"

namespace fs = std::filesystem;
using codec::read_file;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

fs::path work_dir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("codec_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

Run run(const std::string& args) {
  const auto out = work_dir() / "stdout.txt";
  const auto err = work_dir() / "stderr.txt";
  const std::string cmd = std::string("\"") + CODEC_BIN + "\" " + args + " >\"" + out.string() +
                          "\" 2>\"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_file(out);
  r.err = read_file(err);
  return r;
}

std::string path(const std::string& name) { return (work_dir() / name).string(); }

// Builds corpus, checkpoint and index once for the whole suite.
class Pipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    const auto corpus = codec::testing::corpus_dir().string();
    ASSERT_EQ(run("ingest --src " + corpus + " --out " + path("c.jsonl")).code, 0);
    std::ofstream(path("run.cfg")) << "# fixture run\noptimizer=adam\nlr=0.03\nsteps=300\ndim=8\n";
    ASSERT_EQ(run("train --config " + path("run.cfg") + " --corpus " + path("c.jsonl") + " --out " +
                  path("m.ckpt") + " --metrics " + path("m.csv"))
                  .code,
              0);
    ASSERT_EQ(run("index --corpus " + path("c.jsonl") + " --checkpoint " + path("m.ckpt") +
                  " --out " + path("i.cdxi") + " --threads 2")
                  .code,
              0);
  }
  static std::string model_args() {
    return " --checkpoint " + path("m.ckpt") + " --index " + path("i.cdxi");
  }
};

void expect_error_line(const Run& r, int code, const std::string& kind) {
  EXPECT_EQ(r.code, code) << r.err;
  std::istringstream lines(r.err);
  std::string first;
  std::getline(lines, first);
  const auto j = nlohmann::json::parse(first, nullptr, false);
  ASSERT_FALSE(j.is_discarded()) << r.err;
  EXPECT_EQ(j["error"], kind);
  EXPECT_TRUE(j["message"].is_string());
}

}  // namespace

TEST(CliHelp, EveryFlagDocumented) {
  const std::map<std::string, std::vector<std::string>> flags = {
      {"ingest", {"--src", "--out"}},
      {"train",
       {"--config", "--corpus", "--dim", "--seed", "--lr", "--steps", "--batch-size", "--z-samples",
        "--clip-norm", "--optimizer", "--init-scale", "--out", "--metrics"}},
      {"index", {"--config", "--corpus", "--checkpoint", "--index-mc", "--seed", "--threads", "--out"}},
      {"search",
       {"--config", "--index", "--checkpoint", "--k", "--shards", "--threads", "--query", "--format"}},
      {"eval",
       {"--config", "--corpus", "--checkpoint", "--index", "--seed", "--shards", "--threads",
        "--tasks", "--depth", "--format", "--out"}},
      {"oracle-check",
       {"--config", "--index", "--checkpoint", "--mc-n", "--k", "--seed", "--shards", "--threads",
        "--queries", "--max-queries"}},
      {"bench",
       {"--config", "--index", "--checkpoint", "--threads", "--shards", "--mc-n", "--repeats",
        "--query"}},
      {"stats", {"--index"}},
  };
  for (const auto& [cmd, list] : flags) {
    const auto r = run(cmd + " --help");
    EXPECT_EQ(r.code, 0) << cmd;
    std::istringstream lines(r.out);
    std::map<std::string, std::string> described;
    for (std::string line; std::getline(lines, line);) {
      for (const auto& f : list) {
        const auto pos = line.find(f);
        if (pos == std::string::npos) continue;
        const char after = pos + f.size() < line.size() ? line[pos + f.size()] : ' ';
        if (after != ' ' && after != ',') continue;
        // Description text follows the flag column.
        const auto desc = line.find_first_not_of(' ', line.find("  ", pos + f.size()));
        if (desc != std::string::npos) described[f] = line.substr(desc);
      }
    }
    for (const auto& f : list) {
      ASSERT_TRUE(described.count(f)) << cmd << " " << f << "\n" << r.out;
      EXPECT_GT(described[f].size(), 8u) << cmd << " " << f;
    }
  }
}

TEST(CliErrors, UsageAndMissingFiles) {
  expect_error_line(run("train --bogus"), 2, "usage");
  expect_error_line(run("ingest --src /nonexistent/dir --out " + path("x.jsonl")), 3, "data");
  expect_error_line(run("stats --index " + path("missing.cdxi")), 3, "data");
  std::ofstream(path("bad.cfg")) << "nonsense_key=1\n";
  expect_error_line(run("train --config " + path("bad.cfg") + " --out x"), 2, "usage");
}

TEST_F(Pipeline, TrainWritesMetricsAndImproves) {
  const auto csv = read_file(path("m.csv"));
  std::istringstream lines(csv);
  std::string header, first, last;
  std::getline(lines, header);
  EXPECT_EQ(header, "step,objective");
  std::getline(lines, first);
  for (std::string l; std::getline(lines, l);) last = l;
  const double a = std::stod(first.substr(first.find(',') + 1));
  const double b = std::stod(last.substr(last.find(',') + 1));
  EXPECT_GT(b, a);
}

TEST_F(Pipeline, TrainAndIndexAreReproducible) {
  ASSERT_EQ(run("train --config " + path("run.cfg") + " --corpus " + path("c.jsonl") + " --out " +
                path("m2.ckpt"))
                .code,
            0);
  EXPECT_EQ(read_file(path("m2.ckpt")), read_file(path("m.ckpt")));
  ASSERT_EQ(run("index --corpus " + path("c.jsonl") + " --checkpoint " + path("m.ckpt") +
                " --out " + path("i2.cdxi") + " --threads 1")
                .code,
            0);
  EXPECT_EQ(read_file(path("i2.cdxi")), read_file(path("i.cdxi")));
}

TEST_F(Pipeline, FlagsOverrideConfig) {
  ASSERT_EQ(run("train --config " + path("run.cfg") + " --steps 3 --corpus " + path("c.jsonl") +
                " --out " + path("m3.ckpt") + " --metrics " + path("m3.csv"))
                .code,
            0);
  const auto csv = read_file(path("m3.csv"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}

TEST_F(Pipeline, GuiQueryFindsFrameCreator) {
  const auto q = codec::testing::query_path("gui_frame.mj").string();
  const auto r = run("search --query " + q + model_args() + " -k 5 --format json");
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::size_t n = 0;
  bool frame = false;
  for (std::string line; std::getline(lines, line); ++n) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j["rank"], n + 1);
    for (const char* key : {"id", "score", "sketch", "source"}) EXPECT_TRUE(j.contains(key));
    frame |= j["sketch"].get<std::string>().find("JFrame.JFrame") != std::string::npos;
  }
  EXPECT_EQ(n, 5u);
  EXPECT_TRUE(frame) << r.out;

  const auto table = run("search --query " + q + model_args() + " -k 3 --shards 3 --threads 2");
  ASSERT_EQ(table.code, 0);
  EXPECT_NE(table.out.find("#1 "), std::string::npos);
}

TEST_F(Pipeline, QueryWithoutHoleIsDataError) {
  const auto q = codec::testing::query_path("no_hole.mj").string();
  expect_error_line(run("search --query " + q + model_args()), 3, "data");
}

TEST_F(Pipeline, EvalIsByteIdenticalAcrossRuns) {
  const auto corpus = codec::testing::corpus_dir().string();
  const std::string base = "eval --corpus " + corpus + model_args() + " --tasks 20 --seed 5 --depth 20";
  ASSERT_EQ(run(base + " --out " + path("e1.json")).code, 0);
  ASSERT_EQ(run(base + " --out " + path("e2.json") + " --shards 3 --threads 2").code, 0);
  EXPECT_EQ(read_file(path("e1.json")), read_file(path("e2.json")));
  const auto j = nlohmann::json::parse(read_file(path("e1.json")));
  EXPECT_EQ(j["n_tasks"], 20);

  const auto csv = run(base + " --format csv");
  ASSERT_EQ(csv.code, 0);
  EXPECT_EQ(csv.out.substr(0, csv.out.find('\n')), "metric,api,seq,sketch,exact");
  EXPECT_EQ(std::count(csv.out.begin(), csv.out.end(), '\n'), 5);
}

TEST_F(Pipeline, OracleCheckBenchAndStats) {
  const auto q = codec::testing::query_path("io_surround.mj").string();
  const auto oc = run("oracle-check --queries " + q + model_args() + " --n 50 -k 10");
  ASSERT_EQ(oc.code, 0) << oc.err;
  EXPECT_NE(oc.out.find("mean_jaccard@10="), std::string::npos);

  const auto bench = run("bench" + model_args() + " --repeats 3 --threads 1");
  ASSERT_EQ(bench.code, 0) << bench.err;
  EXPECT_NE(bench.out.find("slowdown="), std::string::npos);

  const auto stats = run("stats --index " + path("i.cdxi"));
  ASSERT_EQ(stats.code, 0);
  EXPECT_EQ(stats.out.rfind("count=104 d=8 checksum=", 0), 0u) << stats.out;
}
