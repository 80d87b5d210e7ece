#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "ecpt/batch_io.hpp"
#include "ecpt/error.hpp"
#include "ecpt/pipeline.hpp"
#include "support.hpp"

using namespace ecpt;
using ecpt::testing::data_dir;
using ecpt::testing::read_file;
using ecpt::testing::TempDir;
using ecpt::testing::write_file;

namespace {

PipelineConfig base_config(const TempDir& tmp, std::uint64_t n = 40) {
  PipelineConfig c;
  c.manifest = data_dir() / "corpora" / "manifest.json";
  c.vocab = data_dir() / "vocab" / "tiny.vocab";
  c.seed = 11;
  c.num_examples = n;
  c.jsonl_path = tmp / "out.jsonl";
  c.binary_path = tmp / "out.bin";
  c.plan_path = tmp / "plan.json";
  return c;
}

class EnvGuard {
 public:
  explicit EnvGuard(const char* value) {
    if (value) ::setenv(kSeedEnvVar, value, 1);
    else ::unsetenv(kSeedEnvVar);
  }
  ~EnvGuard() { ::unsetenv(kSeedEnvVar); }
};

}  // namespace

TEST(PipelineConfig, ParsesAndResolvesRelativePaths) {
  TempDir tmp;
  write_file(tmp / "run.json", R"({"manifest": "m.json", "vocab": "/abs/v.txt", "alpha": 0.5,
    "seed": 9, "max_len": 1024, "task_mix": 0.25, "sep_mode": true, "num_examples": 7,
    "outputs": {"jsonl": "o/x.jsonl"}})");
  const auto c = PipelineConfig::load(tmp / "run.json");
  EXPECT_EQ(c.manifest, tmp / "m.json");
  EXPECT_EQ(c.vocab, "/abs/v.txt");
  EXPECT_DOUBLE_EQ(c.alpha, 0.5);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.max_len, 1024u);
  EXPECT_DOUBLE_EQ(c.task_mix, 0.25);
  EXPECT_TRUE(c.sep_mode);
  EXPECT_EQ(c.num_examples, 7u);
  EXPECT_EQ(c.jsonl_path, tmp / "o/x.jsonl");
  EXPECT_TRUE(c.binary_path.empty());

  const auto again = PipelineConfig::from_json(c.to_json(), "/elsewhere");
  EXPECT_EQ(again.to_json(), c.to_json());
}

TEST(PipelineConfig, Rejections) {
  EXPECT_THROW(PipelineConfig::from_json(R"({"colour": 1})", "."), InvalidInput);
  EXPECT_THROW(PipelineConfig::from_json(R"({"outputs": {"pdf": "x"}})", "."), InvalidInput);
  EXPECT_THROW(PipelineConfig::from_json(R"({"alpha": 0})", ".").validate(), InvalidInput);
  EXPECT_THROW(PipelineConfig::from_json(R"({"max_len": 700})", ".").validate(), InvalidInput);
  EXPECT_THROW(PipelineConfig::from_json("[1]", "."), InvalidInput);
  EXPECT_THROW(PipelineConfig::from_json("{", "."), InvalidInput);
  EXPECT_THROW(PipelineConfig::load("/no/such/config.json"), IoError);
}

TEST(PipelineConfig, SeedFromEnvironment) {
  PipelineConfig c;
  c.seed = 3;
  {
    EnvGuard env("12345");
    c.apply_env();
    EXPECT_EQ(c.seed, 12345u);
  }
  {
    EnvGuard env("-4");
    EXPECT_THROW(c.apply_env(), InvalidInput);
  }
  {
    EnvGuard env("12ab");
    EXPECT_THROW(c.apply_env(), InvalidInput);
  }
  {
    EnvGuard env(nullptr);
    c.seed = 5;
    c.apply_env();
    EXPECT_EQ(c.seed, 5u);
  }
}

TEST(RunBuild, ByteIdenticalAcrossRunsAndWorkers) {
  TempDir a, b, c;
  const auto sa = run_build(base_config(a), 1);
  const auto sb = run_build(base_config(b), 1);
  const auto sc = run_build(base_config(c), 4);
  EXPECT_EQ(sa.examples, 40u);
  for (const char* f : {"out.jsonl", "out.bin", "plan.json"}) {
    EXPECT_EQ(read_file(a / f), read_file(b / f)) << f;
    EXPECT_EQ(read_file(a / f), read_file(c / f)) << f;
  }
  EXPECT_EQ(sa.plan_digest, sc.plan_digest);
  EXPECT_EQ(sa.per_modality.at("NL"), 20u);
  EXPECT_EQ(sa.per_modality.at("PL"), 20u);
}

TEST(RunBuild, SeedChangesOutput) {
  TempDir a, b;
  auto ca = base_config(a);
  auto cb = base_config(b);
  cb.seed = 12;
  run_build(ca);
  run_build(cb);
  EXPECT_NE(read_file(a / "out.jsonl"), read_file(b / "out.jsonl"));
}

TEST(RunBuild, OutputsReadBack) {
  TempDir tmp;
  run_build(base_config(tmp, 12));
  std::ifstream j(tmp / "out.jsonl");
  const auto from_json = read_jsonl(j);
  std::ifstream bin(tmp / "out.bin", std::ios::binary);
  const auto from_bin = read_binary(bin);
  ASSERT_EQ(from_json.size(), 12u);
  ASSERT_EQ(from_bin.size(), 12u);
  for (std::size_t i = 0; i < 12; ++i) {
    EXPECT_EQ(from_json[i].meta.stream_index, i);
    EXPECT_LE(from_json[i].input_ids.size(), 512u);
  }
}

TEST(RunBuild, DryRunWritesNothing) {
  TempDir tmp;
  const auto s = run_build(base_config(tmp, 10), 2, true);
  EXPECT_EQ(s.examples, 10u);
  EXPECT_FALSE(std::filesystem::exists(tmp / "out.jsonl"));
  EXPECT_FALSE(std::filesystem::exists(tmp / "out.bin"));
}

TEST(RunBuild, MissingInputs) {
  TempDir tmp;
  auto c = base_config(tmp);
  c.vocab = tmp / "missing.vocab";
  EXPECT_THROW(run_build(c), InvalidInput);
  c = base_config(tmp);
  write_file(tmp / "empty.json", R"({"entries": []})");
  c.manifest = tmp / "empty.json";
  EXPECT_THROW(run_build(c), InvalidInput);
}
