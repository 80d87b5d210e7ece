#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ecpt/metrics.hpp"
#include "ecpt/objectives.hpp"
#include "ecpt/sampler.hpp"

namespace ecpt {

/// Everything a run needs, serializable to one JSON file:
///
///   {"manifest": "corpora.json", "vocab": "vocab.txt", "alpha": 0.3,
///    "seed": 0, "max_len": 512, "task_mix": 0.5, "sep_mode": false,
///    "num_examples": 1000, "metrics": {...},
///    "outputs": {"plan": ..., "jsonl": ..., "binary": ..., "report": ...}}
///
/// Relative paths are resolved against the config file's directory.
struct PipelineConfig {
  std::filesystem::path manifest;
  std::filesystem::path vocab;
  double alpha = kDefaultAlpha;
  std::uint64_t seed = 0;
  std::size_t max_len = 512;
  double task_mix = 0.5;
  bool sep_mode = false;
  std::uint64_t num_examples = 1000;
  metrics::MetricConfig metrics;

  std::filesystem::path plan_path;
  std::filesystem::path jsonl_path;
  std::filesystem::path binary_path;
  std::filesystem::path report_path;

  /// Throws InvalidInput on a bad value.
  void validate() const;

  /// Replaces the seed with EC_SEED when that variable is set.
  void apply_env();

  std::string to_json() const;
  static PipelineConfig from_json(std::string_view json, const std::filesystem::path& base_dir);
  static PipelineConfig load(const std::filesystem::path& file);

  StreamOptions stream_options() const;
};

inline constexpr const char* kSeedEnvVar = "EC_SEED";

/// The plan named by the config, or one computed from the manifest.
StreamPlan resolve_plan(const PipelineConfig& config, const CorpusManifest& manifest);

/// First n examples of the stream. With workers > 1 shard k builds the
/// indices congruent to k and the results are interleaved back into stream
/// order, so the output does not depend on the worker count.
std::vector<PretrainExample> build_examples(const StreamPlan& plan,
                                            const std::vector<LoadedCorpus>& corpora,
                                            std::shared_ptr<const SubwordVocabulary> vocab,
                                            const StreamOptions& opts, std::uint64_t n,
                                            unsigned workers = 1);

struct BuildSummary {
  std::uint64_t examples = 0;
  std::map<std::string, std::uint64_t> per_task;
  std::map<std::string, std::uint64_t> per_modality;
  std::map<std::string, std::uint64_t> per_corpus;
  std::uint64_t plan_digest = 0;
};

BuildSummary summarize(const std::vector<PretrainExample>& examples, std::uint64_t plan_digest);

/// Loads manifest, vocabulary and plan, builds config.num_examples examples
/// and writes the configured outputs unless dry_run is set. A configured plan
/// path that does not exist yet receives the computed plan.
BuildSummary run_build(const PipelineConfig& config, unsigned workers = 1, bool dry_run = false);

}  // namespace ecpt
