#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ecpt/corpus.hpp"
#include "ecpt/objectives.hpp"
#include "ecpt/tokenizer.hpp"

namespace ecpt {

inline constexpr double kDefaultAlpha = 0.3;

/// Corpus probabilities before and after exponent rescaling. Keyed by
/// corpus id (sorted, so iteration order is stable).
struct CorpusWeights {
  double alpha = kDefaultAlpha;
  std::map<std::string, double> raw;
  std::map<std::string, double> rescaled;
};

/// q_i = p_i^alpha / sum_j p_j^alpha. Requires p_i >= 0 summing to 1 (within
/// 1e-6), not all zero, and alpha in (0, 1].
CorpusWeights rescale(const std::map<std::string, double>& raw, double alpha);

/// Record-count proportions of the corpora of one kind.
std::map<std::string, double> proportions(const CorpusManifest& manifest, CorpusKind kind);

/// Within-modality corpus weights. The monolingual and parallel pools of the
/// modality are rescaled separately and mixed as task_mix : (1 - task_mix);
/// a missing pool gives its share to the other.
CorpusWeights modality_weights(const CorpusManifest& manifest, Modality modality, double alpha,
                               double task_mix);

struct PlanEntry {
  std::string corpus_id;
  double probability = 0.0;

  bool operator==(const PlanEntry&) const = default;
};

/// Static sampling plan. Even stream indices draw from NL, odd from PL; the
/// corpus is then drawn by probability with a per-index generator.
struct StreamPlan {
  std::uint64_t seed = 0;
  double alpha = kDefaultAlpha;
  double task_mix = 0.5;
  std::uint64_t epoch_size = 1;
  std::vector<PlanEntry> nl;
  std::vector<PlanEntry> pl;

  struct Draw {
    Modality modality;
    std::size_t entry;  // index into nl or pl
  };

  Modality modality_at(std::uint64_t index) const;
  Draw draw(std::uint64_t index) const;
  const PlanEntry& entry(const Draw& d) const;

  /// {"alpha", "seed", "nl": {id: q}, "pl": {id: q}, "task_mix", "epoch_size"}
  std::string to_json() const;
  static StreamPlan from_json(std::string_view json);
  static StreamPlan load(const std::filesystem::path& file);
  void save(const std::filesystem::path& file) const;

  /// Hash of the serialized plan.
  std::uint64_t digest() const;

  bool operator==(const StreamPlan&) const = default;
};

StreamPlan plan_stream(const CorpusWeights& nl, const CorpusWeights& pl, std::uint64_t seed,
                       std::uint64_t epoch_size, double task_mix = 0.5);

/// Plan straight from manifest counts.
StreamPlan plan_from_manifest(const CorpusManifest& manifest, double alpha, double task_mix,
                              std::uint64_t seed, std::uint64_t epoch_size);

struct StreamOptions {
  PackOptions pack;
  bool sep_mode = false;
  SpanMaskConfig span;
  SclmOptions sclm;
  LabelPolicyOptions label;
};

/// One loaded corpus. Parallel corpora expose each record twice per epoch,
/// once per translation direction.
struct LoadedCorpus {
  std::string corpus_id;
  CorpusKind kind;
  std::vector<Record> records;

  std::size_t epoch_length() const { return records.size() * (is_parallel(kind) ? 2 : 1); }
};

/// Builds the example for one drawn slot. Pure in (corpus, slot, epoch, seed).
PretrainExample build_example(const LoadedCorpus& corpus, std::size_t record_index,
                              bool reverse, std::uint64_t epoch, std::uint64_t seed,
                              const SubwordVocabulary& vocab, const StreamOptions& opts);

/// Per-corpus iteration state shared by every shard.
struct StreamCursor {
  std::uint64_t next_index = 0;
  std::map<std::string, std::uint64_t> drawn;  // per corpus id
};

/// Deterministic example stream over a plan. Shard k of w yields exactly the
/// global stream entries whose index is congruent to k modulo w.
class ExampleStream {
 public:
  ExampleStream(StreamPlan plan, std::vector<LoadedCorpus> corpora,
                std::shared_ptr<const SubwordVocabulary> vocab, StreamOptions opts,
                std::uint32_t shard = 0, std::uint32_t num_shards = 1);

  /// Loads every corpus the plan references from the manifest.
  static std::vector<LoadedCorpus> load_corpora(const StreamPlan& plan,
                                                const CorpusManifest& manifest);

  PretrainExample next();

  const StreamCursor& cursor() const { return cursor_; }
  const StreamPlan& plan() const { return plan_; }

 private:
  struct Slot {
    std::size_t corpus;
    std::size_t record;
    bool reverse;
    std::uint64_t epoch;
  };
  Slot advance(std::uint64_t index);
  const std::vector<std::uint32_t>& permutation(std::size_t corpus, std::uint64_t epoch);

  StreamPlan plan_;
  std::vector<LoadedCorpus> corpora_;
  std::map<std::string, std::size_t> corpus_index_;
  std::shared_ptr<const SubwordVocabulary> vocab_;
  StreamOptions opts_;
  std::uint32_t shard_;
  std::uint32_t num_shards_;
  StreamCursor cursor_;
  std::vector<std::pair<std::uint64_t, std::vector<std::uint32_t>>> perm_cache_;
};

/// Fisher-Yates permutation of [0, n) keyed by (seed, corpus_id, epoch).
std::vector<std::uint32_t> epoch_permutation(std::uint64_t seed, std::string_view corpus_id,
                                             std::uint64_t epoch, std::size_t n);

}  // namespace ecpt
