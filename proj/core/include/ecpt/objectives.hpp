#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ecpt/corpus.hpp"
#include "ecpt/rng.hpp"
#include "ecpt/tokenizer.hpp"

namespace ecpt {

enum class Task { SCLM, PTLM };

std::string_view to_string(Task t);
Task task_from_string(std::string_view s);

struct Span {
  std::size_t start = 0;
  std::size_t length = 0;

  bool operator==(const Span&) const = default;
};

struct SpanMaskConfig {
  double noise_rate = 0.15;
  double mean_span = 3.0;
};

/// Disjoint, sorted corrupted spans over a token sequence of `length`.
struct SpanMask {
  std::vector<Span> spans;
  std::size_t length = 0;
  double noise_rate = 0.15;
  double mean_span = 3.0;

  std::size_t noise_count() const;
  bool operator==(const SpanMask&) const = default;
};

/// min(n - 1, max(1, round(rate * n))); rounding is half away from zero.
std::size_t num_noise_tokens(std::size_t n, double rate);

/// max(1, round(noise / mean_span)), capped so every span and every interior
/// gap is non-empty and at the sentinel count.
std::size_t num_noise_spans(std::size_t n, std::size_t noise, double mean_span);

/// Uniform random composition of `total` into `parts` positive integers:
/// parts - 1 distinct cut points are drawn from {1, ..., total - 1} with
/// Floyd's subset algorithm (for j = N-K+1..N: t = 1 + below(j); take t, or j
/// if t is already taken), then sorted.
std::vector<std::size_t> random_composition(std::size_t total, std::size_t parts, Rng& rng);

/// Draws a span-corruption mask. Noise lengths are a random composition of
/// the noise budget into num_spans parts; non-noise lengths are a random
/// composition of (non_noise + 2) into num_spans + 1 parts with one removed
/// from each end, so only the leading and trailing gaps may be empty. Layout
/// interleaves gap, span, gap, ..., span, gap. rate <= 0 yields no spans.
SpanMask sample_span_mask(std::size_t n, Rng& rng, const SpanMaskConfig& config = {});

struct ExampleMeta {
  std::string record_id;
  std::uint64_t stream_index = 0;
  std::uint64_t epoch = 0;
  std::size_t prompt_len = 0;  // leading input tokens that truncation keeps
  std::size_t suffix_len = 0;  // trailing input tokens that truncation keeps
  bool truncated_input = false;
  bool truncated_target = false;

  bool operator==(const ExampleMeta&) const = default;
};

struct PretrainExample {
  std::vector<TokenId> input_ids;
  std::vector<TokenId> target_ids;
  Task task = Task::SCLM;
  std::string corpus_id;
  std::optional<std::pair<std::string, std::string>> direction;  // display names
  ExampleMeta meta;

  bool operator==(const PretrainExample&) const = default;
};

struct SclmOptions {
  /// Append SENTINEL_k after the last span (before EOS).
  bool terminal_sentinel = false;
};

/// Replaces each masked span by SENTINEL_k in the input; the target lists
/// SENTINEL_k followed by the span's tokens for every span, then EOS.
PretrainExample build_sclm(std::span<const TokenId> tokens, const SpanMask& mask,
                           const SclmOptions& opts = {});

/// "translate {A} to {B}: \n" with A and B resolved to display names.
std::string translation_prompt(std::string_view source_lang, std::string_view target_lang);
std::string repair_prompt();

struct TranslationDirection {
  std::string source;
  std::string target;
};

/// Translation example over raw texts: input = prompt + source (+ SEP,
/// SENTINEL_0 when sep_mode), target = target tokens + EOS.
PretrainExample build_ptlm(std::string_view source_text, std::string_view target_text,
                           const TranslationDirection& direction,
                           const SubwordVocabulary& vocab, bool sep_mode);

/// Direction must match the pair's languages in either order.
PretrainExample build_ptlm(const ParallelPair& pair, const TranslationDirection& direction,
                           const SubwordVocabulary& vocab, bool sep_mode);

/// Direction is (nl_label, pl_name) or (pl_name, nl_label).
PretrainExample build_ptlm(const CodeDoc& doc, const TranslationDirection& direction,
                           const SubwordVocabulary& vocab, bool sep_mode);

struct PackOptions {
  std::size_t max_len = 512;
  std::size_t target_cap = 512;
};

/// Tail-truncates input and target. The input keeps its prompt prefix and
/// protected suffix; the target keeps its final EOS. Throws InvalidInput when
/// the protected parts alone exceed max_len.
PretrainExample pack_and_truncate(PretrainExample ex, const PackOptions& opts);

/// log P(next | target prefix, input). Must return values <= 0.
using LossOracle = std::function<double(std::span<const TokenId> prefix,
                                        std::span<const TokenId> input, TokenId next)>;

/// Sum over target positions of -log P(target_t | target_<t, input).
double reference_nll(const PretrainExample& ex, const LossOracle& oracle);

}  // namespace ecpt
