#include "ecpt/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "ecpt/error.hpp"
#include "ecpt/languages.hpp"
#include "ecpt/text.hpp"

namespace ecpt {

std::string_view to_string(Task t) { return t == Task::SCLM ? "SCLM" : "PTLM"; }

Task task_from_string(std::string_view s) {
  if (s == "SCLM") return Task::SCLM;
  if (s == "PTLM") return Task::PTLM;
  throw InvalidInput("unknown task '" + std::string(s) + "'");
}

std::size_t SpanMask::noise_count() const {
  std::size_t total = 0;
  for (const auto& s : spans) total += s.length;
  return total;
}

// ---------------------------------------------------------------------------
// Span masks

std::size_t num_noise_tokens(std::size_t n, double rate) {
  if (n < 2) throw InvalidInput("span mask needs at least 2 tokens");
  if (!(rate > 0.0)) return 0;
  const auto rounded = static_cast<std::size_t>(std::llround(rate * static_cast<double>(n)));
  return std::min(n - 1, std::max<std::size_t>(1, rounded));
}

std::size_t num_noise_spans(std::size_t n, std::size_t noise, double mean_span) {
  if (noise == 0) return 0;
  if (!(mean_span > 0.0)) throw InvalidInput("mean span length must be positive");
  auto spans = static_cast<std::size_t>(
      std::llround(static_cast<double>(noise) / mean_span));
  spans = std::max<std::size_t>(1, spans);
  spans = std::min(spans, noise);
  spans = std::min(spans, n - noise + 1);
  spans = std::min<std::size_t>(spans, kNumSentinels);
  return spans;
}

std::vector<std::size_t> random_composition(std::size_t total, std::size_t parts, Rng& rng) {
  if (parts == 0 || parts > total) {
    throw InvalidInput("cannot split " + std::to_string(total) + " into " +
                       std::to_string(parts) + " positive parts");
  }
  const std::size_t pool = total - 1;
  const std::size_t picks = parts - 1;
  std::vector<std::size_t> cuts;
  cuts.reserve(picks);
  std::unordered_set<std::size_t> taken;
  for (std::size_t j = pool - picks + 1; j <= pool && picks > 0; ++j) {
    const std::size_t t = 1 + static_cast<std::size_t>(rng.below(j));
    const std::size_t chosen = taken.contains(t) ? j : t;
    taken.insert(chosen);
    cuts.push_back(chosen);
  }
  std::sort(cuts.begin(), cuts.end());
  std::vector<std::size_t> out;
  out.reserve(parts);
  std::size_t prev = 0;
  for (auto c : cuts) {
    out.push_back(c - prev);
    prev = c;
  }
  out.push_back(total - prev);
  return out;
}

SpanMask sample_span_mask(std::size_t n, Rng& rng, const SpanMaskConfig& config) {
  SpanMask mask;
  mask.length = n;
  mask.noise_rate = config.noise_rate;
  mask.mean_span = config.mean_span;
  const std::size_t noise = num_noise_tokens(n, config.noise_rate);
  if (noise == 0) return mask;
  const std::size_t num_spans = num_noise_spans(n, noise, config.mean_span);
  const std::size_t non_noise = n - noise;

  const auto noise_lengths = random_composition(noise, num_spans, rng);
  auto gaps = random_composition(non_noise + 2, num_spans + 1, rng);
  gaps.front() -= 1;
  gaps.back() -= 1;

  std::size_t pos = gaps[0];
  mask.spans.reserve(num_spans);
  for (std::size_t k = 0; k < num_spans; ++k) {
    mask.spans.push_back({pos, noise_lengths[k]});
    pos += noise_lengths[k] + gaps[k + 1];
  }
  return mask;
}

// ---------------------------------------------------------------------------
// SCLM

PretrainExample build_sclm(std::span<const TokenId> tokens, const SpanMask& mask,
                           const SclmOptions& opts) {
  if (mask.spans.size() > kNumSentinels) {
    throw InvalidInput("mask has " + std::to_string(mask.spans.size()) + " spans; only " +
                       std::to_string(kNumSentinels) + " sentinels exist");
  }
  if (mask.length != tokens.size() && !mask.spans.empty()) {
    throw InvalidInput("mask length does not match token count");
  }
  PretrainExample ex;
  ex.task = Task::SCLM;
  std::size_t cursor = 0;
  for (std::size_t k = 0; k < mask.spans.size(); ++k) {
    const auto& s = mask.spans[k];
    if (s.length == 0 || s.start < cursor || s.start + s.length > tokens.size()) {
      throw InvalidInput("mask spans must be non-empty, sorted, disjoint and in bounds");
    }
    ex.input_ids.insert(ex.input_ids.end(), tokens.begin() + cursor, tokens.begin() + s.start);
    const TokenId sentinel = sentinel_id(static_cast<TokenId>(k));
    ex.input_ids.push_back(sentinel);
    ex.target_ids.push_back(sentinel);
    ex.target_ids.insert(ex.target_ids.end(), tokens.begin() + s.start,
                         tokens.begin() + s.start + s.length);
    cursor = s.start + s.length;
  }
  ex.input_ids.insert(ex.input_ids.end(), tokens.begin() + cursor, tokens.end());
  if (opts.terminal_sentinel && !mask.spans.empty() && mask.spans.size() < kNumSentinels) {
    ex.target_ids.push_back(sentinel_id(static_cast<TokenId>(mask.spans.size())));
  }
  ex.target_ids.push_back(id_of(Special::Eos));
  return ex;
}

// ---------------------------------------------------------------------------
// PTLM

namespace {

std::string resolve_language(std::string_view lang) {
  auto name = language_display_name(lang);
  if (!name) throw InvalidInput("unknown language name '" + std::string(lang) + "'");
  return *name;
}

}  // namespace

std::string translation_prompt(std::string_view source_lang, std::string_view target_lang) {
  return "translate " + resolve_language(source_lang) + " to " + resolve_language(target_lang) +
         ": \n";
}

std::string repair_prompt() { return "fix bugs: \n"; }

PretrainExample build_ptlm(std::string_view source_text, std::string_view target_text,
                           const TranslationDirection& direction,
                           const SubwordVocabulary& vocab, bool sep_mode) {
  if (text::trim(source_text).empty() || text::trim(target_text).empty()) {
    throw InvalidInput("translation pair has an empty side");
  }
  const std::string src = resolve_language(direction.source);
  const std::string tgt = resolve_language(direction.target);
  PretrainExample ex;
  ex.task = Task::PTLM;
  ex.direction = std::make_pair(src, tgt);
  // The prompt ends in a newline, so encoding it separately yields the same
  // ids as encoding the concatenated text.
  ex.input_ids = encode(translation_prompt(src, tgt), vocab).ids;
  ex.meta.prompt_len = ex.input_ids.size();
  const auto body = encode(source_text, vocab).ids;
  ex.input_ids.insert(ex.input_ids.end(), body.begin(), body.end());
  if (sep_mode) {
    ex.input_ids.push_back(id_of(Special::Sep));
    ex.input_ids.push_back(sentinel_id(0));
    ex.meta.suffix_len = 2;
  }
  ex.target_ids = encode(target_text, vocab).ids;
  ex.target_ids.push_back(id_of(Special::Eos));
  return ex;
}

PretrainExample build_ptlm(const ParallelPair& pair, const TranslationDirection& direction,
                           const SubwordVocabulary& vocab, bool sep_mode) {
  const auto src = resolve_language(direction.source);
  const auto tgt = resolve_language(direction.target);
  const auto pair_src = resolve_language(pair.source_lang);
  const auto pair_tgt = resolve_language(pair.target_lang);
  PretrainExample ex;
  if (src == pair_src && tgt == pair_tgt) {
    ex = build_ptlm(pair.source_text, pair.target_text, {src, tgt}, vocab, sep_mode);
  } else if (src == pair_tgt && tgt == pair_src) {
    ex = build_ptlm(pair.target_text, pair.source_text, {src, tgt}, vocab, sep_mode);
  } else {
    throw InvalidInput("direction " + src + "->" + tgt + " does not match pair " + pair.id);
  }
  ex.meta.record_id = pair.id;
  return ex;
}

PretrainExample build_ptlm(const CodeDoc& doc, const TranslationDirection& direction,
                           const SubwordVocabulary& vocab, bool sep_mode) {
  PretrainExample ex;
  if (direction.target == doc.pl_name && direction.source != doc.pl_name) {
    ex = build_ptlm(doc.docstring, doc.code, direction, vocab, sep_mode);
  } else if (direction.source == doc.pl_name && direction.target != doc.pl_name) {
    ex = build_ptlm(doc.code, doc.docstring, direction, vocab, sep_mode);
  } else {
    throw InvalidInput("direction must pair " + doc.pl_name + " with a natural language");
  }
  ex.meta.record_id = doc.id;
  return ex;
}

// ---------------------------------------------------------------------------
// Packing

PretrainExample pack_and_truncate(PretrainExample ex, const PackOptions& opts) {
  if (opts.max_len == 0 || opts.target_cap == 0) {
    throw InvalidInput("max_len and target_cap must be positive");
  }
  const std::size_t keep_front = ex.meta.prompt_len;
  const std::size_t keep_back = ex.meta.suffix_len;
  if (keep_front + keep_back > opts.max_len) {
    throw InvalidInput("prompt of " + std::to_string(keep_front + keep_back) +
                       " tokens exceeds max_len " + std::to_string(opts.max_len));
  }
  if (ex.input_ids.size() > opts.max_len) {
    std::vector<TokenId> cut(ex.input_ids.begin(),
                             ex.input_ids.begin() + static_cast<std::ptrdiff_t>(opts.max_len - keep_back));
    cut.insert(cut.end(), ex.input_ids.end() - static_cast<std::ptrdiff_t>(keep_back),
               ex.input_ids.end());
    ex.input_ids = std::move(cut);
    ex.meta.truncated_input = true;
  }
  if (ex.target_ids.size() > opts.target_cap) {
    const bool had_eos = !ex.target_ids.empty() && ex.target_ids.back() == id_of(Special::Eos);
    ex.target_ids.resize(had_eos ? opts.target_cap - 1 : opts.target_cap);
    if (had_eos) ex.target_ids.push_back(id_of(Special::Eos));
    ex.meta.truncated_target = true;
  }
  return ex;
}

// ---------------------------------------------------------------------------
// Reference loss

double reference_nll(const PretrainExample& ex, const LossOracle& oracle) {
  if (!oracle) throw InvalidInput("reference_nll: no oracle");
  const std::span<const TokenId> target(ex.target_ids);
  double total = 0.0;
  for (std::size_t t = 0; t < target.size(); ++t) {
    const double lp = oracle(target.first(t), ex.input_ids, target[t]);
    if (!(lp <= 0.0)) {
      throw InvalidInput("oracle returned a log-probability above zero at position " +
                         std::to_string(t));
    }
    total -= lp;
  }
  return total;
}

}  // namespace ecpt
