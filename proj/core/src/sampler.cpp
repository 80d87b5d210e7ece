#include "ecpt/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "ecpt/error.hpp"
#include "ecpt/rng.hpp"

namespace ecpt {

using ordered_json = nlohmann::ordered_json;

CorpusWeights rescale(const std::map<std::string, double>& raw, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw InvalidInput("alpha must lie in (0, 1], got " + std::to_string(alpha));
  }
  if (raw.empty()) throw InvalidInput("rescale: no corpora");
  double sum_p = 0.0;
  for (const auto& [id, p] : raw) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw InvalidInput("rescale: p of '" + id + "' is negative");
    sum_p += p;
  }
  if (sum_p == 0.0) throw InvalidInput("rescale: all probabilities are zero");
  if (std::abs(sum_p - 1.0) > 1e-6) {
    throw InvalidInput("rescale: probabilities sum to " + std::to_string(sum_p) + ", not 1");
  }
  CorpusWeights w;
  w.alpha = alpha;
  w.raw = raw;
  double z = 0.0;
  for (const auto& [id, p] : raw) z += std::pow(p, alpha);
  // a total that is 1 up to rounding is left alone so alpha = 1 is exact
  if (std::abs(z - 1.0) <= 4 * std::numeric_limits<double>::epsilon()) z = 1.0;
  for (const auto& [id, p] : raw) w.rescaled[id] = std::pow(p, alpha) / z;
  return w;
}

std::map<std::string, double> proportions(const CorpusManifest& manifest, CorpusKind kind) {
  std::uint64_t total = 0;
  for (const auto& e : manifest.entries()) {
    if (e.kind == kind) total += e.sample_count;
  }
  std::map<std::string, double> out;
  if (total == 0) return out;
  for (const auto& e : manifest.entries()) {
    if (e.kind == kind) {
      out[e.corpus_id] = static_cast<double>(e.sample_count) / static_cast<double>(total);
    }
  }
  return out;
}

CorpusWeights modality_weights(const CorpusManifest& manifest, Modality modality, double alpha,
                               double task_mix) {
  if (!(task_mix >= 0.0 && task_mix <= 1.0)) throw InvalidInput("task_mix must lie in [0, 1]");
  const CorpusKind mono = modality == Modality::NL ? CorpusKind::NlMono : CorpusKind::PlMono;
  const CorpusKind para =
      modality == Modality::NL ? CorpusKind::NlParallel : CorpusKind::NlPlParallel;
  const auto p_mono = proportions(manifest, mono);
  const auto p_para = proportions(manifest, para);
  if (p_mono.empty() && p_para.empty()) {
    throw InvalidInput("no " + std::string(to_string(modality)) + " corpora with records");
  }
  double mono_share = task_mix;
  if (p_mono.empty()) mono_share = 0.0;
  if (p_para.empty()) mono_share = 1.0;

  CorpusWeights w;
  w.alpha = alpha;
  std::uint64_t total = 0;
  for (const auto& e : manifest.entries()) {
    if (modality_of(e.kind) == modality) total += e.sample_count;
  }
  for (const auto& e : manifest.entries()) {
    if (modality_of(e.kind) == modality) {
      w.raw[e.corpus_id] = static_cast<double>(e.sample_count) / static_cast<double>(total);
    }
  }
  if (!p_mono.empty()) {
    for (const auto& [id, q] : rescale(p_mono, alpha).rescaled) w.rescaled[id] = mono_share * q;
  }
  if (!p_para.empty()) {
    for (const auto& [id, q] : rescale(p_para, alpha).rescaled) {
      w.rescaled[id] = (1.0 - mono_share) * q;
    }
  }
  return w;
}

// ---------------------------------------------------------------------------
// Plan

Modality StreamPlan::modality_at(std::uint64_t index) const {
  return index % 2 == 0 ? Modality::NL : Modality::PL;
}

StreamPlan::Draw StreamPlan::draw(std::uint64_t index) const {
  const Modality m = modality_at(index);
  const auto& entries = m == Modality::NL ? nl : pl;
  if (entries.empty()) throw DataError("plan has no " + std::string(to_string(m)) + " corpora");
  Rng rng = Rng(seed).derive(fnv1a64("draw")).derive(index);
  const double u = rng.uniform();
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t k = 0; k < entries.size(); ++k) {
    if (entries[k].probability <= 0.0) continue;
    last = k;
    acc += entries[k].probability;
    if (u < acc) return {m, k};
  }
  return {m, last};
}

const PlanEntry& StreamPlan::entry(const Draw& d) const {
  return d.modality == Modality::NL ? nl.at(d.entry) : pl.at(d.entry);
}

std::string StreamPlan::to_json() const {
  ordered_json j;
  j["alpha"] = alpha;
  j["seed"] = seed;
  ordered_json jnl = ordered_json::object();
  for (const auto& e : nl) jnl[e.corpus_id] = e.probability;
  ordered_json jpl = ordered_json::object();
  for (const auto& e : pl) jpl[e.corpus_id] = e.probability;
  j["nl"] = std::move(jnl);
  j["pl"] = std::move(jpl);
  j["task_mix"] = task_mix;
  j["epoch_size"] = epoch_size;
  return j.dump(2);
}

StreamPlan StreamPlan::from_json(std::string_view text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("plan is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw DataError("plan must be a JSON object");
  static const std::vector<std::string> kKeys = {"alpha", "seed", "nl", "pl", "task_mix",
                                                 "epoch_size"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end()) {
      throw DataError("unknown plan key '" + key + "'");
    }
  }
  try {
    StreamPlan p;
    p.alpha = j.value("alpha", kDefaultAlpha);
    p.seed = j.at("seed").get<std::uint64_t>();
    p.task_mix = j.value("task_mix", 0.5);
    p.epoch_size = j.value("epoch_size", std::uint64_t{1});
    auto read_side = [](const ordered_json& side) {
      std::vector<PlanEntry> out;
      for (const auto& [id, q] : side.items()) out.push_back({id, q.get<double>()});
      std::sort(out.begin(), out.end(),
                [](const PlanEntry& a, const PlanEntry& b) { return a.corpus_id < b.corpus_id; });
      return out;
    };
    p.nl = read_side(j.at("nl"));
    p.pl = read_side(j.at("pl"));
    if (p.nl.empty() || p.pl.empty()) throw DataError("plan needs NL and PL corpora");
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad plan: ") + e.what());
  }
}

StreamPlan StreamPlan::load(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot read plan " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

void StreamPlan::save(const std::filesystem::path& file) const {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw IoError("cannot write plan " + file.string());
  out << to_json() << '\n';
}

std::uint64_t StreamPlan::digest() const { return fnv1a64(to_json()); }

StreamPlan plan_stream(const CorpusWeights& nl, const CorpusWeights& pl, std::uint64_t seed,
                       std::uint64_t epoch_size, double task_mix) {
  if (epoch_size == 0) throw InvalidInput("epoch_size must be positive");
  StreamPlan p;
  p.seed = seed;
  p.alpha = nl.rescaled.empty() ? pl.alpha : nl.alpha;
  p.task_mix = task_mix;
  p.epoch_size = epoch_size;
  auto fill = [](const CorpusWeights& w, std::vector<PlanEntry>& out, std::string_view name) {
    double total = 0.0;
    for (const auto& [id, q] : w.rescaled) {
      if (q > 0.0) {
        out.push_back({id, q});
        total += q;
      }
    }
    if (!out.empty() && std::abs(total - 1.0) > 1e-9) {
      throw InvalidInput(std::string(name) + " weights sum to " + std::to_string(total));
    }
  };
  fill(nl, p.nl, "NL");
  fill(pl, p.pl, "PL");
  if (p.nl.empty() && p.pl.empty()) throw InvalidInput("plan has no corpora");
  return p;
}

StreamPlan plan_from_manifest(const CorpusManifest& manifest, double alpha, double task_mix,
                              std::uint64_t seed, std::uint64_t epoch_size) {
  auto weights = [&](Modality m) {
    const bool present = std::any_of(manifest.entries().begin(), manifest.entries().end(),
                                     [&](const ManifestEntry& e) {
                                       return modality_of(e.kind) == m && e.sample_count > 0;
                                     });
    if (present) return modality_weights(manifest, m, alpha, task_mix);
    CorpusWeights empty;
    empty.alpha = alpha;
    return empty;
  };
  return plan_stream(weights(Modality::NL), weights(Modality::PL), seed, epoch_size, task_mix);
}

// ---------------------------------------------------------------------------
// Example construction

std::vector<std::uint32_t> epoch_permutation(std::uint64_t seed, std::string_view corpus_id,
                                             std::uint64_t epoch, std::size_t n) {
  std::vector<std::uint32_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0U);
  Rng rng = Rng(seed).derive({fnv1a64("perm"), fnv1a64(corpus_id), epoch});
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

PretrainExample build_example(const LoadedCorpus& corpus, std::size_t record_index, bool reverse,
                              std::uint64_t epoch, std::uint64_t seed,
                              const SubwordVocabulary& vocab, const StreamOptions& opts) {
  const Record& rec = corpus.records.at(record_index);
  Rng rng = Rng(seed).derive(
      {fnv1a64("record"), fnv1a64(corpus.corpus_id), fnv1a64(record_id(rec)), epoch,
       static_cast<std::uint64_t>(reverse)});
  PretrainExample ex;
  if (const auto* doc = std::get_if<Document>(&rec)) {
    auto ids = encode(doc->text, vocab).ids;
    bool cut = false;
    if (ids.size() > opts.pack.max_len) {
      ids.resize(opts.pack.max_len);
      cut = true;
    }
    SpanMask mask;
    mask.length = ids.size();
    if (ids.size() >= 2) mask = sample_span_mask(ids.size(), rng, opts.span);
    ex = build_sclm(ids, mask, opts.sclm);
    ex.meta.truncated_input = cut;
  } else if (const auto* pair = std::get_if<ParallelPair>(&rec)) {
    TranslationDirection dir{pair->source_lang, pair->target_lang};
    if (reverse) std::swap(dir.source, dir.target);
    ex = build_ptlm(*pair, dir, vocab, opts.sep_mode);
  } else {
    const auto& cd = std::get<CodeDoc>(rec);
    const double scrub_coin = rng.uniform();
    const double label_coin = rng.uniform();
    const auto scrub_dir = reverse ? ScrubDirection::PL_to_NL : ScrubDirection::NL_to_PL;
    const CodeDoc scrubbed = scrub_leakage(cd, scrub_dir, scrub_coin);
    const std::string nl = label_policy(cd, label_coin, opts.label);
    TranslationDirection dir{nl, cd.pl_name};
    if (reverse) std::swap(dir.source, dir.target);
    ex = build_ptlm(scrubbed, dir, vocab, opts.sep_mode);
  }
  const bool cut_before = ex.meta.truncated_input;
  ex = pack_and_truncate(std::move(ex), opts.pack);
  ex.meta.truncated_input = ex.meta.truncated_input || cut_before;
  ex.corpus_id = corpus.corpus_id;
  ex.meta.record_id = record_id(rec);
  ex.meta.epoch = epoch;
  return ex;
}

// ---------------------------------------------------------------------------
// Stream

ExampleStream::ExampleStream(StreamPlan plan, std::vector<LoadedCorpus> corpora,
                             std::shared_ptr<const SubwordVocabulary> vocab, StreamOptions opts,
                             std::uint32_t shard, std::uint32_t num_shards)
    : plan_(std::move(plan)),
      corpora_(std::move(corpora)),
      vocab_(std::move(vocab)),
      opts_(opts),
      shard_(shard),
      num_shards_(num_shards) {
  if (!vocab_) throw InvalidInput("example stream needs a vocabulary");
  if (num_shards_ == 0 || shard_ >= num_shards_) throw InvalidInput("invalid shard index");
  for (std::size_t i = 0; i < corpora_.size(); ++i) {
    corpus_index_.emplace(corpora_[i].corpus_id, i);
  }
  for (const auto* side : {&plan_.nl, &plan_.pl}) {
    for (const auto& e : *side) {
      auto it = corpus_index_.find(e.corpus_id);
      if (it == corpus_index_.end()) throw DataError("plan corpus '" + e.corpus_id + "' not loaded");
      if (corpora_[it->second].records.empty()) {
        throw DataError("corpus '" + e.corpus_id + "' has no records");
      }
    }
  }
  perm_cache_.resize(corpora_.size(), {UINT64_MAX, {}});
}

std::vector<LoadedCorpus> ExampleStream::load_corpora(const StreamPlan& plan,
                                                      const CorpusManifest& manifest) {
  std::vector<LoadedCorpus> out;
  for (const auto* side : {&plan.nl, &plan.pl}) {
    for (const auto& e : *side) {
      const auto& entry = manifest.at(e.corpus_id);
      LoadedCorpus c{entry.corpus_id, entry.kind, {}};
      try {
        c.records = ingest_file(entry.path, entry.kind);
      } catch (const Error& err) {
        throw DataError("corpus '" + entry.corpus_id + "': " + err.what());
      }
      if (c.records.empty()) throw DataError("corpus '" + entry.corpus_id + "' has no records");
      out.push_back(std::move(c));
    }
  }
  return out;
}

const std::vector<std::uint32_t>& ExampleStream::permutation(std::size_t corpus,
                                                             std::uint64_t epoch) {
  auto& [cached_epoch, perm] = perm_cache_[corpus];
  if (cached_epoch != epoch) {
    perm = epoch_permutation(plan_.seed, corpora_[corpus].corpus_id, epoch,
                             corpora_[corpus].epoch_length());
    cached_epoch = epoch;
  }
  return perm;
}

ExampleStream::Slot ExampleStream::advance(std::uint64_t index) {
  const auto d = plan_.draw(index);
  const auto& id = plan_.entry(d).corpus_id;
  const std::size_t c = corpus_index_.at(id);
  const std::uint64_t count = cursor_.drawn[id]++;
  const std::uint64_t len = corpora_[c].epoch_length();
  const std::uint64_t epoch = count / len;
  const std::uint32_t v = permutation(c, epoch)[count % len];
  const std::uint32_t mult = is_parallel(corpora_[c].kind) ? 2 : 1;
  return {c, v / mult, (v % mult) == 1, epoch};
}

PretrainExample ExampleStream::next() {
  for (;;) {
    const std::uint64_t index = cursor_.next_index++;
    const Slot slot = advance(index);
    if (index % num_shards_ != shard_) continue;
    auto ex = build_example(corpora_[slot.corpus], slot.record, slot.reverse, slot.epoch,
                            plan_.seed, *vocab_, opts_);
    ex.meta.stream_index = index;
    return ex;
  }
}

}  // namespace ecpt
