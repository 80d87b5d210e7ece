#include <cmath>
#include <cstdio>
#include <thread>

#include <json.hpp>

#include "ecpt/codegraph.hpp"
#include "ecpt/error.hpp"
#include "ecpt/metrics.hpp"
#include "ecpt/rng.hpp"

namespace ecpt::metrics {

namespace {

template <class Map>
double multiset_overlap(const Map& hyp, const Map& ref) {
  double n = 0;
  for (const auto& [key, count] : ref) {
    const auto it = hyp.find(key);
    if (it != hyp.end()) n += static_cast<double>(std::min(count, it->second));
  }
  return n;
}

std::map<std::string, std::size_t> edge_counts(const code::DataflowGraph& g) {
  std::map<std::string, std::size_t> out;
  for (auto& e : g.normalized_edges()) ++out[e];
  return out;
}

void check_weights(const CodeBleuWeights& w) {
  double sum = 0;
  for (double x : w) {
    if (!(x >= 0)) throw InvalidInput("codebleu weights must be non-negative");
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw InvalidInput("codebleu weights must sum to 1");
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::optional<double> Component::value() const {
  if (excluded || total == 0) return std::nullopt;
  return matched / total;
}

double weighted_ngram_match(std::string_view hyp, std::string_view ref, const KeywordTable& kw,
                            std::string_view lang) {
  const auto h = code::surface_tokens(hyp);
  if (h.empty()) return 0.0;
  const auto r = code::surface_tokens(ref);
  return bleu_from_stats(weighted_ngram_stats(h, r, kw.for_language(lang), kw.weight)) / 100.0;
}

Component ast_match_counts(std::string_view hyp, std::string_view ref, std::size_t min_height) {
  Component c;
  const auto r = code::parse(ref);
  if (!r.ok) {
    c.excluded = true;
    return c;
  }
  const auto ref_set = code::subtree_multiset(*r.tree, min_height);
  for (const auto& [k, n] : ref_set) c.total += static_cast<double>(n);
  if (c.total == 0) {
    c.excluded = true;
    return c;
  }
  const auto h = code::parse(hyp);
  if (h.ok) c.matched = multiset_overlap(code::subtree_multiset(*h.tree, min_height), ref_set);
  return c;
}

Component dataflow_match_counts(std::string_view hyp, std::string_view ref) {
  Component c;
  const auto r = code::parse(ref);
  if (!r.ok) {
    c.excluded = true;
    return c;
  }
  const auto ref_edges = edge_counts(code::extract_dataflow(*r.tree));
  for (const auto& [k, n] : ref_edges) c.total += static_cast<double>(n);
  if (c.total == 0) {
    c.excluded = true;
    return c;
  }
  const auto h = code::parse(hyp);
  if (h.ok) c.matched = multiset_overlap(edge_counts(code::extract_dataflow(*h.tree)), ref_edges);
  return c;
}

std::optional<double> ast_match(std::string_view hyp, std::string_view ref,
                                std::size_t min_height) {
  return ast_match_counts(hyp, ref, min_height).value();
}

std::optional<double> dataflow_match(std::string_view hyp, std::string_view ref) {
  return dataflow_match_counts(hyp, ref).value();
}

double combine_codebleu(const std::array<std::optional<double>, 4>& components,
                        const CodeBleuWeights& weights) {
  check_weights(weights);
  double num = 0, den = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    if (!components[i]) continue;
    num += weights[i] * *components[i];
    den += weights[i];
  }
  return den > 0 ? num / den : 0.0;
}

void MetricConfig::validate() const {
  check_weights(codebleu_weights);
  if (!(rouge_beta2 > 0)) throw InvalidInput("rouge_beta2 must be positive");
  if (chrf_order < 1) throw InvalidInput("chrf_order must be at least 1");
  if (!(chrf_beta > 0)) throw InvalidInput("chrf_beta must be positive");
  if (!(keyword_weight > 0)) throw InvalidInput("keyword_weight must be positive");
  if (min_subtree_height < 1) throw InvalidInput("min_subtree_height must be at least 1");
  KeywordTable::builtin().for_language(code_language);
}

std::string MetricConfig::to_json() const {
  nlohmann::ordered_json j;
  j["chrf_beta"] = chrf_beta;
  j["chrf_order"] = chrf_order;
  j["code_language"] = code_language;
  j["codebleu_weights"] = codebleu_weights;
  j["keyword_weight"] = keyword_weight;
  j["min_subtree_height"] = min_subtree_height;
  j["rouge_beta2"] = rouge_beta2;
  return j.dump();
}

MetricConfig MetricConfig::from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("metric config: ") + e.what());
  }
  if (!j.is_object()) throw InvalidInput("metric config must be an object");
  MetricConfig c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "chrf_beta") c.chrf_beta = value.get<double>();
      else if (key == "chrf_order") c.chrf_order = value.get<int>();
      else if (key == "code_language") c.code_language = value.get<std::string>();
      else if (key == "codebleu_weights") c.codebleu_weights = value.get<CodeBleuWeights>();
      else if (key == "keyword_weight") c.keyword_weight = value.get<double>();
      else if (key == "min_subtree_height") c.min_subtree_height = value.get<std::size_t>();
      else if (key == "rouge_beta2") c.rouge_beta2 = value.get<double>();
      else throw InvalidInput("metric config: unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("metric config: ") + e.what());
  }
  c.validate();
  return c;
}

std::uint64_t MetricConfig::digest() const { return fnv1a64(to_json()); }

CodeBleuScore codebleu(std::string_view hyp, std::string_view ref, const MetricConfig& config) {
  config.validate();
  const auto kw = KeywordTable::builtin();
  const auto h = code::surface_tokens(hyp);
  const auto r = code::surface_tokens(ref);
  CodeBleuScore s;
  s.ngram_match = h.empty() ? 0.0 : sentence_bleu(h, r) / 100.0;
  s.weighted_ngram_match =
      h.empty() ? 0.0
                : bleu_from_stats(weighted_ngram_stats(h, r, kw.for_language(config.code_language),
                                                       config.keyword_weight)) /
                      100.0;
  s.ast_match = ast_match(hyp, ref, config.min_subtree_height);
  s.dataflow_match = dataflow_match(hyp, ref);
  s.score = combine_codebleu({s.ngram_match, s.weighted_ngram_match, s.ast_match, s.dataflow_match},
                             config.codebleu_weights);
  return s;
}

namespace {

struct ExampleResult {
  std::map<std::string, double> scores;
  std::vector<std::string> flags;
  BleuStats bleu;
  ChrfStats chrf;
  BleuStats code_bleu;
  BleuStats code_weighted;
  Component ast;
  Component dataflow;
};

bool text_empty(std::string_view s) {
  for (char c : s) {
    if (c != ' ' && c != '\t' && c != '\n' && c != '\r' && c != '\f' && c != '\v') return false;
  }
  return true;
}

struct Wanted {
  bool bleu = false, chrf = false, rouge = false, em = false, code = false;
};

ExampleResult score_one(const std::string& hyp, const std::string& ref, const Wanted& want,
                        const MetricConfig& config, const std::set<std::string>& keywords) {
  ExampleResult out;
  if (want.bleu || want.rouge) {
    const auto h = tokens_13a(hyp);
    const auto r = tokens_13a(ref);
    if (want.bleu) {
      out.bleu = bleu_stats(h, r);
      out.scores["bleu"] = bleu_from_stats(out.bleu);
    }
    if (want.rouge) {
      if (h.empty() || r.empty()) out.flags.push_back("rouge_l_empty_input");
      out.scores["rouge_l"] = rouge_l(h, r, config.rouge_beta2);
    }
  }
  if (want.chrf) {
    out.chrf = chrf_stats(hyp, ref, config.chrf_order);
    if (text_empty(hyp) || text_empty(ref)) out.flags.push_back("chrf_empty_input");
    out.scores["chrf"] = chrf_from_stats(out.chrf, config.chrf_beta);
  }
  if (want.em) out.scores["exact_match"] = exact_match({hyp}, {ref});
  if (want.code) {
    const auto h = code::surface_tokens(hyp);
    const auto r = code::surface_tokens(ref);
    out.code_bleu = bleu_stats(h, r);
    out.code_weighted = weighted_ngram_stats(h, r, keywords, config.keyword_weight);
    const double ngram = h.empty() ? 0.0 : bleu_from_stats(out.code_bleu) / 100.0;
    const double weighted = h.empty() ? 0.0 : bleu_from_stats(out.code_weighted) / 100.0;
    out.ast = ast_match_counts(hyp, ref, config.min_subtree_height);
    out.dataflow = dataflow_match_counts(hyp, ref);
    if (!code::parse(hyp).ok) out.flags.push_back("hyp_unparseable");
    if (out.ast.excluded) out.flags.push_back("ast_match_excluded");
    if (out.dataflow.excluded) out.flags.push_back("dataflow_match_excluded");
    out.scores["codebleu.ngram_match"] = ngram;
    out.scores["codebleu.weighted_ngram_match"] = weighted;
    if (auto v = out.ast.value()) out.scores["codebleu.ast_match"] = *v;
    if (auto v = out.dataflow.value()) out.scores["codebleu.dataflow_match"] = *v;
    out.scores["codebleu"] = combine_codebleu({ngram, weighted, out.ast.value(),
                                               out.dataflow.value()},
                                              config.codebleu_weights);
  }
  return out;
}

}  // namespace

MetricReport evaluate(const std::vector<std::string>& hyps, const std::vector<std::string>& refs,
                      const std::vector<std::string>& metric_names, const MetricConfig& config,
                      unsigned threads) {
  config.validate();
  Wanted want;
  for (const auto& m : metric_names) {
    if (m == "bleu") want.bleu = true;
    else if (m == "chrf") want.chrf = true;
    else if (m == "rouge_l") want.rouge = true;
    else if (m == "exact_match") want.em = true;
    else if (m == "codebleu") want.code = true;
    else throw InvalidInput("unknown metric '" + m + "'");
  }
  if (metric_names.empty()) throw InvalidInput("no metrics requested");
  if (hyps.size() != refs.size()) {
    throw InvalidInput("hypothesis/reference count mismatch: " + std::to_string(hyps.size()) +
                       " vs " + std::to_string(refs.size()));
  }
  if (hyps.empty()) throw InvalidInput("empty hypothesis set");

  const auto kw = KeywordTable::builtin();
  const auto& keywords = kw.for_language(config.code_language);
  std::vector<ExampleResult> results(hyps.size());
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(hyps.size())));
  auto work = [&](unsigned t) {
    for (std::size_t i = t; i < hyps.size(); i += threads) {
      results[i] = score_one(hyps[i], refs[i], want, config, keywords);
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }

  MetricReport report;
  report.config_digest = hex64(config.digest());
  BleuStats bleu, code_bleu, code_weighted;
  ChrfStats chrf;
  Component ast, dataflow;
  double rouge_sum = 0;
  for (auto& r : results) {
    bleu += r.bleu;
    chrf += r.chrf;
    code_bleu += r.code_bleu;
    code_weighted += r.code_weighted;
    if (!r.ast.excluded) {
      ast.matched += r.ast.matched;
      ast.total += r.ast.total;
    }
    if (!r.dataflow.excluded) {
      dataflow.matched += r.dataflow.matched;
      dataflow.total += r.dataflow.total;
    }
    if (want.rouge) rouge_sum += r.scores["rouge_l"];
    report.per_example.push_back(std::move(r.scores));
    report.flags.push_back(std::move(r.flags));
  }
  const double n = static_cast<double>(hyps.size());
  if (want.bleu) report.corpus["bleu"] = bleu_from_stats(bleu);
  if (want.chrf) report.corpus["chrf"] = chrf_from_stats(chrf, config.chrf_beta);
  if (want.rouge) report.corpus["rouge_l"] = rouge_sum / n;
  if (want.em) report.corpus["exact_match"] = exact_match(hyps, refs);
  if (want.code) {
    const double ngram = bleu_from_stats(code_bleu) / 100.0;
    const double weighted = bleu_from_stats(code_weighted) / 100.0;
    report.corpus["codebleu.ngram_match"] = ngram;
    report.corpus["codebleu.weighted_ngram_match"] = weighted;
    if (auto v = ast.value()) report.corpus["codebleu.ast_match"] = *v;
    if (auto v = dataflow.value()) report.corpus["codebleu.dataflow_match"] = *v;
    report.corpus["codebleu"] = combine_codebleu({ngram, weighted, ast.value(), dataflow.value()},
                                                 config.codebleu_weights);
  }
  return report;
}

std::string MetricReport::to_json() const {
  nlohmann::ordered_json j;
  j["config_digest"] = config_digest;
  nlohmann::ordered_json corpus_j = nlohmann::ordered_json::object();
  for (const auto& [k, v] : corpus) corpus_j[k] = v;
  j["corpus"] = std::move(corpus_j);
  j["per_example"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < per_example.size(); ++i) {
    nlohmann::ordered_json e = nlohmann::ordered_json::object();
    for (const auto& [k, v] : per_example[i]) e[k] = v;
    if (i < flags.size() && !flags[i].empty()) e["flags"] = flags[i];
    j["per_example"].push_back(std::move(e));
  }
  return j.dump(2, ' ', false, nlohmann::json::error_handler_t::replace);
}

}  // namespace ecpt::metrics
