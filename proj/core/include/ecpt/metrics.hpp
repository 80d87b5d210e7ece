#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace ecpt::metrics {

using Tokens = std::vector<std::string>;

/// mteval-v13a tokenization as done by sacrebleu: entity unescaping,
/// punctuation split, period/comma split unless next to digits, dash after
/// digits, whitespace collapse.
std::string tokenize_13a(std::string_view line);
Tokens tokens_13a(std::string_view line);

inline constexpr int kMaxNgramOrder = 4;

struct BleuStats {
  std::array<double, kMaxNgramOrder> matches{};
  std::array<double, kMaxNgramOrder> totals{};
  double hyp_len = 0;
  double ref_len = 0;

  BleuStats& operator+=(const BleuStats& o);
};

BleuStats bleu_stats(const Tokens& hyp, const Tokens& ref);

/// Score in [0, 100] with exponential smoothing of zero-match orders and the
/// effective order (orders with no hypothesis n-grams are skipped).
double bleu_from_stats(const BleuStats& stats);

/// Corpus BLEU-4 over pre-tokenized sentences. Throws on an empty or
/// mismatched set.
double bleu4(const std::vector<Tokens>& hyps, const std::vector<Tokens>& refs);
double sentence_bleu(const Tokens& hyp, const Tokens& ref);

inline constexpr double kRougeBeta2 = 1.2;

std::size_t lcs_length(const Tokens& a, const Tokens& b);

/// LCS F-measure in [0, 100]; 0 if either side is empty.
double rouge_l(const Tokens& hyp, const Tokens& ref, double beta2 = kRougeBeta2);

struct ChrfStats {
  // hyp, ref, match counts per order
  std::vector<std::array<double, 3>> orders;

  ChrfStats& operator+=(const ChrfStats& o);
};

ChrfStats chrf_stats(std::string_view hyp, std::string_view ref, int order = 6);
double chrf_from_stats(const ChrfStats& stats, double beta = 2.0);

/// Character n-gram F-beta in [0, 100], whitespace removed.
double chrf(std::string_view hyp, std::string_view ref, int order = 6, double beta = 2.0);
double corpus_chrf(const std::vector<std::string>& hyps, const std::vector<std::string>& refs,
                   int order = 6, double beta = 2.0);

/// Percentage of pairs equal after stripping trailing whitespace.
double exact_match(const std::vector<std::string>& hyps, const std::vector<std::string>& refs);

struct KeywordTable {
  std::map<std::string, std::set<std::string>> keywords;  // by programming language name
  double weight = 5.0;

  static KeywordTable builtin();
  const std::set<std::string>& for_language(std::string_view lang) const;
};

/// BLEU-style precision where n-grams holding a keyword count `weight` times.
BleuStats weighted_ngram_stats(const Tokens& hyp, const Tokens& ref,
                               const std::set<std::string>& keywords, double weight);
double weighted_ngram_match(std::string_view hyp, std::string_view ref, const KeywordTable& kw,
                            std::string_view lang = "Python");

/// Ratio with an exclusion flag: a component is excluded when the reference
/// side gives nothing to compare against.
struct Component {
  double matched = 0;
  double total = 0;
  bool excluded = false;

  std::optional<double> value() const;
};

Component ast_match_counts(std::string_view hyp, std::string_view ref,
                           std::size_t min_height = 2);
Component dataflow_match_counts(std::string_view hyp, std::string_view ref);

/// Plain ratios; excluded components report nullopt.
std::optional<double> ast_match(std::string_view hyp, std::string_view ref,
                                std::size_t min_height = 2);
std::optional<double> dataflow_match(std::string_view hyp, std::string_view ref);

using CodeBleuWeights = std::array<double, 4>;
inline constexpr CodeBleuWeights kDefaultCodeBleuWeights{0.25, 0.25, 0.25, 0.25};

/// Weighted sum over the present components, renormalized over their weights.
double combine_codebleu(const std::array<std::optional<double>, 4>& components,
                        const CodeBleuWeights& weights = kDefaultCodeBleuWeights);

struct CodeBleuScore {
  double ngram_match = 0;
  double weighted_ngram_match = 0;
  std::optional<double> ast_match;
  std::optional<double> dataflow_match;
  double score = 0;
};

struct MetricConfig {
  double rouge_beta2 = kRougeBeta2;
  int chrf_order = 6;
  double chrf_beta = 2.0;
  double keyword_weight = 5.0;
  CodeBleuWeights codebleu_weights = kDefaultCodeBleuWeights;
  std::string code_language = "Python";
  std::size_t min_subtree_height = 2;

  void validate() const;
  std::string to_json() const;
  static MetricConfig from_json(std::string_view json);
  std::uint64_t digest() const;
};

CodeBleuScore codebleu(std::string_view hyp, std::string_view ref,
                       const MetricConfig& config = {});

inline const std::vector<std::string> kMetricNames = {"bleu", "chrf", "rouge_l", "exact_match",
                                                      "codebleu"};

struct MetricReport {
  std::vector<std::map<std::string, double>> per_example;
  std::vector<std::vector<std::string>> flags;  // per example
  std::map<std::string, double> corpus;
  std::string config_digest;

  std::string to_json() const;
};

/// Scores every pair. Per-example work is spread over `threads` workers;
/// aggregation is sequential so the report does not depend on the count.
MetricReport evaluate(const std::vector<std::string>& hyps, const std::vector<std::string>& refs,
                      const std::vector<std::string>& metric_names, const MetricConfig& config = {},
                      unsigned threads = 1);

}  // namespace ecpt::metrics
