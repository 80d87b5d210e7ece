#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "ecpt/error.hpp"
#include "ecpt/objectives.hpp"
#include "support.hpp"

using namespace ecpt;
using ecpt::testing::data_dir;
using ecpt::testing::golden;

namespace {

const SubwordVocabulary& tiny() {
  static const auto v = SubwordVocabulary::load(data_dir() / "vocab" / "tiny.vocab");
  return v;
}

std::vector<TokenId> iota_tokens(std::size_t n) {
  std::vector<TokenId> t(n);
  std::iota(t.begin(), t.end(), TokenId{1000});
  return t;
}

// Rebuilds the original sequence from an SCLM example.
std::vector<TokenId> reconstruct(const PretrainExample& ex) {
  std::map<TokenId, std::vector<TokenId>> spans;
  TokenId current = 0;
  for (auto id : ex.target_ids) {
    if (is_sentinel(id)) {
      current = id;
      spans[current];
    } else if (id != id_of(Special::Eos)) {
      spans[current].push_back(id);
    }
  }
  std::vector<TokenId> out;
  for (auto id : ex.input_ids) {
    if (is_sentinel(id)) {
      const auto& s = spans.at(id);
      out.insert(out.end(), s.begin(), s.end());
    } else {
      out.push_back(id);
    }
  }
  return out;
}

}  // namespace

TEST(SpanMask, NoiseArithmetic) {
  EXPECT_EQ(num_noise_tokens(20, 0.15), 3u);
  EXPECT_EQ(num_noise_spans(20, 3, 3.0), 1u);
  EXPECT_EQ(num_noise_tokens(10, 0.15), 2u);
  EXPECT_EQ(num_noise_tokens(2, 0.15), 1u);
  EXPECT_EQ(num_noise_tokens(1000, 0.15), 150u);
  EXPECT_EQ(num_noise_spans(1000, 150, 3.0), 50u);
  EXPECT_EQ(num_noise_tokens(4, 0.99), 3u);
  EXPECT_THROW(num_noise_tokens(1, 0.15), InvalidInput);
}

TEST(SpanMask, MatchesOracleDraws) {
  const auto g = golden("sampling.json");
  for (const auto& c : g["span_masks"]) {
    Rng rng(c["seed"].get<std::uint64_t>());
    const auto mask = sample_span_mask(c["n"].get<std::size_t>(), rng);
    ASSERT_EQ(mask.spans.size(), c["spans"].size()) << c.dump();
    for (std::size_t k = 0; k < mask.spans.size(); ++k) {
      EXPECT_EQ(mask.spans[k].start, c["spans"][k][0].get<std::size_t>());
      EXPECT_EQ(mask.spans[k].length, c["spans"][k][1].get<std::size_t>());
    }
    EXPECT_EQ(mask.noise_count(), c["noise"].get<std::size_t>());
  }
}

TEST(SpanMask, ZeroRateIsEmpty) {
  Rng rng(1);
  const auto mask = sample_span_mask(50, rng, {0.0, 3.0});
  EXPECT_TRUE(mask.spans.empty());
  EXPECT_THROW(sample_span_mask(1, rng), InvalidInput);
}

TEST(SpanMask, SpansAreSortedDisjointInBounds) {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    Rng rng(seed);
    const std::size_t n = 2 + seed * 7 % 500;
    const auto mask = sample_span_mask(n, rng);
    std::size_t cursor = 0;
    bool first = true;
    for (const auto& s : mask.spans) {
      ASSERT_GT(s.length, 0u);
      if (!first) ASSERT_GT(s.start, cursor);
      ASSERT_GE(s.start, cursor);
      cursor = s.start + s.length;
      first = false;
    }
    ASSERT_LE(cursor, n);
    ASSERT_EQ(mask.noise_count(), num_noise_tokens(n, 0.15));
  }
}

TEST(RandomComposition, SumsAndPositive) {
  Rng rng(5);
  for (std::size_t total = 1; total < 40; ++total) {
    for (std::size_t parts = 1; parts <= total; ++parts) {
      const auto c = random_composition(total, parts, rng);
      ASSERT_EQ(c.size(), parts);
      ASSERT_EQ(std::accumulate(c.begin(), c.end(), std::size_t{0}), total);
      for (auto x : c) ASSERT_GT(x, 0u);
    }
  }
  EXPECT_THROW(random_composition(3, 4, rng), InvalidInput);
  EXPECT_THROW(random_composition(3, 0, rng), InvalidInput);
}

TEST(Sclm, SentinelScheme) {
  const std::vector<TokenId> t{500, 501, 502, 503, 504};
  SpanMask mask;
  mask.length = 5;
  mask.spans = {{1, 2}};
  const auto ex = build_sclm(t, mask);
  EXPECT_EQ(ex.input_ids, (std::vector<TokenId>{500, sentinel_id(0), 503, 504}));
  EXPECT_EQ(ex.target_ids,
            (std::vector<TokenId>{sentinel_id(0), 501, 502, id_of(Special::Eos)}));
  EXPECT_EQ(ex.task, Task::SCLM);
}

TEST(Sclm, EmptyMaskPassesThrough) {
  const std::vector<TokenId> t{500, 501};
  SpanMask mask;
  mask.length = 2;
  const auto ex = build_sclm(t, mask);
  EXPECT_EQ(ex.input_ids, t);
  EXPECT_EQ(ex.target_ids, (std::vector<TokenId>{id_of(Special::Eos)}));
}

TEST(Sclm, TwoSpansInOrderAndOptionalTerminalSentinel) {
  const auto t = iota_tokens(10);
  SpanMask mask;
  mask.length = 10;
  mask.spans = {{1, 1}, {5, 2}};
  const auto ex = build_sclm(t, mask, {true});
  EXPECT_EQ(ex.target_ids,
            (std::vector<TokenId>{sentinel_id(0), 1001, sentinel_id(1), 1005, 1006,
                                  sentinel_id(2), id_of(Special::Eos)}));
  EXPECT_EQ(reconstruct(build_sclm(t, mask)), t);
}

TEST(Sclm, TooManySpansRejected) {
  const auto t = iota_tokens(300);
  SpanMask mask;
  mask.length = 300;
  for (std::size_t k = 0; k < 101; ++k) mask.spans.push_back({k * 2, 1});
  EXPECT_THROW(build_sclm(t, mask), InvalidInput);
}

TEST(Sclm, ReconstructionProperty) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    const std::size_t n = 7 + rng.below(600);
    const auto t = iota_tokens(n);
    const auto mask = sample_span_mask(n, rng);
    const auto ex = build_sclm(t, mask);
    ASSERT_EQ(reconstruct(ex), t);
    ASSERT_EQ(ex.target_ids.back(), id_of(Special::Eos));
  }
}

TEST(Ptlm, PromptPrefixAndDuality) {
  const auto& v = tiny();
  const auto ex = build_ptlm("return the sum", "def f(a, b):\n    return a + b", {"en", "Python"},
                             v, false);
  const auto prompt = encode("translate English to Python: \n", v).ids;
  ASSERT_GE(ex.input_ids.size(), prompt.size());
  EXPECT_TRUE(std::equal(prompt.begin(), prompt.end(), ex.input_ids.begin()));
  EXPECT_EQ(ex.meta.prompt_len, prompt.size());
  EXPECT_EQ(decode(ex.input_ids, v), "translate English to Python: \nreturn the sum");
  EXPECT_EQ(decode(ex.target_ids, v), "def f(a, b):\n    return a + b");
  EXPECT_EQ(ex.target_ids.back(), id_of(Special::Eos));

  const auto rev = build_ptlm("def f(a, b):\n    return a + b", "return the sum",
                              {"Python", "English"}, v, false);
  EXPECT_EQ(decode(rev.input_ids, v), "translate Python to English: \ndef f(a, b):\n    return a + b");
  EXPECT_EQ(rev.direction, (std::pair<std::string, std::string>{"Python", "English"}));
}

TEST(Ptlm, SepModeAppendsSepAndSentinel) {
  const auto& v = tiny();
  const auto ex = build_ptlm("hello", "bonjour", {"en", "fr"}, v, true);
  ASSERT_GE(ex.input_ids.size(), 2u);
  EXPECT_EQ(ex.input_ids[ex.input_ids.size() - 2], id_of(Special::Sep));
  EXPECT_EQ(ex.input_ids.back(), sentinel_id(0));
  const auto plain = build_ptlm("hello", "bonjour", {"en", "fr"}, v, false);
  EXPECT_EQ(std::count(plain.input_ids.begin(), plain.input_ids.end(), id_of(Special::Sep)), 0);
}

TEST(Ptlm, PairAndCodeDocDirections) {
  const auto& v = tiny();
  ParallelPair p{"p", "hello", "en", "hola", "es", PairModality::NL_NL};
  EXPECT_EQ(decode(build_ptlm(p, {"es", "en"}, v, false).target_ids, v), "hello");
  EXPECT_THROW(build_ptlm(p, {"en", "de"}, v, false), InvalidInput);
  CodeDoc d{"d", "x = 1", "set x", "Python", "en", 0.9};
  EXPECT_EQ(decode(build_ptlm(d, {"English", "Python"}, v, false).target_ids, v), "x = 1");
  EXPECT_EQ(decode(build_ptlm(d, {"Python", "text"}, v, false).target_ids, v), "set x");
  EXPECT_THROW(build_ptlm(d, {"Python", "Python"}, v, false), InvalidInput);
  EXPECT_THROW(build_ptlm("a", "b", {"Klingon", "en"}, v, false), InvalidInput);
  EXPECT_THROW(build_ptlm("  ", "b", {"en", "fr"}, v, false), InvalidInput);
}

TEST(Prompts, TableStrings) {
  EXPECT_EQ(translation_prompt("Spanish", "Python"), "translate Spanish to Python: \n");
  EXPECT_EQ(translation_prompt("es", "Python"), "translate Spanish to Python: \n");
  EXPECT_EQ(translation_prompt("Python", "Japanese"), "translate Python to Japanese: \n");
  EXPECT_EQ(repair_prompt(), "fix bugs: \n");
}

TEST(Pack, TruncationRules) {
  PretrainExample ex;
  ex.input_ids = iota_tokens(511);
  ex.target_ids = {1, id_of(Special::Eos)};
  EXPECT_EQ(pack_and_truncate(ex, {}).input_ids.size(), 511u);

  ex.input_ids = iota_tokens(517);
  ex.meta.prompt_len = 5;
  ex.meta.suffix_len = 2;
  const auto cut = pack_and_truncate(ex, {});
  EXPECT_EQ(cut.input_ids.size(), 512u);
  EXPECT_TRUE(cut.meta.truncated_input);
  EXPECT_EQ(cut.input_ids.back(), ex.input_ids.back());
  EXPECT_EQ(cut.input_ids[509], ex.input_ids[509]);

  ex.target_ids = iota_tokens(20);
  ex.target_ids.push_back(id_of(Special::Eos));
  const auto t = pack_and_truncate(ex, {512, 8});
  EXPECT_EQ(t.target_ids.size(), 8u);
  EXPECT_EQ(t.target_ids.back(), id_of(Special::Eos));
  EXPECT_TRUE(t.meta.truncated_target);

  ex.meta.prompt_len = 600;
  ex.input_ids = iota_tokens(700);
  EXPECT_THROW(pack_and_truncate(ex, {}), InvalidInput);
}

TEST(Nll, UniformDeltaAndTable) {
  PretrainExample ex;
  ex.target_ids = {3, 1, 4, id_of(Special::Eos)};
  const LossOracle uniform = [](auto, auto, TokenId) { return -std::log(10.0); };
  EXPECT_NEAR(reference_nll(ex, uniform), 4 * std::log(10.0), 1e-12);

  const LossOracle delta = [&](std::span<const TokenId> prefix, auto, TokenId next) {
    return ex.target_ids[prefix.size()] == next ? 0.0 : -INFINITY;
  };
  EXPECT_EQ(reference_nll(ex, delta), 0.0);

  PretrainExample three;
  three.target_ids = {7, 8, id_of(Special::Eos)};
  const double table[] = {std::log(0.5), std::log(0.25), std::log(0.8)};
  const LossOracle lookup = [&](std::span<const TokenId> prefix, auto, TokenId) {
    return table[prefix.size()];
  };
  EXPECT_NEAR(reference_nll(three, lookup), -(std::log(0.5) + std::log(0.25) + std::log(0.8)),
              1e-12);

  const LossOracle bad = [](auto, auto, TokenId) { return 0.1; };
  EXPECT_THROW(reference_nll(ex, bad), InvalidInput);
}
