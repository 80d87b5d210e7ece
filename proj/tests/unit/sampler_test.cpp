#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "ecpt/error.hpp"
#include "ecpt/pipeline.hpp"
#include "ecpt/sampler.hpp"
#include "support.hpp"

using namespace ecpt;
using ecpt::testing::data_dir;
using ecpt::testing::golden;

TEST(Rescale, MatchesOracle) {
  const auto g = golden("sampling.json");
  for (const auto& c : g["rescale"]) {
    std::map<std::string, double> raw;
    const auto& p = c["p"];
    for (std::size_t i = 0; i < p.size(); ++i) raw["c" + std::to_string(i)] = p[i].get<double>();
    const auto w = rescale(raw, c["alpha"].get<double>());
    for (std::size_t i = 0; i < p.size(); ++i) {
      EXPECT_NEAR(w.rescaled.at("c" + std::to_string(i)), c["q"][i].get<double>(), 1e-12);
    }
  }
}

TEST(Rescale, IdentityExponentAndSymmetry) {
  const std::map<std::string, double> p{{"a", 0.7}, {"b", 0.2}, {"c", 0.1}};
  const auto w = rescale(p, 1.0);
  for (const auto& [id, v] : p) EXPECT_EQ(w.rescaled.at(id), v);
  const auto s = rescale({{"a", 0.5}, {"b", 0.5}}, 0.3);
  EXPECT_EQ(s.rescaled.at("a"), 0.5);
  EXPECT_EQ(s.rescaled.at("b"), 0.5);
}

TEST(Rescale, RatioLawAndNormalization) {
  const std::map<std::string, double> p{{"a", 0.6}, {"b", 0.25}, {"c", 0.1}, {"d", 0.05}};
  const auto w = rescale(p, 0.3);
  double sum = 0;
  for (const auto& [id, q] : w.rescaled) sum += q;
  EXPECT_NEAR(sum, 1.0, 1e-12);
  EXPECT_NEAR(w.rescaled.at("a") / w.rescaled.at("b"), std::pow(0.6 / 0.25, 0.3), 1e-12);
  EXPECT_GT(w.rescaled.at("a"), w.rescaled.at("b"));
  EXPECT_GT(w.rescaled.at("c"), w.rescaled.at("d"));
}

TEST(Rescale, FlattensTheHead) {
  // long-tailed shape: one dominant corpus and many small ones
  std::map<std::string, double> p;
  p["en"] = 0.1649;
  const double rest = (1.0 - 0.1649) / 113.0;
  for (int i = 0; i < 113; ++i) p["l" + std::to_string(i)] = rest;
  const auto w = rescale(p, 0.3);
  EXPECT_LE(w.rescaled.at("en"), p.at("en"));
  EXPECT_GT(w.rescaled.at("l0"), 0.0);
}

TEST(Rescale, ZeroStaysZero) {
  const auto w = rescale({{"a", 1.0}, {"b", 0.0}}, 0.3);
  EXPECT_EQ(w.rescaled.at("b"), 0.0);
  EXPECT_EQ(w.rescaled.at("a"), 1.0);
}

TEST(Rescale, RejectsBadInput) {
  EXPECT_THROW(rescale({{"a", 0.0}, {"b", 0.0}}, 0.3), InvalidInput);
  EXPECT_THROW(rescale({{"a", 1.0}}, 0.0), InvalidInput);
  EXPECT_THROW(rescale({{"a", 1.0}}, -1.0), InvalidInput);
  EXPECT_THROW(rescale({{"a", 0.5}, {"b", 0.4}}, 0.3), InvalidInput);
  EXPECT_THROW(rescale({}, 0.3), InvalidInput);
}

namespace {

StreamPlan two_by_two(std::uint64_t seed) {
  const auto nl = rescale({{"n1", 0.9}, {"n2", 0.1}}, 0.3);
  const auto pl = rescale({{"p1", 0.5}, {"p2", 0.5}}, 0.3);
  return plan_stream(nl, pl, seed, 100);
}

}  // namespace

TEST(Plan, AlternatesModalities) {
  const auto plan = two_by_two(1);
  int nl = 0, pl = 0;
  for (std::uint64_t i = 0; i < 10; ++i) {
    const auto d = plan.draw(i);
    EXPECT_EQ(d.modality, i % 2 == 0 ? Modality::NL : Modality::PL);
    (d.modality == Modality::NL ? nl : pl)++;
  }
  EXPECT_EQ(nl, 5);
  EXPECT_EQ(pl, 5);
}

TEST(Plan, SingleCorpusPerModalityRoundRobins) {
  const auto plan = plan_stream(rescale({{"n", 1.0}}, 0.3), rescale({{"p", 1.0}}, 0.3), 3, 10);
  for (std::uint64_t i = 0; i < 20; ++i) {
    EXPECT_EQ(plan.entry(plan.draw(i)).corpus_id, i % 2 == 0 ? "n" : "p");
  }
}

TEST(Plan, EmpiricalFrequenciesTrackQ) {
  const auto plan = two_by_two(2024);
  std::map<std::string, double> hits;
  const std::uint64_t n = 100000;
  for (std::uint64_t i = 0; i < n; ++i) hits[plan.entry(plan.draw(i)).corpus_id] += 1;
  for (const auto* side : {&plan.nl, &plan.pl}) {
    for (const auto& e : *side) EXPECT_NEAR(hits[e.corpus_id] / (n / 2.0), e.probability, 0.01);
  }
}

TEST(Plan, JsonRoundTripAndDigest) {
  const auto plan = two_by_two(77);
  const auto back = StreamPlan::from_json(plan.to_json());
  EXPECT_EQ(back, plan);
  EXPECT_EQ(back.digest(), plan.digest());
  EXPECT_NE(two_by_two(78).digest(), plan.digest());
  EXPECT_THROW(StreamPlan::from_json(R"({"seed": 1, "bogus": 2})"), DataError);
}

TEST(Plan, NoCorporaIsAnError) {
  CorpusWeights empty;
  EXPECT_THROW(plan_stream(empty, empty, 1, 10), InvalidInput);
}

TEST(Plan, FromManifestUsesCounts) {
  const auto m = CorpusManifest::load(data_dir() / "corpora" / "manifest.json");
  const auto plan = plan_from_manifest(m, 1.0, 0.5, 5, 10);
  double sum = 0;
  for (const auto& e : plan.nl) sum += e.probability;
  EXPECT_NEAR(sum, 1.0, 1e-9);
  // alpha = 1: the monolingual half splits 6:3
  auto find = [&](const std::string& id) {
    return std::find_if(plan.nl.begin(), plan.nl.end(),
                        [&](const PlanEntry& e) { return e.corpus_id == id; })->probability;
  };
  EXPECT_NEAR(find("cc_en"), 0.5 * 6.0 / 9.0, 1e-12);
  EXPECT_NEAR(find("opus_en_fr"), 0.5, 1e-12);
}

TEST(Permutation, IsAPermutationAndKeyed) {
  auto p = epoch_permutation(1, "c", 0, 50);
  auto sorted = p;
  std::sort(sorted.begin(), sorted.end());
  for (std::uint32_t i = 0; i < 50; ++i) EXPECT_EQ(sorted[i], i);
  EXPECT_EQ(p, epoch_permutation(1, "c", 0, 50));
  EXPECT_NE(p, epoch_permutation(1, "c", 1, 50));
  EXPECT_NE(p, epoch_permutation(1, "d", 0, 50));
}

namespace {

struct Fixture {
  CorpusManifest manifest = CorpusManifest::load(data_dir() / "corpora" / "manifest.json");
  std::shared_ptr<const SubwordVocabulary> vocab = std::make_shared<const SubwordVocabulary>(
      SubwordVocabulary::load(data_dir() / "vocab" / "tiny.vocab"));
};

}  // namespace

TEST(Stream, DeterministicAndShardable) {
  Fixture f;
  const auto plan = plan_from_manifest(f.manifest, 0.3, 0.5, 11, 40);
  const auto corpora = ExampleStream::load_corpora(plan, f.manifest);
  ExampleStream a(plan, corpora, f.vocab, {});
  ExampleStream b(plan, corpora, f.vocab, {});
  std::vector<PretrainExample> global;
  for (int i = 0; i < 40; ++i) {
    global.push_back(a.next());
    EXPECT_EQ(global.back(), b.next());
  }
  const std::uint32_t w = 3;
  for (std::uint32_t k = 0; k < w; ++k) {
    ExampleStream shard(plan, corpora, f.vocab, {}, k, w);
    for (std::size_t i = k; i < global.size(); i += w) EXPECT_EQ(shard.next(), global[i]);
  }
}

TEST(Stream, SingleRecordCorpusRepeats) {
  LoadedCorpus nl{"one", CorpusKind::NlMono,
                  {Document{"d1", "the cat sat on the mat", "en", TextKind::NL, {}}}};
  LoadedCorpus pl{"code", CorpusKind::PlMono,
                  {Document{"c1", "x = 1\n", "Python", TextKind::PL, "Python"}}};
  const auto plan =
      plan_stream(rescale({{"one", 1.0}}, 0.3), rescale({{"code", 1.0}}, 0.3), 4, 10);
  Fixture f;
  ExampleStream s(plan, {nl, pl}, f.vocab, {});
  for (int i = 0; i < 8; ++i) {
    const auto ex = s.next();
    EXPECT_EQ(ex.meta.record_id, i % 2 == 0 ? "d1" : "c1");
  }
}

TEST(Stream, MissingModalityFailsOnDraw) {
  LoadedCorpus nl{"one", CorpusKind::NlMono,
                  {Document{"d1", "the cat", "en", TextKind::NL, {}}}};
  CorpusWeights none;
  const auto plan = plan_stream(rescale({{"one", 1.0}}, 0.3), none, 4, 10);
  Fixture f;
  ExampleStream s(plan, {nl}, f.vocab, {});
  EXPECT_NO_THROW(s.next());
  EXPECT_THROW(s.next(), DataError);
}

TEST(Stream, ParallelCorpusEmitsBothDirectionsPerEpoch) {
  LoadedCorpus nl{"pairs", CorpusKind::NlParallel,
                  {ParallelPair{"p1", "hello", "en", "bonjour", "fr", PairModality::NL_NL}}};
  LoadedCorpus pl{"code", CorpusKind::PlMono,
                  {Document{"c1", "x = 1\n", "Python", TextKind::PL, "Python"}}};
  const auto plan =
      plan_stream(rescale({{"pairs", 1.0}}, 0.3), rescale({{"code", 1.0}}, 0.3), 9, 10);
  Fixture f;
  ExampleStream s(plan, {nl, pl}, f.vocab, {});
  std::set<std::pair<std::string, std::string>> dirs;
  for (int i = 0; i < 4; ++i) {
    const auto ex = s.next();
    if (ex.direction) dirs.insert(*ex.direction);
  }
  EXPECT_EQ(dirs.size(), 2u);
  EXPECT_TRUE(dirs.count({"English", "French"}));
  EXPECT_TRUE(dirs.count({"French", "English"}));
}

TEST(Stream, BuildExamplesIndependentOfWorkers) {
  Fixture f;
  const auto plan = plan_from_manifest(f.manifest, 0.3, 0.5, 5, 64);
  const auto corpora = ExampleStream::load_corpora(plan, f.manifest);
  const auto one = build_examples(plan, corpora, f.vocab, {}, 64, 1);
  EXPECT_EQ(build_examples(plan, corpora, f.vocab, {}, 64, 4), one);
  EXPECT_EQ(build_examples(plan, corpora, f.vocab, {}, 64, 7), one);
  EXPECT_EQ(build_examples(plan, corpora, f.vocab, {}, 3, 8).size(), 3u);
}
