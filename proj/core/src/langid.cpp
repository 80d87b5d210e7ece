#include "ecpt/langid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <unordered_set>

#include "ecpt/error.hpp"
#include "ecpt/text.hpp"
#include "langid_samples.hpp"

namespace ecpt {

std::vector<std::string> char_trigrams(std::string_view raw) {
  const std::string prepared = " " + text::normalize_whitespace(text::ascii_lower(raw)) + " ";
  const auto chars = text::utf8_chars(prepared);
  std::vector<std::string> out;
  if (chars.size() < 3) return out;
  out.reserve(chars.size() - 2);
  for (std::size_t i = 0; i + 2 < chars.size(); ++i) {
    std::string t;
    t.append(chars[i]).append(chars[i + 1]).append(chars[i + 2]);
    out.push_back(std::move(t));
  }
  return out;
}

LangProfile LangProfile::train(std::string lang, std::string_view sample, double prior,
                               std::size_t vocabulary_size) {
  if (!(prior > 0.0)) throw InvalidInput("profile prior must be positive");
  std::map<std::string, std::uint64_t> counts;
  std::uint64_t total = 0;
  for (auto& t : char_trigrams(sample)) {
    ++counts[std::move(t)];
    ++total;
  }
  if (vocabulary_size == 0) vocabulary_size = counts.size() + 1;
  if (vocabulary_size <= counts.size()) {
    throw InvalidInput("trigram vocabulary smaller than the sample's own trigrams");
  }
  const double denom = static_cast<double>(total + vocabulary_size);
  LangProfile p;
  p.lang = std::move(lang);
  p.prior = prior;
  p.unseen_logprob = std::log(1.0 / denom);
  p.trigram_logprobs.reserve(counts.size());
  for (const auto& [tri, c] : counts) {
    p.trigram_logprobs.emplace(tri, std::log(static_cast<double>(c + 1) / denom));
  }
  return p;
}

double LangProfile::logprob(std::string_view trigram) const {
  auto it = trigram_logprobs.find(std::string(trigram));
  return it == trigram_logprobs.end() ? unseen_logprob : it->second;
}

LangGuess identify_lang(std::string_view input, std::span<const LangProfile> profiles) {
  if (profiles.empty()) throw InvalidInput("identify_lang: no language profiles");
  if (text::trim(input).empty()) throw InvalidInput("identify_lang: empty text");
  const auto trigrams = char_trigrams(input);
  std::vector<double> scores(profiles.size());
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    double s = std::log(profiles[i].prior);
    for (const auto& t : trigrams) s += profiles[i].logprob(t);
    scores[i] = s;
  }
  const double top = *std::max_element(scores.begin(), scores.end());
  double z = 0.0;
  for (double s : scores) z += std::exp(s - top);
  LangGuess g;
  g.posterior.resize(scores.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    g.posterior[i] = std::exp(scores[i] - top) / z;
    if (g.posterior[i] > g.posterior[best]) best = i;
  }
  g.lang = profiles[best].lang;
  g.confidence = g.posterior[best];
  return g;
}

std::string_view builtin_sample(std::string_view lang) {
  for (const auto& s : detail::kLangIdSamples) {
    if (s.lang == lang) return s.text;
  }
  return {};
}

std::vector<LangProfile> train_profiles(std::span<const LangSample> samples) {
  if (samples.empty()) throw InvalidInput("no language samples");
  std::unordered_set<std::string> vocabulary;
  for (const auto& s : samples) {
    for (auto& t : char_trigrams(s.text)) vocabulary.insert(std::move(t));
  }
  const double prior = 1.0 / static_cast<double>(samples.size());
  std::vector<LangProfile> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    out.push_back(LangProfile::train(s.lang, s.text, prior, vocabulary.size() + 1));
  }
  return out;
}

const std::vector<LangProfile>& builtin_profiles() {
  static const std::vector<LangProfile> profiles = [] {
    std::vector<LangSample> samples;
    for (const auto& s : detail::kLangIdSamples) {
      samples.push_back({std::string(s.lang), std::string(s.text)});
    }
    std::sort(samples.begin(), samples.end(),
              [](const LangSample& a, const LangSample& b) { return a.lang < b.lang; });
    return train_profiles(samples);
  }();
  return profiles;
}

std::vector<LangProfile> load_profiles(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw IoError("profile directory not found: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw DataError("no *.txt profiles in " + dir.string());
  std::vector<LangSample> samples;
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    if (!in) throw IoError("cannot read " + f.string());
    std::stringstream ss;
    ss << in.rdbuf();
    samples.push_back({f.stem().string(), ss.str()});
  }
  return train_profiles(samples);
}

}  // namespace ecpt
