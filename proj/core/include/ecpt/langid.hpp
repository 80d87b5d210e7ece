#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ecpt {

/// Character-trigram model for one language.
///
/// Text is prepared by ASCII-lowercasing, collapsing whitespace runs to one
/// space and padding with a space on both ends; trigrams are windows of
/// three code points. Add-one smoothing runs over a trigram vocabulary of
/// size V shared by all competing profiles: with N trigram occurrences in the
/// training text, a trigram seen c times has probability (c + 1) / (N + V).
struct LangProfile {
  std::string lang;
  std::unordered_map<std::string, double> trigram_logprobs;
  double unseen_logprob = 0.0;
  double prior = 1.0;

  /// `vocabulary_size` of 0 means the sample's own distinct trigrams plus one.
  static LangProfile train(std::string lang, std::string_view sample, double prior = 1.0,
                           std::size_t vocabulary_size = 0);

  double logprob(std::string_view trigram) const;
};

/// Trigrams of the prepared form of `text`, as UTF-8 strings.
std::vector<std::string> char_trigrams(std::string_view text);

struct LangGuess {
  std::string lang;
  double confidence = 0.0;
  std::vector<double> posterior;  // aligned with the profile list
};

/// Naive Bayes argmax over the profiles. Ties go to the earliest profile.
/// Throws InvalidInput for blank text or an empty profile list.
LangGuess identify_lang(std::string_view text, std::span<const LangProfile> profiles);

/// Identifications at or below this confidence are labelled "text".
inline constexpr double kLangIdThreshold = 0.8;

struct LangSample {
  std::string lang;
  std::string text;
};

/// One profile per sample with uniform priors; V is the number of distinct
/// trigrams across all samples plus one for the unseen bucket.
std::vector<LangProfile> train_profiles(std::span<const LangSample> samples);

/// Profiles trained from the bundled samples of the 15 OPUS languages,
/// sorted by language code, with uniform priors.
const std::vector<LangProfile>& builtin_profiles();

/// Bundled training sample for a language code; empty when absent.
std::string_view builtin_sample(std::string_view lang);

/// Trains one profile per `<code>.txt` file in a directory (uniform priors).
std::vector<LangProfile> load_profiles(const std::filesystem::path& dir);

}  // namespace ecpt
