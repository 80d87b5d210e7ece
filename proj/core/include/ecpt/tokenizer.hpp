#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ecpt/corpus.hpp"

namespace ecpt {

using TokenId = std::uint32_t;

/// Reserved tokens. Their ids are fixed: they occupy [0, kNumSpecialTokens)
/// in this order, followed by SENTINEL_0..SENTINEL_99. Vocabulary pieces
/// start at kNumSpecialTokens.
enum class Special : TokenId {
  Pad = 0,
  Eos,
  Unk,
  Sep,
  Removed,
  Space1,
  Space2,
  Space4,
  Tab,
  Newline,
  Sentinel0,
};

inline constexpr TokenId kNumSentinels = 100;
inline constexpr TokenId kNumSpecialTokens = static_cast<TokenId>(Special::Sentinel0) + kNumSentinels;

constexpr TokenId id_of(Special s) { return static_cast<TokenId>(s); }
constexpr TokenId sentinel_id(TokenId k) { return id_of(Special::Sentinel0) + k; }
constexpr bool is_sentinel(TokenId id) {
  return id >= id_of(Special::Sentinel0) && id < kNumSpecialTokens;
}

/// Canonical surface of a special token ("<pad>", "</s>", "<extra_id_7>", ...).
std::string special_token_name(TokenId id);

/// Scored subword inventory plus the reserved tokens. Immutable once built.
class SubwordVocabulary {
 public:
  using Piece = std::pair<std::string, double>;

  explicit SubwordVocabulary(std::vector<Piece> pieces);

  std::size_t size() const { return surfaces_.size(); }
  std::size_t piece_count() const { return surfaces_.size() - kNumSpecialTokens; }

  const std::string& surface(TokenId id) const;
  double score(TokenId id) const;
  bool is_special(TokenId id) const { return id < kNumSpecialTokens; }
  bool contains(TokenId id) const { return id < surfaces_.size(); }

  std::optional<TokenId> find(std::string_view piece) const;
  std::size_t max_piece_chars() const { return max_piece_chars_; }
  double unk_score() const { return unk_score_; }

  std::vector<Piece> pieces() const;

  /// "ECVOCAB 1" text format.
  std::string serialize() const;
  static SubwordVocabulary parse(std::string_view text);
  static SubwordVocabulary load(const std::filesystem::path& file);
  void save(const std::filesystem::path& file) const;

 private:
  std::vector<std::string> surfaces_;
  std::vector<double> scores_;
  std::unordered_map<std::string, TokenId> index_;
  std::size_t max_piece_chars_ = 0;
  double unk_score_ = -100.0;
};

enum class SegmentKind { Text, Space4, Space2, Space1, Tab, Newline, Removed };

struct Segment {
  SegmentKind kind;
  std::size_t begin;
  std::size_t end;

  bool operator==(const Segment&) const = default;
};

/// Splits text into whitespace tokens and plain runs. Space runs decompose
/// greedily into 4/2/1 segments, each '\t' and '\n' is one segment, and the
/// literal "<|removed|>" placeholder is its own segment. Segment byte ranges
/// tile the input.
std::vector<Segment> pretokenize(std::string_view text);

struct TokenSequence {
  std::vector<TokenId> ids;
  std::vector<std::pair<std::size_t, std::size_t>> offsets;  // byte ranges

  bool operator==(const TokenSequence&) const = default;
};

/// Pretokenizes, then segments each plain run by maximum total piece score.
/// Ties prefer fewer pieces, then the lexicographically smallest piece
/// sequence. Code points with no single-character piece become UNK.
TokenSequence encode(std::string_view text, const SubwordVocabulary& vocab);

/// Concatenates token surfaces; UNK becomes U+FFFD. PAD and EOS decode to
/// nothing. Throws InvalidInput on ids outside the vocabulary.
std::string decode(std::span<const TokenId> ids, const SubwordVocabulary& vocab);

/// Like decode, but UNK tokens recover their bytes from `source` via offsets.
std::string decode(const TokenSequence& seq, std::string_view source,
                   const SubwordVocabulary& vocab);

struct VocabTrainOptions {
  std::size_t target_size = 8000;
  std::uint64_t min_freq = 1;
};

/// Byte-pair-merge trainer. Deterministic in corpus order and options.
SubwordVocabulary train_vocab(std::span<const std::string> texts, const VocabTrainOptions& opts);
SubwordVocabulary train_vocab(std::span<const Document> corpus, const VocabTrainOptions& opts);

}  // namespace ecpt
