#include "ecpt/tokenizer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "ecpt/error.hpp"
#include "ecpt/text.hpp"

namespace ecpt {

namespace {

constexpr std::string_view kVocabHeader = "ECVOCAB 1";
constexpr std::string_view kSpecialSection = "[special]";
constexpr std::string_view kReplacementChar = "\xEF\xBF\xBD";

constexpr std::string_view kFixedSpecials[] = {
    "<pad>", "</s>", "<unk>", "<SEP>", "<|removed|>", "<space*1>", "<space*2>", "<space*4>",
    "<tab>", "<newline>"};

std::string format_score(double v) {
  char buf[64];
  const int n = std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(n));
}

}  // namespace

std::string special_token_name(TokenId id) {
  if (id < id_of(Special::Sentinel0)) return std::string(kFixedSpecials[id]);
  if (id < kNumSpecialTokens) {
    return "<extra_id_" + std::to_string(id - id_of(Special::Sentinel0)) + ">";
  }
  throw InvalidInput("not a special token id: " + std::to_string(id));
}

// ---------------------------------------------------------------------------
// Vocabulary

SubwordVocabulary::SubwordVocabulary(std::vector<Piece> pieces) {
  surfaces_.reserve(kNumSpecialTokens + pieces.size());
  scores_.reserve(kNumSpecialTokens + pieces.size());
  for (TokenId id = 0; id < kNumSpecialTokens; ++id) {
    surfaces_.push_back(special_token_name(id));
    scores_.push_back(0.0);
  }
  double min_score = 0.0;
  for (auto& [piece, score] : pieces) {
    if (piece.empty()) throw InvalidInput("vocabulary piece must be non-empty");
    if (!std::isfinite(score)) throw InvalidInput("vocabulary score must be finite: " + piece);
    const auto id = static_cast<TokenId>(surfaces_.size());
    if (!index_.emplace(piece, id).second) {
      throw InvalidInput("duplicate vocabulary piece '" + piece + "'");
    }
    max_piece_chars_ = std::max(max_piece_chars_, text::utf8_chars(piece).size());
    min_score = std::min(min_score, score);
    surfaces_.push_back(std::move(piece));
    scores_.push_back(score);
  }
  unk_score_ = min_score - 10.0;
}

const std::string& SubwordVocabulary::surface(TokenId id) const {
  if (id >= surfaces_.size()) throw InvalidInput("token id out of range: " + std::to_string(id));
  return surfaces_[id];
}

double SubwordVocabulary::score(TokenId id) const {
  if (id >= scores_.size()) throw InvalidInput("token id out of range: " + std::to_string(id));
  return scores_[id];
}

std::optional<TokenId> SubwordVocabulary::find(std::string_view piece) const {
  auto it = index_.find(std::string(piece));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<SubwordVocabulary::Piece> SubwordVocabulary::pieces() const {
  std::vector<Piece> out;
  out.reserve(piece_count());
  for (std::size_t i = kNumSpecialTokens; i < surfaces_.size(); ++i) {
    out.emplace_back(surfaces_[i], scores_[i]);
  }
  return out;
}

std::string SubwordVocabulary::serialize() const {
  std::string out;
  out.append(kVocabHeader).push_back('\n');
  for (std::size_t i = kNumSpecialTokens; i < surfaces_.size(); ++i) {
    out += text::escape_line(surfaces_[i]);
    out.push_back('\t');
    out += format_score(scores_[i]);
    out.push_back('\n');
  }
  out.append(kSpecialSection).push_back('\n');
  for (TokenId id = 0; id < kNumSpecialTokens; ++id) {
    out += surfaces_[id];
    out.push_back('\n');
  }
  return out;
}

SubwordVocabulary SubwordVocabulary::parse(std::string_view content) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < content.size()) {
    std::size_t nl = content.find('\n', start);
    if (nl == std::string_view::npos) nl = content.size();
    lines.push_back(content.substr(start, nl - start));
    start = nl + 1;
  }
  if (lines.empty() || lines[0] != kVocabHeader) {
    throw DataError("vocabulary: missing 'ECVOCAB 1' header");
  }
  std::vector<Piece> pieces;
  std::size_t i = 1;
  for (; i < lines.size() && lines[i] != kSpecialSection; ++i) {
    const auto line = lines[i];
    const auto tab = line.rfind('\t');
    if (tab == std::string_view::npos) {
      throw DataError("vocabulary line " + std::to_string(i + 1) + ": expected piece<TAB>score");
    }
    const std::string score_text(line.substr(tab + 1));
    char* end = nullptr;
    const double score = std::strtod(score_text.c_str(), &end);
    if (score_text.empty() || end != score_text.c_str() + score_text.size()) {
      throw DataError("vocabulary line " + std::to_string(i + 1) + ": bad score");
    }
    pieces.emplace_back(text::unescape_line(line.substr(0, tab)), score);
  }
  if (i == lines.size()) throw DataError("vocabulary: missing [special] section");
  ++i;
  TokenId expected = 0;
  for (; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    if (expected >= kNumSpecialTokens || lines[i] != special_token_name(expected)) {
      throw DataError("vocabulary: special tokens out of canonical order at '" +
                      std::string(lines[i]) + "'");
    }
    ++expected;
  }
  if (expected != kNumSpecialTokens) throw DataError("vocabulary: incomplete [special] section");
  try {
    return SubwordVocabulary(std::move(pieces));
  } catch (const InvalidInput& e) {
    throw DataError(std::string("vocabulary: ") + e.what());
  }
}

SubwordVocabulary SubwordVocabulary::load(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot read vocabulary " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void SubwordVocabulary::save(const std::filesystem::path& file) const {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw IoError("cannot write vocabulary " + file.string());
  out << serialize();
}

// ---------------------------------------------------------------------------
// Pretokenization

std::vector<Segment> pretokenize(std::string_view s) {
  constexpr std::string_view removed = "<|removed|>";
  std::vector<Segment> out;
  std::size_t i = 0;
  std::size_t text_start = std::string_view::npos;
  auto flush_text = [&](std::size_t end) {
    if (text_start != std::string_view::npos && end > text_start) {
      out.push_back({SegmentKind::Text, text_start, end});
    }
    text_start = std::string_view::npos;
  };
  while (i < s.size()) {
    const char c = s[i];
    if (c == ' ') {
      flush_text(i);
      std::size_t j = i;
      while (j < s.size() && s[j] == ' ') ++j;
      std::size_t run = j - i;
      for (; run >= 4; run -= 4, i += 4) out.push_back({SegmentKind::Space4, i, i + 4});
      if (run >= 2) {
        out.push_back({SegmentKind::Space2, i, i + 2});
        run -= 2;
        i += 2;
      }
      if (run == 1) {
        out.push_back({SegmentKind::Space1, i, i + 1});
        ++i;
      }
      continue;
    }
    if (c == '\t' || c == '\n') {
      flush_text(i);
      out.push_back({c == '\t' ? SegmentKind::Tab : SegmentKind::Newline, i, i + 1});
      ++i;
      continue;
    }
    if (c == '<' && s.substr(i, removed.size()) == removed) {
      flush_text(i);
      out.push_back({SegmentKind::Removed, i, i + removed.size()});
      i += removed.size();
      continue;
    }
    if (text_start == std::string_view::npos) text_start = i;
    ++i;
  }
  flush_text(s.size());
  return out;
}

// ---------------------------------------------------------------------------
// Encoding

namespace {

struct Lattice {
  double score = 0.0;
  std::size_t count = 0;
  std::size_t next = 0;  // code-point index after the first piece
  TokenId id = 0;
  std::string_view first;
  bool reachable = false;
};

bool better(double score, std::size_t count, std::string_view first, const Lattice& cur) {
  if (!cur.reachable) return true;
  if (score != cur.score) return score > cur.score;
  if (count != cur.count) return count < cur.count;
  return first < cur.first;
}

void encode_plain(std::string_view seg, std::size_t base, const SubwordVocabulary& vocab,
                  TokenSequence& out) {
  const auto chars = text::utf8_chars(seg);
  const std::size_t m = chars.size();
  std::vector<std::size_t> byte_at(m + 1);
  for (std::size_t k = 0; k < m; ++k) byte_at[k + 1] = byte_at[k] + chars[k].size();

  // best[i] is the optimal segmentation of the suffix starting at code point i.
  std::vector<Lattice> best(m + 1);
  best[m].reachable = true;
  const std::size_t max_len = std::max<std::size_t>(vocab.max_piece_chars(), 1);
  for (std::size_t i = m; i-- > 0;) {
    bool have_single = false;
    for (std::size_t len = 1; len <= max_len && i + len <= m; ++len) {
      const std::size_t j = i + len;
      if (!best[j].reachable) continue;
      const auto piece = seg.substr(byte_at[i], byte_at[j] - byte_at[i]);
      const auto id = vocab.find(piece);
      if (!id) continue;
      if (len == 1) have_single = true;
      const double score = vocab.score(*id) + best[j].score;
      const std::size_t count = best[j].count + 1;
      if (better(score, count, piece, best[i])) {
        best[i] = {score, count, j, *id, piece, true};
      }
    }
    if (!have_single && best[i + 1].reachable) {
      const auto piece = chars[i];
      const double score = vocab.unk_score() + best[i + 1].score;
      const std::size_t count = best[i + 1].count + 1;
      if (better(score, count, piece, best[i])) {
        best[i] = {score, count, i + 1, id_of(Special::Unk), piece, true};
      }
    }
  }
  for (std::size_t i = 0; i < m; i = best[i].next) {
    out.ids.push_back(best[i].id);
    out.offsets.emplace_back(base + byte_at[i], base + byte_at[best[i].next]);
  }
}

}  // namespace

TokenSequence encode(std::string_view s, const SubwordVocabulary& vocab) {
  TokenSequence out;
  for (const auto& seg : pretokenize(s)) {
    switch (seg.kind) {
      case SegmentKind::Text:
        encode_plain(s.substr(seg.begin, seg.end - seg.begin), seg.begin, vocab, out);
        continue;
      case SegmentKind::Space4: out.ids.push_back(id_of(Special::Space4)); break;
      case SegmentKind::Space2: out.ids.push_back(id_of(Special::Space2)); break;
      case SegmentKind::Space1: out.ids.push_back(id_of(Special::Space1)); break;
      case SegmentKind::Tab: out.ids.push_back(id_of(Special::Tab)); break;
      case SegmentKind::Newline: out.ids.push_back(id_of(Special::Newline)); break;
      case SegmentKind::Removed: out.ids.push_back(id_of(Special::Removed)); break;
    }
    out.offsets.emplace_back(seg.begin, seg.end);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Decoding

namespace {

void append_surface(std::string& out, TokenId id, const SubwordVocabulary& vocab) {
  if (!vocab.contains(id)) throw InvalidInput("unknown token id " + std::to_string(id));
  switch (id) {
    case id_of(Special::Pad):
    case id_of(Special::Eos): return;
    case id_of(Special::Unk): out += kReplacementChar; return;
    case id_of(Special::Space1): out += ' '; return;
    case id_of(Special::Space2): out += "  "; return;
    case id_of(Special::Space4): out += "    "; return;
    case id_of(Special::Tab): out += '\t'; return;
    case id_of(Special::Newline): out += '\n'; return;
    default: out += vocab.surface(id);
  }
}

}  // namespace

std::string decode(std::span<const TokenId> ids, const SubwordVocabulary& vocab) {
  std::string out;
  for (TokenId id : ids) append_surface(out, id, vocab);
  return out;
}

std::string decode(const TokenSequence& seq, std::string_view source,
                   const SubwordVocabulary& vocab) {
  if (seq.offsets.size() != seq.ids.size()) {
    throw InvalidInput("decode: offsets and ids differ in length");
  }
  std::string out;
  for (std::size_t k = 0; k < seq.ids.size(); ++k) {
    const auto [b, e] = seq.offsets[k];
    if (seq.ids[k] == id_of(Special::Unk) && b <= e && e <= source.size()) {
      out.append(source.substr(b, e - b));
    } else {
      append_surface(out, seq.ids[k], vocab);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Training

namespace {

using Symbols = std::vector<std::string>;

}  // namespace

SubwordVocabulary train_vocab(std::span<const std::string> texts, const VocabTrainOptions& opts) {
  if (opts.target_size <= kNumSpecialTokens) {
    throw InvalidInput("target_size " + std::to_string(opts.target_size) +
                       " does not exceed the " + std::to_string(kNumSpecialTokens) +
                       " special tokens");
  }
  std::map<std::string, std::uint64_t> char_counts;
  std::map<std::string, std::uint64_t> word_counts;
  for (const auto& t : texts) {
    for (const auto& seg : pretokenize(t)) {
      if (seg.kind != SegmentKind::Text) continue;
      const auto word = std::string_view(t).substr(seg.begin, seg.end - seg.begin);
      ++word_counts[std::string(word)];
      for (auto ch : text::utf8_chars(word)) ++char_counts[std::string(ch)];
    }
  }
  std::uint64_t total_chars = 0;
  std::vector<SubwordVocabulary::Piece> pieces;
  for (const auto& [ch, c] : char_counts) {
    if (c >= opts.min_freq) total_chars += c;
  }
  for (const auto& [ch, c] : char_counts) {
    if (c >= opts.min_freq) {
      pieces.emplace_back(ch, std::log(static_cast<double>(c) / static_cast<double>(total_chars)));
    }
  }
  if (pieces.empty()) throw DataError("train_vocab: corpus has no characters at min_freq");
  if (opts.target_size <= kNumSpecialTokens + pieces.size()) {
    throw InvalidInput("target_size must exceed special tokens plus the base alphabet (" +
                       std::to_string(kNumSpecialTokens + pieces.size()) + ")");
  }

  // Words split into symbols; characters below min_freq break words apart.
  std::vector<std::pair<Symbols, std::uint64_t>> words;
  for (const auto& [word, freq] : word_counts) {
    Symbols cur;
    for (auto ch : text::utf8_chars(word)) {
      if (char_counts[std::string(ch)] >= opts.min_freq) {
        cur.emplace_back(ch);
      } else if (!cur.empty()) {
        words.emplace_back(std::move(cur), freq);
        cur.clear();
      }
    }
    if (!cur.empty()) words.emplace_back(std::move(cur), freq);
  }

  std::unordered_map<std::string, TokenId> known;
  for (std::size_t i = 0; i < pieces.size(); ++i) known.emplace(pieces[i].first, i);

  while (kNumSpecialTokens + pieces.size() < opts.target_size) {
    std::map<std::pair<std::string, std::string>, std::uint64_t> pair_counts;
    for (const auto& [syms, freq] : words) {
      for (std::size_t k = 0; k + 1 < syms.size(); ++k) pair_counts[{syms[k], syms[k + 1]}] += freq;
    }
    const std::pair<std::string, std::string>* best = nullptr;
    std::uint64_t best_count = 0;
    for (const auto& [pair, c] : pair_counts) {
      if (c > best_count) {  // map order breaks ties toward the smallest pair
        best = &pair;
        best_count = c;
      }
    }
    if (best == nullptr || best_count < std::max<std::uint64_t>(opts.min_freq, 1)) break;
    const std::string left = best->first;
    const std::string right = best->second;
    const std::string merged = left + right;
    for (auto& [syms, freq] : words) {
      Symbols next;
      next.reserve(syms.size());
      for (std::size_t k = 0; k < syms.size(); ++k) {
        if (k + 1 < syms.size() && syms[k] == left && syms[k + 1] == right) {
          next.push_back(merged);
          ++k;
        } else {
          next.push_back(std::move(syms[k]));
        }
      }
      syms = std::move(next);
    }
    if (known.emplace(merged, pieces.size()).second) {
      pieces.emplace_back(merged, std::log(static_cast<double>(best_count) /
                                           static_cast<double>(total_chars)));
    }
  }
  return SubwordVocabulary(std::move(pieces));
}

SubwordVocabulary train_vocab(std::span<const Document> corpus, const VocabTrainOptions& opts) {
  std::vector<std::string> texts;
  texts.reserve(corpus.size());
  for (const auto& d : corpus) texts.push_back(d.text);
  return train_vocab(texts, opts);
}

}  // namespace ecpt
