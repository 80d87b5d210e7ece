#include "ecpt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "ecpt/error.hpp"
#include "ecpt/text.hpp"

namespace ecpt::metrics {

namespace {

// str.isspace() for the code points str.split() breaks on.
bool py_space(char32_t c) {
  return (c >= 0x09 && c <= 0x0d) || (c >= 0x1c && c <= 0x20) || c == 0x85 || c == 0xa0 ||
         c == 0x1680 || (c >= 0x2000 && c <= 0x200a) || c == 0x2028 || c == 0x2029 ||
         c == 0x202f || c == 0x205f || c == 0x3000;
}

bool is_ascii_space_free(std::string_view s) {
  for (unsigned char c : s) {
    if (c >= 0x80) return false;
  }
  return true;
}

Tokens py_split(std::string_view s) {
  if (is_ascii_space_free(s)) {
    Tokens out;
    std::size_t i = 0;
    while (i < s.size()) {
      while (i < s.size() && py_space(static_cast<unsigned char>(s[i]))) ++i;
      std::size_t j = i;
      while (j < s.size() && !py_space(static_cast<unsigned char>(s[j]))) ++j;
      if (j > i) out.emplace_back(s.substr(i, j - i));
      i = j;
    }
    return out;
  }
  Tokens out;
  std::string cur;
  for (auto ch : text::utf8_chars(s)) {
    const auto cp = text::utf8_decode(ch);
    if (cp.size() == 1 && py_space(cp[0])) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.append(ch);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  std::string out;
  std::size_t pos = 0;
  for (;;) {
    const auto hit = s.find(from, pos);
    if (hit == std::string::npos) break;
    out.append(s, pos, hit - pos);
    out.append(to);
    pos = hit + from.size();
  }
  out.append(s, pos, std::string::npos);
  s = std::move(out);
}

bool digit(char c) { return c >= '0' && c <= '9'; }

bool split_punct(unsigned char c) {
  return (c >= '{' && c <= '~') || (c >= '[' && c <= '`') || (c >= ' ' && c <= '&') ||
         (c >= '(' && c <= '+') || (c >= ':' && c <= '@') || c == '/';
}

std::string ngram_key(const Tokens& toks, std::size_t i, std::size_t n) {
  std::string key;
  for (std::size_t k = 0; k < n; ++k) {
    key += std::to_string(toks[i + k].size());
    key += ':';
    key += toks[i + k];
  }
  return key;
}

using NgramCounts = std::unordered_map<std::string, std::pair<double, bool>>;

// Counts with a flag telling whether the n-gram holds a keyword.
std::array<NgramCounts, kMaxNgramOrder> count_ngrams(const Tokens& toks,
                                                     const std::set<std::string>* keywords) {
  std::array<NgramCounts, kMaxNgramOrder> out;
  for (std::size_t n = 1; n <= kMaxNgramOrder; ++n) {
    for (std::size_t i = 0; i + n <= toks.size(); ++i) {
      auto& slot = out[n - 1][ngram_key(toks, i, n)];
      slot.first += 1;
      if (keywords && !slot.second) {
        for (std::size_t k = 0; k < n; ++k) {
          if (keywords->count(toks[i + k])) {
            slot.second = true;
            break;
          }
        }
      }
    }
  }
  return out;
}

BleuStats stats_impl(const Tokens& hyp, const Tokens& ref, const std::set<std::string>* keywords,
                     double weight) {
  BleuStats s;
  s.hyp_len = static_cast<double>(hyp.size());
  s.ref_len = static_cast<double>(ref.size());
  const auto h = count_ngrams(hyp, keywords);
  const auto r = count_ngrams(ref, nullptr);
  for (std::size_t n = 0; n < kMaxNgramOrder; ++n) {
    for (const auto& [key, slot] : h[n]) {
      const double w = slot.second ? weight : 1.0;
      s.totals[n] += w * slot.first;
      const auto it = r[n].find(key);
      if (it != r[n].end()) s.matches[n] += w * std::min(slot.first, it->second.first);
    }
  }
  return s;
}

std::u32string strip_spaces(std::string_view s) {
  std::u32string out;
  for (char32_t c : text::utf8_decode(s)) {
    if (!py_space(c)) out.push_back(c);
  }
  return out;
}

}  // namespace

std::string tokenize_13a(std::string_view input) {
  std::string line(input);
  replace_all(line, "<skipped>", "");
  replace_all(line, "-\n", "");
  replace_all(line, "\n", " ");
  if (line.find('&') != std::string::npos) {
    replace_all(line, "&quot;", "\"");
    replace_all(line, "&amp;", "&");
    replace_all(line, "&lt;", "<");
    replace_all(line, "&gt;", ">");
  }
  line = " " + line + " ";

  std::string a;
  a.reserve(line.size() * 2);
  for (char c : line) {
    if (split_punct(static_cast<unsigned char>(c))) {
      a += ' ';
      a += c;
      a += ' ';
    } else {
      a += c;
    }
  }

  std::string b;
  for (std::size_t i = 0; i < a.size();) {
    if (i + 1 < a.size() && !digit(a[i]) && (a[i + 1] == '.' || a[i + 1] == ',')) {
      b += a[i];
      b += ' ';
      b += a[i + 1];
      b += ' ';
      i += 2;
    } else {
      b += a[i++];
    }
  }

  std::string c;
  for (std::size_t i = 0; i < b.size();) {
    if (i + 1 < b.size() && (b[i] == '.' || b[i] == ',') && !digit(b[i + 1])) {
      c += ' ';
      c += b[i];
      c += ' ';
      c += b[i + 1];
      i += 2;
    } else {
      c += b[i++];
    }
  }

  std::string d;
  for (std::size_t i = 0; i < c.size();) {
    if (i + 1 < c.size() && digit(c[i]) && c[i + 1] == '-') {
      d += c[i];
      d += " - ";
      i += 2;
    } else {
      d += c[i++];
    }
  }

  std::string out;
  for (const auto& t : py_split(d)) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

Tokens tokens_13a(std::string_view line) { return py_split(tokenize_13a(line)); }

BleuStats& BleuStats::operator+=(const BleuStats& o) {
  for (int n = 0; n < kMaxNgramOrder; ++n) {
    matches[n] += o.matches[n];
    totals[n] += o.totals[n];
  }
  hyp_len += o.hyp_len;
  ref_len += o.ref_len;
  return *this;
}

BleuStats bleu_stats(const Tokens& hyp, const Tokens& ref) {
  return stats_impl(hyp, ref, nullptr, 1.0);
}

BleuStats weighted_ngram_stats(const Tokens& hyp, const Tokens& ref,
                               const std::set<std::string>& keywords, double weight) {
  return stats_impl(hyp, ref, &keywords, weight);
}

double bleu_from_stats(const BleuStats& s) {
  double bp = 1.0;
  if (s.hyp_len < s.ref_len) bp = s.hyp_len > 0 ? std::exp(1.0 - s.ref_len / s.hyp_len) : 0.0;
  if (std::all_of(s.matches.begin(), s.matches.end(), [](double m) { return m == 0; })) return 0.0;
  double smooth = 1.0;
  double log_sum = 0.0;
  int order = 0;
  for (int n = 0; n < kMaxNgramOrder; ++n) {
    if (s.totals[n] == 0) break;
    order = n + 1;
    double p;
    if (s.matches[n] == 0) {
      smooth *= 2;
      p = 100.0 / (smooth * s.totals[n]);
    } else {
      p = 100.0 * s.matches[n] / s.totals[n];
    }
    log_sum += std::log(p);
  }
  return bp * std::exp(log_sum / order);
}

double bleu4(const std::vector<Tokens>& hyps, const std::vector<Tokens>& refs) {
  if (hyps.empty()) throw InvalidInput("bleu4: empty hypothesis set");
  if (hyps.size() != refs.size()) throw InvalidInput("bleu4: hypothesis/reference count mismatch");
  BleuStats total;
  for (std::size_t i = 0; i < hyps.size(); ++i) total += bleu_stats(hyps[i], refs[i]);
  return bleu_from_stats(total);
}

double sentence_bleu(const Tokens& hyp, const Tokens& ref) {
  return bleu_from_stats(bleu_stats(hyp, ref));
}

std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l(const Tokens& hyp, const Tokens& ref, double beta2) {
  if (hyp.empty() || ref.empty()) return 0.0;
  const double lcs = static_cast<double>(lcs_length(hyp, ref));
  if (lcs == 0) return 0.0;
  const double p = lcs / static_cast<double>(hyp.size());
  const double r = lcs / static_cast<double>(ref.size());
  return 100.0 * (1 + beta2) * p * r / (r + beta2 * p);
}

ChrfStats& ChrfStats::operator+=(const ChrfStats& o) {
  if (orders.size() < o.orders.size()) orders.resize(o.orders.size(), {0, 0, 0});
  for (std::size_t i = 0; i < o.orders.size(); ++i) {
    for (int k = 0; k < 3; ++k) orders[i][k] += o.orders[i][k];
  }
  return *this;
}

ChrfStats chrf_stats(std::string_view hyp, std::string_view ref, int order) {
  if (order < 1) throw InvalidInput("chrf: order must be positive");
  const auto h = strip_spaces(hyp);
  const auto r = strip_spaces(ref);
  ChrfStats s;
  s.orders.assign(static_cast<std::size_t>(order), {0, 0, 0});
  for (int n = 1; n <= order; ++n) {
    const auto un = static_cast<std::size_t>(n);
    std::unordered_map<std::u32string, double> hc, rc;
    for (std::size_t i = 0; i + un <= h.size(); ++i) hc[h.substr(i, un)] += 1;
    for (std::size_t i = 0; i + un <= r.size(); ++i) rc[r.substr(i, un)] += 1;
    auto& o = s.orders[un - 1];
    for (const auto& [g, c] : hc) {
      o[0] += c;
      const auto it = rc.find(g);
      if (it != rc.end()) o[2] += std::min(c, it->second);
    }
    for (const auto& [g, c] : rc) o[1] += c;
  }
  return s;
}

double chrf_from_stats(const ChrfStats& s, double beta) {
  const double factor = beta * beta;
  double avg_prec = 0, avg_rec = 0;
  int effective = 0;
  for (const auto& o : s.orders) {
    const double n_hyp = o[0], n_ref = o[1], n_match = o[2];
    if (n_hyp > 0 && n_ref > 0) {
      avg_prec += n_match / n_hyp;
      avg_rec += n_match / n_ref;
      ++effective;
    }
  }
  if (effective == 0) return 0.0;
  avg_prec /= effective;
  avg_rec /= effective;
  if (avg_prec + avg_rec == 0) return 0.0;
  return 100.0 * (1 + factor) * avg_prec * avg_rec / (factor * avg_prec + avg_rec);
}

double chrf(std::string_view hyp, std::string_view ref, int order, double beta) {
  return chrf_from_stats(chrf_stats(hyp, ref, order), beta);
}

double corpus_chrf(const std::vector<std::string>& hyps, const std::vector<std::string>& refs,
                   int order, double beta) {
  if (hyps.empty()) throw InvalidInput("chrf: empty hypothesis set");
  if (hyps.size() != refs.size()) throw InvalidInput("chrf: hypothesis/reference count mismatch");
  ChrfStats total;
  for (std::size_t i = 0; i < hyps.size(); ++i) total += chrf_stats(hyps[i], refs[i], order);
  return chrf_from_stats(total, beta);
}

double exact_match(const std::vector<std::string>& hyps, const std::vector<std::string>& refs) {
  if (hyps.size() != refs.size()) {
    throw InvalidInput("exact_match: hypothesis/reference count mismatch");
  }
  if (hyps.empty()) return 0.0;
  std::size_t equal = 0;
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    if (text::rtrim(hyps[i]) == text::rtrim(refs[i])) ++equal;
  }
  return 100.0 * static_cast<double>(equal) / static_cast<double>(hyps.size());
}

KeywordTable KeywordTable::builtin() {
  KeywordTable t;
  auto words = [](std::string_view list) {
    std::set<std::string> out;
    for (auto& w : text::split_whitespace(list)) out.insert(w);
    return out;
  };
  t.keywords["Python"] = words(
      "False None True and as assert async await break class continue def del elif else except "
      "finally for from global if import in is lambda nonlocal not or pass raise return try "
      "while with yield self abs all any bin bool bytes callable chr dict dir divmod enumerate "
      "eval filter float format getattr hasattr hash hex id input int isinstance issubclass iter "
      "len list map max min next object oct open ord pow print range repr reversed round set "
      "setattr slice sorted str sum super tuple type vars zip");
  t.keywords["Java"] = words(
      "abstract assert boolean break byte case catch char class const continue default do double "
      "else enum extends final finally float for goto if implements import instanceof int "
      "interface long native new package private protected public return short static strictfp "
      "super switch synchronized this throw throws transient try void volatile while true false "
      "null String System");
  t.keywords["JavaScript"] = words(
      "break case catch class const continue debugger default delete do else export extends "
      "finally for function if import in instanceof new return super switch this throw try "
      "typeof var void while with yield let static async await true false null undefined "
      "console");
  t.keywords["Go"] = words(
      "break case chan const continue default defer else fallthrough for func go goto if import "
      "interface map package range return select struct switch type var true false nil iota "
      "append cap close complex copy delete imag len make new panic print println real recover");
  t.keywords["PHP"] = words(
      "abstract and array as break callable case catch class clone const continue declare "
      "default do echo else elseif empty enddeclare endfor endforeach endif endswitch endwhile "
      "eval exit extends final finally fn for foreach function global goto if implements include "
      "include_once instanceof insteadof interface isset list match namespace new or print "
      "private protected public require require_once return static switch throw trait try unset "
      "use var while xor yield true false null");
  t.keywords["Ruby"] = words(
      "BEGIN END alias and begin break case class def defined? do else elsif end ensure false "
      "for if in module next nil not or redo rescue retry return self super then true undef "
      "unless until when while yield puts require attr_accessor");
  return t;
}

const std::set<std::string>& KeywordTable::for_language(std::string_view lang) const {
  const auto wanted = text::ascii_lower(lang);
  for (const auto& [name, set] : keywords) {
    if (text::ascii_lower(name) == wanted) return set;
  }
  throw InvalidInput("no keyword table for language '" + std::string(lang) + "'");
}

}  // namespace ecpt::metrics
