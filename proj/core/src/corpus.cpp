#include "ecpt/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <json.hpp>

#include "ecpt/error.hpp"
#include "ecpt/languages.hpp"
#include "ecpt/rng.hpp"
#include "ecpt/text.hpp"

namespace ecpt {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string_view to_string(CorpusKind kind) {
  switch (kind) {
    case CorpusKind::NlMono: return "NL";
    case CorpusKind::PlMono: return "PL";
    case CorpusKind::NlParallel: return "NL_NL";
    case CorpusKind::NlPlParallel: return "NL_PL";
  }
  return "?";
}

CorpusKind corpus_kind_from_string(std::string_view s) {
  if (s == "NL") return CorpusKind::NlMono;
  if (s == "PL") return CorpusKind::PlMono;
  if (s == "NL_NL") return CorpusKind::NlParallel;
  if (s == "NL_PL") return CorpusKind::NlPlParallel;
  throw InvalidInput("unknown corpus kind '" + std::string(s) + "'");
}

Modality modality_of(CorpusKind kind) {
  return (kind == CorpusKind::NlMono || kind == CorpusKind::NlParallel) ? Modality::NL
                                                                         : Modality::PL;
}

bool is_parallel(CorpusKind kind) {
  return kind == CorpusKind::NlParallel || kind == CorpusKind::NlPlParallel;
}

std::string_view to_string(Modality m) { return m == Modality::NL ? "NL" : "PL"; }

// ---------------------------------------------------------------------------
// Manifest

CorpusManifest::CorpusManifest(std::vector<ManifestEntry> entries) {
  for (auto& e : entries) add(std::move(e));
}

void CorpusManifest::add(ManifestEntry entry) {
  if (entry.corpus_id.empty()) throw InvalidInput("manifest entry with empty corpus_id");
  if (find(entry.corpus_id) != nullptr) {
    throw InvalidInput("duplicate corpus_id '" + entry.corpus_id + "'");
  }
  entries_.push_back(std::move(entry));
}

const ManifestEntry* CorpusManifest::find(std::string_view corpus_id) const {
  auto it = std::find_if(entries_.begin(), entries_.end(),
                         [&](const ManifestEntry& e) { return e.corpus_id == corpus_id; });
  return it == entries_.end() ? nullptr : &*it;
}

const ManifestEntry& CorpusManifest::at(std::string_view corpus_id) const {
  if (const auto* e = find(corpus_id)) return *e;
  throw InvalidInput("no corpus '" + std::string(corpus_id) + "' in manifest");
}

ManifestEntry& CorpusManifest::at(std::string_view corpus_id) {
  return const_cast<ManifestEntry&>(std::as_const(*this).at(corpus_id));
}

std::string CorpusManifest::to_json() const {
  ordered_json root;
  root["entries"] = ordered_json::array();
  for (const auto& e : entries_) {
    ordered_json j;
    j["corpus_id"] = e.corpus_id;
    j["path"] = e.path.generic_string();
    j["kind"] = to_string(e.kind);
    j["lang"] = e.lang;
    j["sample_count"] = e.sample_count;
    root["entries"].push_back(std::move(j));
  }
  return root.dump(2);
}

CorpusManifest CorpusManifest::from_json(std::string_view text,
                                         const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& ex) {
    throw DataError(std::string("manifest is not valid JSON: ") + ex.what());
  }
  if (!root.is_object() || !root.contains("entries") || !root["entries"].is_array()) {
    throw DataError("manifest must be an object with an 'entries' array");
  }
  static const std::vector<std::string> kKeys = {"corpus_id", "path", "kind", "lang",
                                                 "sample_count"};
  CorpusManifest m;
  for (const auto& j : root["entries"]) {
    if (!j.is_object()) throw DataError("manifest entry must be an object");
    for (const auto& [key, _] : j.items()) {
      if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end()) {
        throw DataError("unknown manifest key '" + key + "'");
      }
    }
    try {
      ManifestEntry e;
      e.corpus_id = j.at("corpus_id").get<std::string>();
      std::filesystem::path p = j.value("path", std::string());
      e.path = (p.empty() || p.is_absolute()) ? p : base_dir / p;
      e.kind = corpus_kind_from_string(j.at("kind").get<std::string>());
      e.lang = j.value("lang", std::string());
      const auto& count = j.value("sample_count", json(0));
      if (!count.is_number_integer() || count.get<std::int64_t>() < 0) {
        throw DataError("sample_count must be a non-negative integer");
      }
      e.sample_count = count.get<std::uint64_t>();
      m.add(std::move(e));
    } catch (const json::exception& ex) {
      throw DataError(std::string("bad manifest entry: ") + ex.what());
    }
  }
  return m;
}

CorpusManifest CorpusManifest::load(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot read manifest " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str(), file.parent_path());
}

void CorpusManifest::save(const std::filesystem::path& file) const {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw IoError("cannot write manifest " + file.string());
  out << to_json() << '\n';
}

// ---------------------------------------------------------------------------
// Record parsing

namespace {

std::optional<std::string> string_field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) return std::nullopt;
  return it->get<std::string>();
}

bool nonblank(std::string_view s) { return !text::trim(s).empty(); }

bool valid_lang(std::string_view lang) {
  return lang == kUnknownLang || is_known_language_code(lang) || is_programming_language(lang);
}

std::optional<Record> parse_document(const json& j, TextKind expected) {
  auto id = string_field(j, "id");
  auto body = string_field(j, "text");
  auto lang = string_field(j, "lang");
  auto kind = string_field(j, "kind");
  if (!id || !body || !lang || !kind) return std::nullopt;
  if (!nonblank(*body) || !valid_lang(*lang)) return std::nullopt;
  Document d{*id, *body, *lang, TextKind::NL, std::nullopt};
  if (*kind == "NL") {
    d.kind = TextKind::NL;
  } else if (*kind == "PL") {
    d.kind = TextKind::PL;
  } else {
    return std::nullopt;
  }
  if (d.kind != expected) return std::nullopt;
  auto pl = string_field(j, "pl_name");
  if (j.contains("pl_name") && !j["pl_name"].is_null() && !pl) return std::nullopt;
  if (d.kind == TextKind::PL) {
    if (!pl || !is_programming_language(*pl)) return std::nullopt;
    d.pl_name = *pl;
  } else if (pl) {
    return std::nullopt;
  }
  return d;
}

std::optional<PairModality> modality_field(const json& j) {
  auto m = string_field(j, "modality");
  if (!m) return std::nullopt;
  if (*m == "NL_NL") return PairModality::NL_NL;
  if (*m == "NL_PL") return PairModality::NL_PL;
  return std::nullopt;
}

std::optional<ParallelPair> parse_pair(const json& j) {
  auto id = string_field(j, "id");
  auto src = string_field(j, "src");
  auto src_lang = string_field(j, "src_lang");
  auto tgt = string_field(j, "tgt");
  auto tgt_lang = string_field(j, "tgt_lang");
  auto modality = modality_field(j);
  if (!id || !src || !src_lang || !tgt || !tgt_lang || !modality) return std::nullopt;
  if (!nonblank(*src) || !nonblank(*tgt)) return std::nullopt;
  ParallelPair p{*id, *src, *src_lang, *tgt, *tgt_lang, *modality};
  const bool src_pl = is_programming_language(p.source_lang);
  const bool tgt_pl = is_programming_language(p.target_lang);
  if (p.modality == PairModality::NL_PL) {
    if (src_pl == tgt_pl) return std::nullopt;
  } else if (src_pl || tgt_pl || !is_known_language_code(p.source_lang) ||
             !is_known_language_code(p.target_lang)) {
    return std::nullopt;
  }
  return p;
}

std::optional<CodeDoc> parse_codedoc(const json& j) {
  auto id = string_field(j, "id");
  auto code = string_field(j, "code");
  auto doc = string_field(j, "docstring");
  auto pl = string_field(j, "pl_name");
  if (!id || !code || !doc || !pl) return std::nullopt;
  // Records in parallel corpora need both sides.
  if (!nonblank(*code) || !nonblank(*doc) || !is_programming_language(*pl)) return std::nullopt;
  CodeDoc c{*id, *code, *doc, *pl, std::string(kTextLabel), std::nullopt};
  if (auto lang = string_field(j, "nl_lang")) c.nl_lang = *lang;
  if (auto it = j.find("nl_conf"); it != j.end() && !it->is_null()) {
    if (!it->is_number()) return std::nullopt;
    const double conf = it->get<double>();
    if (!(conf >= 0.0 && conf <= 1.0)) return std::nullopt;
    c.nl_confidence = conf;
  }
  if (c.nl_lang != kTextLabel && !c.nl_confidence) return std::nullopt;
  return c;
}

std::optional<CodeDoc> pair_as_codedoc(const ParallelPair& p) {
  if (p.modality != PairModality::NL_PL) return std::nullopt;
  const bool src_pl = is_programming_language(p.source_lang);
  CodeDoc c;
  c.id = p.id;
  c.code = src_pl ? p.source_text : p.target_text;
  c.docstring = src_pl ? p.target_text : p.source_text;
  c.pl_name = src_pl ? p.source_lang : p.target_lang;
  const std::string& nl = src_pl ? p.target_lang : p.source_lang;
  if (nl != kTextLabel && nl != kUnknownLang) {
    c.nl_lang = nl;
    c.nl_confidence = 1.0;
  }
  return c;
}

}  // namespace

std::optional<Record> parse_record(std::string_view line, CorpusKind kind) {
  json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  switch (kind) {
    case CorpusKind::NlMono: return parse_document(j, TextKind::NL);
    case CorpusKind::PlMono: return parse_document(j, TextKind::PL);
    case CorpusKind::NlParallel: {
      auto p = parse_pair(j);
      if (!p || p->modality != PairModality::NL_NL) return std::nullopt;
      return *p;
    }
    case CorpusKind::NlPlParallel: {
      if (j.contains("code")) {
        auto c = parse_codedoc(j);
        if (!c) return std::nullopt;
        return *c;
      }
      auto p = parse_pair(j);
      if (!p) return std::nullopt;
      auto c = pair_as_codedoc(*p);
      if (!c) return std::nullopt;
      return *c;
    }
  }
  return std::nullopt;
}

std::string record_to_json(const Record& rec) {
  ordered_json j;
  std::visit(
      [&](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        j["id"] = r.id;
        if constexpr (std::is_same_v<T, Document>) {
          j["text"] = r.text;
          j["lang"] = r.lang;
          j["kind"] = r.kind == TextKind::NL ? "NL" : "PL";
          if (r.pl_name) j["pl_name"] = *r.pl_name;
        } else if constexpr (std::is_same_v<T, ParallelPair>) {
          j["src"] = r.source_text;
          j["src_lang"] = r.source_lang;
          j["tgt"] = r.target_text;
          j["tgt_lang"] = r.target_lang;
          j["modality"] = r.modality == PairModality::NL_NL ? "NL_NL" : "NL_PL";
        } else {
          j["code"] = r.code;
          j["docstring"] = r.docstring;
          j["pl_name"] = r.pl_name;
          j["nl_lang"] = r.nl_lang;
          if (r.nl_confidence) j["nl_conf"] = *r.nl_confidence;
        }
      },
      rec);
  return j.dump();
}

const std::string& record_id(const Record& rec) {
  return std::visit([](const auto& r) -> const std::string& { return r.id; }, rec);
}

// ---------------------------------------------------------------------------
// Streaming ingestion

CorpusReader::CorpusReader(const std::filesystem::path& path, CorpusKind kind)
    : path_(path), kind_(kind), in_(path, std::ios::binary) {
  if (!in_) throw IoError("cannot read corpus " + path.string());
}

std::optional<Record> CorpusReader::next() {
  if (finished_) return std::nullopt;
  std::string line;
  while (std::getline(in_, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    ++report_.lines;
    if (!seen_lines_.insert(fnv1a64(line)).second) ++report_.duplicate_lines;
    if (auto rec = parse_record(line, kind_)) {
      ++report_.records;
      return rec;
    }
    ++report_.malformed;
  }
  if (in_.bad()) throw IoError("read error in corpus " + path_.string());
  finished_ = true;
  if (report_.lines > 0 && static_cast<double>(report_.malformed) >
                               kMaxMalformedFraction * static_cast<double>(report_.lines)) {
    throw DataError("corpus rejected: " + std::to_string(report_.malformed) + " of " +
                    std::to_string(report_.lines) + " lines malformed in " + path_.string());
  }
  return std::nullopt;
}

std::vector<Record> ingest_file(const std::filesystem::path& path, CorpusKind kind,
                                IngestReport* report) {
  CorpusReader reader(path, kind);
  std::vector<Record> out;
  while (auto rec = reader.next()) out.push_back(std::move(*rec));
  if (report) *report = reader.report();
  return out;
}

std::vector<Record> ingest(CorpusManifest& manifest, std::string_view corpus_id,
                           IngestReport* report) {
  ManifestEntry& entry = manifest.at(corpus_id);
  auto records = ingest_file(entry.path, entry.kind, report);
  entry.sample_count = records.size();
  return records;
}

// ---------------------------------------------------------------------------
// Leakage scrubbing

namespace {

struct NormalizedText {
  std::string text;
  std::vector<std::size_t> origin;  // byte offset in the source for each byte of `text`
};

// Collapses whitespace runs to one space, keeping a map back to the source.
NormalizedText normalize_with_map(std::string_view s) {
  NormalizedText n;
  n.text.reserve(s.size());
  n.origin.reserve(s.size());
  bool in_space = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (text::is_space(s[i])) {
      if (!in_space) {
        n.text.push_back(' ');
        n.origin.push_back(i);
      }
      in_space = true;
      continue;
    }
    in_space = false;
    n.text.push_back(s[i]);
    n.origin.push_back(i);
  }
  return n;
}

// Non-overlapping source byte ranges whose normalized form equals `needle`.
std::vector<std::pair<std::size_t, std::size_t>> find_normalized(std::string_view haystack,
                                                                 std::string_view docstring) {
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  const std::string needle = text::normalize_whitespace(docstring);
  if (needle.empty()) return ranges;
  const NormalizedText hay = normalize_with_map(haystack);
  std::size_t pos = 0;
  while ((pos = hay.text.find(needle, pos)) != std::string::npos) {
    const std::size_t last = pos + needle.size() - 1;
    ranges.emplace_back(hay.origin[pos], hay.origin[last] + 1);
    pos += needle.size();
  }
  return ranges;
}

}  // namespace

std::size_t leakage_occurrences(const CodeDoc& doc) {
  return find_normalized(doc.code, doc.docstring).size();
}

CodeDoc scrub_leakage(const CodeDoc& doc, ScrubDirection direction, double coin) {
  if (direction == ScrubDirection::NL_to_PL && !(coin < 0.5)) return doc;
  const auto ranges = find_normalized(doc.code, doc.docstring);
  if (ranges.empty()) return doc;
  CodeDoc out = doc;
  out.code.clear();
  std::size_t cursor = 0;
  for (const auto& [begin, end] : ranges) {
    out.code.append(doc.code, cursor, begin - cursor);
    out.code.append(kRemovedPlaceholder);
    cursor = end;
  }
  out.code.append(doc.code, cursor, std::string::npos);
  return out;
}

std::string label_policy(const CodeDoc& doc, double coin, const LabelPolicyOptions& opts) {
  if (doc.nl_lang == kTextLabel || !doc.nl_confidence) return std::string(kTextLabel);
  if (!(*doc.nl_confidence > opts.confidence_threshold)) return std::string(kTextLabel);
  auto name = language_display_name(doc.nl_lang);
  if (!name) return std::string(kTextLabel);
  if (opts.english_always_text && *name == "English") return std::string(kTextLabel);
  if (coin < opts.keep_probability) return *name;
  return std::string(kTextLabel);
}

// ---------------------------------------------------------------------------
// Statistics

std::vector<StatsRow> stats(const CorpusManifest& manifest) {
  if (manifest.empty()) throw InvalidInput("manifest has no corpora");
  std::map<CorpusKind, std::uint64_t> totals;
  for (const auto& e : manifest.entries()) totals[e.kind] += e.sample_count;
  for (const auto& [kind, total] : totals) {
    if (total == 0) {
      throw DataError("corpus pool " + std::string(to_string(kind)) + " has no records");
    }
  }
  std::vector<StatsRow> rows;
  rows.reserve(manifest.entries().size());
  for (const auto& e : manifest.entries()) {
    const double pct = 100.0 * static_cast<double>(e.sample_count) /
                       static_cast<double>(totals[e.kind]);
    rows.push_back({e.corpus_id, e.kind, e.sample_count, pct});
  }
  return rows;
}

}  // namespace ecpt
