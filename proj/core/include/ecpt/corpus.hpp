#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <variant>
#include <vector>

namespace ecpt {

enum class TextKind { NL, PL };

/// Monolingual text or code.
struct Document {
  std::string id;
  std::string text;
  std::string lang;  // registry code, PL name, or "unknown"
  TextKind kind = TextKind::NL;
  std::optional<std::string> pl_name;  // set iff kind == PL

  bool operator==(const Document&) const = default;
};

enum class PairModality { NL_NL, NL_PL };

struct ParallelPair {
  std::string id;
  std::string source_text;
  std::string source_lang;
  std::string target_text;
  std::string target_lang;
  PairModality modality = PairModality::NL_NL;

  bool operator==(const ParallelPair&) const = default;
};

/// Code paired with its docstring (CodeSearchNet-style).
struct CodeDoc {
  std::string id;
  std::string code;
  std::string docstring;
  std::string pl_name;
  std::string nl_lang = "text";
  std::optional<double> nl_confidence;

  bool operator==(const CodeDoc&) const = default;
};

using Record = std::variant<Document, ParallelPair, CodeDoc>;

/// The four corpus pools. Monolingual pools feed span corruption, parallel
/// pools feed translation; NL_PL corpora belong to the PL modality.
enum class CorpusKind { NlMono, PlMono, NlParallel, NlPlParallel };
enum class Modality { NL, PL };

std::string_view to_string(CorpusKind kind);
CorpusKind corpus_kind_from_string(std::string_view s);
Modality modality_of(CorpusKind kind);
bool is_parallel(CorpusKind kind);
std::string_view to_string(Modality m);

struct ManifestEntry {
  std::string corpus_id;
  std::filesystem::path path;
  CorpusKind kind = CorpusKind::NlMono;
  std::string lang;  // "en", "en-fr", "Go", ...
  std::uint64_t sample_count = 0;

  bool operator==(const ManifestEntry&) const = default;
};

/// Ordered list of corpora. Corpus ids are unique.
class CorpusManifest {
 public:
  CorpusManifest() = default;
  explicit CorpusManifest(std::vector<ManifestEntry> entries);

  const std::vector<ManifestEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  void add(ManifestEntry entry);
  const ManifestEntry& at(std::string_view corpus_id) const;
  ManifestEntry& at(std::string_view corpus_id);
  const ManifestEntry* find(std::string_view corpus_id) const;

  /// Reads a manifest JSON file. Relative corpus paths are resolved against
  /// the manifest's directory.
  static CorpusManifest load(const std::filesystem::path& file);
  void save(const std::filesystem::path& file) const;

  std::string to_json() const;
  static CorpusManifest from_json(std::string_view json, const std::filesystem::path& base_dir);

 private:
  std::vector<ManifestEntry> entries_;
};

struct IngestReport {
  std::uint64_t lines = 0;  // non-blank lines seen
  std::uint64_t records = 0;
  std::uint64_t malformed = 0;
  std::uint64_t duplicate_lines = 0;
};

/// Fraction of malformed lines above which a corpus is rejected.
inline constexpr double kMaxMalformedFraction = 0.10;

/// Streaming JSONL reader for one corpus. Yields validated records in file
/// order; malformed lines are counted and skipped. Rejection for too many
/// malformed lines is raised when the end of the file is reached.
class CorpusReader {
 public:
  CorpusReader(const std::filesystem::path& path, CorpusKind kind);

  /// Returns nullopt at end of stream. Throws DataError when the corpus is
  /// rejected.
  std::optional<Record> next();

  const IngestReport& report() const { return report_; }
  CorpusKind kind() const { return kind_; }

 private:
  std::filesystem::path path_;
  CorpusKind kind_;
  std::ifstream in_;
  IngestReport report_;
  std::unordered_set<std::uint64_t> seen_lines_;
  bool finished_ = false;
};

/// Parses one JSONL line for a corpus kind; nullopt when malformed.
std::optional<Record> parse_record(std::string_view line, CorpusKind kind);
std::string record_to_json(const Record& rec);
const std::string& record_id(const Record& rec);

/// Reads a whole corpus file.
std::vector<Record> ingest_file(const std::filesystem::path& path, CorpusKind kind,
                                IngestReport* report = nullptr);

/// Reads the corpus registered under `corpus_id` and updates its sample count.
std::vector<Record> ingest(CorpusManifest& manifest, std::string_view corpus_id,
                           IngestReport* report = nullptr);

enum class ScrubDirection { PL_to_NL, NL_to_PL };

inline constexpr std::string_view kRemovedPlaceholder = "<|removed|>";

/// Number of whitespace-normalized occurrences of the docstring in the code.
std::size_t leakage_occurrences(const CodeDoc& doc);

/// Replaces docstring occurrences inside the code with "<|removed|>".
/// PL_to_NL always scrubs; NL_to_PL scrubs iff coin < 0.5.
CodeDoc scrub_leakage(const CodeDoc& doc, ScrubDirection direction, double coin);

struct LabelPolicyOptions {
  double confidence_threshold = 0.8;
  double keep_probability = 0.5;
  /// When set, English identifications are always labelled "text".
  bool english_always_text = false;
};

/// Natural-language label used in translation prompts for a code docstring.
std::string label_policy(const CodeDoc& doc, double coin, const LabelPolicyOptions& opts = {});

struct StatsRow {
  std::string corpus_id;
  CorpusKind kind;
  std::uint64_t sample_count;
  double percentage;  // within the corpus kind's pool
};

/// Share of each corpus within its pool. Percentages sum to 100 per pool.
std::vector<StatsRow> stats(const CorpusManifest& manifest);

}  // namespace ecpt
