#include "ecpt/pipeline.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "ecpt/batch_io.hpp"
#include "ecpt/error.hpp"

namespace ecpt {

namespace fs = std::filesystem;

void PipelineConfig::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidInput("alpha must be in (0, 1]");
  if (max_len != 512 && max_len != 1024) throw InvalidInput("max_len must be 512 or 1024");
  if (!(task_mix >= 0.0 && task_mix <= 1.0)) throw InvalidInput("task_mix must be in [0, 1]");
  metrics.validate();
}

void PipelineConfig::apply_env() {
  const char* v = std::getenv(kSeedEnvVar);
  if (!v) return;
  std::string s(v);
  try {
    std::size_t used = 0;
    const auto seed = std::stoull(s, &used, 10);
    if (used != s.size() || s.empty() || s[0] == '-') throw std::invalid_argument(s);
    this->seed = seed;
  } catch (const std::exception&) {
    throw InvalidInput(std::string(kSeedEnvVar) + " is not an unsigned integer: '" + s + "'");
  }
}

std::string PipelineConfig::to_json() const {
  nlohmann::ordered_json j;
  j["manifest"] = manifest.generic_string();
  j["vocab"] = vocab.generic_string();
  j["alpha"] = alpha;
  j["seed"] = seed;
  j["max_len"] = max_len;
  j["task_mix"] = task_mix;
  j["sep_mode"] = sep_mode;
  j["num_examples"] = num_examples;
  j["metrics"] = nlohmann::ordered_json::parse(metrics.to_json());
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  if (!plan_path.empty()) out["plan"] = plan_path.generic_string();
  if (!jsonl_path.empty()) out["jsonl"] = jsonl_path.generic_string();
  if (!binary_path.empty()) out["binary"] = binary_path.generic_string();
  if (!report_path.empty()) out["report"] = report_path.generic_string();
  j["outputs"] = std::move(out);
  return j.dump(2);
}

PipelineConfig PipelineConfig::from_json(std::string_view text, const fs::path& base_dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw InvalidInput("config must be a JSON object");
  auto path = [&](const nlohmann::json& v) {
    fs::path p = v.get<std::string>();
    return p.is_relative() && !p.empty() ? base_dir / p : p;
  };
  PipelineConfig c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "manifest") c.manifest = path(value);
      else if (key == "vocab") c.vocab = path(value);
      else if (key == "alpha") c.alpha = value.get<double>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "max_len") c.max_len = value.get<std::size_t>();
      else if (key == "task_mix") c.task_mix = value.get<double>();
      else if (key == "sep_mode") c.sep_mode = value.get<bool>();
      else if (key == "num_examples") c.num_examples = value.get<std::uint64_t>();
      else if (key == "metrics") c.metrics = metrics::MetricConfig::from_json(value.dump());
      else if (key == "outputs") {
        if (!value.is_object()) throw InvalidInput("config: outputs must be an object");
        for (const auto& [okey, ovalue] : value.items()) {
          if (okey == "plan") c.plan_path = path(ovalue);
          else if (okey == "jsonl") c.jsonl_path = path(ovalue);
          else if (okey == "binary") c.binary_path = path(ovalue);
          else if (okey == "report") c.report_path = path(ovalue);
          else throw InvalidInput("config: unknown key 'outputs." + okey + "'");
        }
      } else {
        throw InvalidInput("config: unknown key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

PipelineConfig PipelineConfig::load(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open config " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str(), file.parent_path());
}

StreamOptions PipelineConfig::stream_options() const {
  StreamOptions o;
  o.pack.max_len = max_len;
  o.pack.target_cap = max_len;
  o.sep_mode = sep_mode;
  return o;
}

StreamPlan resolve_plan(const PipelineConfig& config, const CorpusManifest& manifest) {
  if (!config.plan_path.empty() && fs::exists(config.plan_path)) {
    StreamPlan p = StreamPlan::load(config.plan_path);
    p.seed = config.seed;
    return p;
  }
  return plan_from_manifest(manifest, config.alpha, config.task_mix, config.seed,
                            std::max<std::uint64_t>(1, config.num_examples));
}

std::vector<PretrainExample> build_examples(const StreamPlan& plan,
                                            const std::vector<LoadedCorpus>& corpora,
                                            std::shared_ptr<const SubwordVocabulary> vocab,
                                            const StreamOptions& opts, std::uint64_t n,
                                            unsigned workers) {
  workers = std::max(1u, workers);
  if (n < workers) workers = static_cast<unsigned>(std::max<std::uint64_t>(1, n));
  std::vector<std::vector<PretrainExample>> shards(workers);
  std::vector<std::exception_ptr> errors(workers);
  auto run = [&](unsigned k) {
    try {
      ExampleStream stream(plan, corpora, vocab, opts, k, workers);
      for (std::uint64_t i = k; i < n; i += workers) shards[k].push_back(stream.next());
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < workers; ++k) pool.emplace_back(run, k);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<PretrainExample> out;
  out.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) out.push_back(std::move(shards[i % workers][i / workers]));
  return out;
}

BuildSummary summarize(const std::vector<PretrainExample>& examples, std::uint64_t plan_digest) {
  BuildSummary s;
  s.examples = examples.size();
  s.plan_digest = plan_digest;
  for (const auto& ex : examples) {
    ++s.per_task[std::string(to_string(ex.task))];
    ++s.per_modality[ex.meta.stream_index % 2 == 0 ? "NL" : "PL"];
    ++s.per_corpus[ex.corpus_id];
  }
  return s;
}

namespace {

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    body(out);
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
  }
  fs::rename(tmp, path);
}

}  // namespace

BuildSummary run_build(const PipelineConfig& config, unsigned workers, bool dry_run) {
  config.validate();
  if (config.manifest.empty()) throw InvalidInput("config has no manifest");
  if (config.vocab.empty()) throw InvalidInput("config has no vocab");
  if (!fs::exists(config.vocab)) throw InvalidInput("vocabulary not found: " + config.vocab.string());
  const auto manifest = CorpusManifest::load(config.manifest);
  if (manifest.empty()) throw InvalidInput("manifest has no corpora");
  auto vocab = std::make_shared<const SubwordVocabulary>(SubwordVocabulary::load(config.vocab));
  const StreamPlan plan = resolve_plan(config, manifest);
  const auto corpora = ExampleStream::load_corpora(plan, manifest);
  const auto examples = build_examples(plan, corpora, vocab, config.stream_options(),
                                       config.num_examples, workers);
  if (!dry_run) {
    if (!config.plan_path.empty() && !fs::exists(config.plan_path)) {
      write_file(config.plan_path, [&](std::ostream& out) { out << plan.to_json() << "\n"; });
    }
    if (!config.jsonl_path.empty()) {
      write_file(config.jsonl_path, [&](std::ostream& out) { write_jsonl(out, examples); });
    }
    if (!config.binary_path.empty()) {
      write_file(config.binary_path, [&](std::ostream& out) { write_binary(out, examples); });
    }
  }
  return summarize(examples, plan.digest());
}

}  // namespace ecpt
