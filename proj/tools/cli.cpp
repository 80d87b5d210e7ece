#include "cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ecpt/codegraph.hpp"
#include "ecpt/corpus.hpp"
#include "ecpt/error.hpp"
#include "ecpt/langid.hpp"
#include "ecpt/languages.hpp"
#include "ecpt/metrics.hpp"
#include "ecpt/pipeline.hpp"
#include "ecpt/sampler.hpp"
#include "ecpt/text.hpp"
#include "ecpt/tokenizer.hpp"

namespace ecpt::cli {

namespace fs = std::filesystem;

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

std::vector<std::string> read_input_lines(const std::string& path) {
  if (path.empty() || path == "-") {
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(std::cin, line)) lines.push_back(line);
    return lines;
  }
  return read_lines(path);
}

void write_text(const fs::path& path, const std::string& body) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << body;
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto t = std::string(text::trim(item));
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

struct Common {
  std::string config;
  std::string manifest;
  std::string vocab;
  double alpha = 0;
  std::uint64_t seed = 0;
  std::uint64_t num_examples = 0;
  double task_mix = 0;
  std::size_t max_len = 0;
  bool sep_mode = false;
  bool dry_run = false;
  CLI::Option* alpha_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* n_opt = nullptr;
  CLI::Option* mix_opt = nullptr;
  CLI::Option* len_opt = nullptr;
  CLI::Option* sep_opt = nullptr;

  void add_config(CLI::App* app) {
    app->add_option("-c,--config", config, "Pipeline config JSON");
  }
  void add_manifest(CLI::App* app) {
    app->add_option("--manifest", manifest, "Corpus manifest JSON (overrides config)");
  }
  void add_plan_options(CLI::App* app) {
    alpha_opt = app->add_option("--alpha", alpha, "Rescaling exponent");
    seed_opt = app->add_option("--seed", seed, "Global seed");
    mix_opt = app->add_option("--task-mix", task_mix, "Monolingual share within a modality");
    n_opt = app->add_option("-n,--num-examples", num_examples, "Examples to build");
  }
  void add_dry_run(CLI::App* app) {
    app->add_flag("--dry-run", dry_run, "Do everything except writing files");
  }

  PipelineConfig resolve() const {
    PipelineConfig c = config.empty() ? PipelineConfig{} : PipelineConfig::load(config);
    c.apply_env();
    if (!manifest.empty()) c.manifest = manifest;
    if (!vocab.empty()) c.vocab = vocab;
    if (alpha_opt && alpha_opt->count()) c.alpha = alpha;
    if (seed_opt && seed_opt->count()) c.seed = seed;
    if (mix_opt && mix_opt->count()) c.task_mix = task_mix;
    if (n_opt && n_opt->count()) c.num_examples = num_examples;
    if (len_opt && len_opt->count()) c.max_len = max_len;
    if (sep_opt && sep_opt->count()) c.sep_mode = sep_mode;
    c.validate();
    return c;
  }
};

CorpusManifest load_manifest(const PipelineConfig& c) {
  if (c.manifest.empty()) throw InvalidInput("no manifest given (use --manifest or a config)");
  return CorpusManifest::load(c.manifest);
}

int cmd_stats(const Common& opts, std::ostream& out) {
  const auto config = opts.resolve();
  const auto rows = stats(load_manifest(config));
  std::size_t width = 9;
  for (const auto& r : rows) width = std::max(width, r.corpus_id.size());
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-*s  %-5s  %14s  %8s\n", static_cast<int>(width), "corpus_id",
                "kind", "samples", "percent");
  out << buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-*s  %-5s  %14llu  %7.2f%%\n", static_cast<int>(width),
                  r.corpus_id.c_str(), std::string(to_string(r.kind)).c_str(),
                  static_cast<unsigned long long>(r.sample_count), r.percentage);
    out << buf;
  }
  return kOk;
}

int cmd_plan(const Common& opts, const std::string& out_path, std::ostream& out) {
  const auto config = opts.resolve();
  const auto manifest = load_manifest(config);
  const auto plan = plan_from_manifest(manifest, config.alpha, config.task_mix, config.seed,
                                       std::max<std::uint64_t>(1, config.num_examples));
  std::map<std::string, double> raw;
  for (Modality m : {Modality::NL, Modality::PL}) {
    std::uint64_t total = 0;
    for (const auto& e : manifest.entries()) {
      if (modality_of(e.kind) == m) total += e.sample_count;
    }
    for (const auto& e : manifest.entries()) {
      if (modality_of(e.kind) == m && total > 0) {
        raw[e.corpus_id] = static_cast<double>(e.sample_count) / static_cast<double>(total);
      }
    }
  }
  out << "alpha " << config.alpha << "  task_mix " << config.task_mix << "  seed " << config.seed
      << "\n";
  for (const auto* side : {&plan.nl, &plan.pl}) {
    const char* m = side == &plan.nl ? "NL" : "PL";
    for (const auto& e : *side) {
      out << m << "  " << e.corpus_id << "  p=" << fmt("%.6f", raw[e.corpus_id])
          << "  q=" << fmt("%.6f", e.probability) << "\n";
    }
  }
  fs::path target = out_path.empty() ? config.plan_path : fs::path(out_path);
  if (!target.empty() && !opts.dry_run) {
    write_text(target, plan.to_json() + "\n");
    out << "wrote " << target.string() << "\n";
  }
  return kOk;
}

int cmd_build(const Common& opts, unsigned workers, const std::string& jsonl,
              const std::string& binary, std::ostream& out) {
  auto config = opts.resolve();
  if (!jsonl.empty()) config.jsonl_path = jsonl;
  if (!binary.empty()) config.binary_path = binary;
  const auto summary = run_build(config, workers, opts.dry_run);
  out << "examples " << summary.examples << "\n";
  for (const auto& [task, n] : summary.per_task) out << "task " << task << " " << n << "\n";
  for (const auto& [m, n] : summary.per_modality) out << "modality " << m << " " << n << "\n";
  for (const auto& [c, n] : summary.per_corpus) out << "corpus " << c << " " << n << "\n";
  char digest[32];
  std::snprintf(digest, sizeof digest, "%016llx",
                static_cast<unsigned long long>(summary.plan_digest));
  out << "plan_digest " << digest << "\n";
  if (opts.dry_run) out << "dry run: nothing written\n";
  return kOk;
}

struct EvalArgs {
  std::string hyp, ref, pairs, metrics = "bleu,chrf,rouge_l,exact_match", out_path;
  unsigned threads = 1;
  bool dump_ast = false, dump_dfg = false;
};

int cmd_eval(const Common& opts, const EvalArgs& a, std::ostream& out) {
  const auto config = opts.resolve();
  std::vector<std::string> hyps, refs;
  if (!a.pairs.empty()) {
    std::size_t line_no = 0;
    for (const auto& line : read_lines(a.pairs)) {
      ++line_no;
      if (text::trim(line).empty()) continue;
      try {
        const auto j = nlohmann::json::parse(line);
        hyps.push_back(j.at("hyp").get<std::string>());
        refs.push_back(j.at("ref").get<std::string>());
      } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(a.pairs + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
  } else {
    if (a.hyp.empty() || (a.ref.empty() && !a.dump_ast && !a.dump_dfg)) {
      throw InvalidInput("eval needs --hyp and --ref, or --pairs");
    }
    for (auto& l : read_lines(a.hyp)) hyps.push_back(text::unescape_line(l));
    if (!a.ref.empty()) {
      for (auto& l : read_lines(a.ref)) refs.push_back(text::unescape_line(l));
    }
  }
  if (a.dump_ast || a.dump_dfg) {
    for (const auto& h : hyps) {
      const auto r = code::parse(h);
      if (!r.ok) {
        out << "error " << r.error_position->line << ":" << r.error_position->column << " "
            << r.message << "\n";
        continue;
      }
      if (a.dump_ast) out << code::to_sexpr(*r.tree) << "\n";
      if (a.dump_dfg) out << code::extract_dataflow(*r.tree).to_json() << "\n";
    }
    return kOk;
  }
  const auto names = split_list(a.metrics);
  const auto report = metrics::evaluate(hyps, refs, names, config.metrics, a.threads);
  const auto json = report.to_json() + "\n";
  fs::path target = a.out_path.empty() ? config.report_path : fs::path(a.out_path);
  if (target.empty()) {
    out << json;
  } else {
    for (const auto& [k, v] : report.corpus) out << k << " " << fmt("%.4f", v) << "\n";
    if (!opts.dry_run) write_text(target, json);
  }
  return kOk;
}

int cmd_prompts(const std::string& task, const std::string& src, const std::string& tgt,
                std::ostream& out) {
  if (task == "translate") {
    if (src.empty() || tgt.empty()) throw InvalidInput("translate needs --src and --tgt");
    out << translation_prompt(src, tgt);
  } else if (task == "repair") {
    out << repair_prompt();
  } else {
    throw InvalidInput("unknown task '" + task + "' (expected translate or repair)");
  }
  return kOk;
}

int cmd_tokenize(const Common& opts, const std::string& mode, const std::string& in_path,
                 const std::string& out_path, std::ostream& out) {
  const auto config = opts.resolve();
  if (config.vocab.empty()) throw InvalidInput("no vocabulary given (use --vocab or a config)");
  if (!fs::exists(config.vocab)) throw InvalidInput("vocabulary not found: " + config.vocab.string());
  const auto vocab = SubwordVocabulary::load(config.vocab);
  std::ostringstream body;
  for (const auto& line : read_input_lines(in_path)) {
    if (mode == "encode") {
      const auto seq = encode(text::unescape_line(line), vocab);
      for (std::size_t i = 0; i < seq.ids.size(); ++i) body << (i ? " " : "") << seq.ids[i];
      body << "\n";
    } else {
      std::vector<TokenId> ids;
      std::istringstream ss(line);
      long long v = 0;
      while (ss >> v) {
        if (v < 0) throw InvalidInput("negative token id");
        ids.push_back(static_cast<TokenId>(v));
      }
      if (!ss.eof()) throw InvalidInput("malformed id line: " + line);
      body << text::escape_line(decode(ids, vocab)) << "\n";
    }
  }
  if (out_path.empty()) out << body.str();
  else if (!opts.dry_run) write_text(out_path, body.str());
  return kOk;
}

int cmd_identify(const std::string& text_arg, const std::string& in_path, std::ostream& out) {
  std::vector<std::string> inputs;
  if (!text_arg.empty()) inputs.push_back(text_arg);
  else for (auto& l : read_input_lines(in_path)) inputs.push_back(text::unescape_line(l));
  const auto& profiles = builtin_profiles();
  for (const auto& t : inputs) {
    const auto g = identify_lang(t, profiles);
    const bool sure = g.confidence > kLangIdThreshold;
    out << (sure ? g.lang : std::string(kTextLabel)) << "\t" << g.lang << "\t"
        << fmt("%.4f", g.confidence) << "\n";
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cross-lingual NL/PL pre-training data pipeline and evaluation toolkit", "ecpt"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "0.3.0");

  Common common;

  auto* stats_cmd = app.add_subcommand("stats", "Per-corpus sample counts and shares");
  common.add_config(stats_cmd);
  common.add_manifest(stats_cmd);

  std::string plan_out;
  auto* plan_cmd = app.add_subcommand("plan", "Compute the rescaled sampling plan");
  common.add_config(plan_cmd);
  common.add_manifest(plan_cmd);
  common.add_plan_options(plan_cmd);
  common.add_dry_run(plan_cmd);
  plan_cmd->add_option("-o,--out", plan_out, "Plan JSON output");

  unsigned workers = 1;
  std::string jsonl, binary;
  auto* build_cmd = app.add_subcommand("build", "Build pre-training examples");
  common.add_config(build_cmd);
  common.add_manifest(build_cmd);
  common.add_plan_options(build_cmd);
  common.add_dry_run(build_cmd);
  build_cmd->add_option("--vocab", common.vocab, "Vocabulary file (overrides config)");
  common.len_opt = build_cmd->add_option("--max-len", common.max_len, "512 or 1024");
  common.sep_opt = build_cmd->add_flag("--sep-mode", common.sep_mode, "Append SEP + sentinel to PTLM inputs");
  build_cmd->add_option("-w,--workers", workers, "Shard count")->check(CLI::Range(1u, 256u));
  build_cmd->add_option("--jsonl", jsonl, "JSONL output");
  build_cmd->add_option("--binary", binary, "Binary output");

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Score hypotheses against references");
  common.add_config(eval_cmd);
  common.add_dry_run(eval_cmd);
  eval_cmd->add_option("--hyp", eval_args.hyp, "Hypotheses, one per line");
  eval_cmd->add_option("--ref", eval_args.ref, "References, one per line");
  eval_cmd->add_option("--pairs", eval_args.pairs, "JSONL with hyp and ref fields");
  eval_cmd->add_option("-m,--metrics", eval_args.metrics, "Comma-separated metric names");
  eval_cmd->add_option("-o,--out", eval_args.out_path, "Report output");
  eval_cmd->add_option("-j,--threads", eval_args.threads, "Scoring threads")
      ->check(CLI::Range(1u, 256u));
  eval_cmd->add_flag("--dump-ast", eval_args.dump_ast, "Print the syntax tree of each hypothesis");
  eval_cmd->add_flag("--dump-dfg", eval_args.dump_dfg, "Print the dataflow graph of each hypothesis");

  std::string task, src, tgt;
  auto* prompts_cmd = app.add_subcommand("prompts", "Print a finetuning prompt prefix");
  prompts_cmd->add_option("task", task, "translate or repair")->required();
  prompts_cmd->add_option("--src", src, "Source language");
  prompts_cmd->add_option("--tgt", tgt, "Target language");

  std::string mode, in_path, out_path;
  auto* tok_cmd = app.add_subcommand("tokenize", "Encode text lines or decode id lines");
  common.add_config(tok_cmd);
  common.add_dry_run(tok_cmd);
  tok_cmd->add_option("mode", mode, "encode or decode")
      ->required()
      ->check(CLI::IsMember({"encode", "decode"}));
  tok_cmd->add_option("--vocab", common.vocab, "Vocabulary file");
  tok_cmd->add_option("-i,--in", in_path, "Input file (default stdin)");
  tok_cmd->add_option("-o,--out", out_path, "Output file (default stdout)");

  std::string text_arg, lang_in;
  auto* lang_cmd = app.add_subcommand("identify-lang", "Guess the natural language of text");
  lang_cmd->add_option("--text", text_arg, "Text to classify");
  lang_cmd->add_option("-i,--in", lang_in, "One text per line (default stdin)");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (stats_cmd->parsed()) return cmd_stats(common, out);
    if (plan_cmd->parsed()) return cmd_plan(common, plan_out, out);
    if (build_cmd->parsed()) return cmd_build(common, workers, jsonl, binary, out);
    if (eval_cmd->parsed()) return cmd_eval(common, eval_args, out);
    if (prompts_cmd->parsed()) return cmd_prompts(task, src, tgt, out);
    if (tok_cmd->parsed()) return cmd_tokenize(common, mode, in_path, out_path, out);
    if (lang_cmd->parsed()) return cmd_identify(text_arg, lang_in, out);
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}

}  // namespace ecpt::cli
