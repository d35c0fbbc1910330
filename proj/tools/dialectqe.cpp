#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dialectqe/errors.hpp"
#include "dialectqe/runner.hpp"

#ifndef DIALECTQE_VERSION
#define DIALECTQE_VERSION "0.0.0"
#endif

namespace {

namespace fs = std::filesystem;
using namespace dialectqe;

// CLI flags stage into optionals so a config file and command line compose:
// file first, flags win.
struct Overrides {
  std::optional<std::string> dataset, lexicon, base_tokenizer, dialect_corpus;
  std::optional<std::string> assets, guidelines, prompt_kind, mode, embed_input;
  std::optional<std::string> provider_url, model_name, cache_dir, out_dir;
  std::optional<std::string> normalization_order, pooling;
  std::optional<std::size_t> embedding_dim, budget, train_count, test_count;
  std::optional<std::size_t> epochs, batch_size, hidden_dim;
  std::optional<std::size_t> vocab_target, min_pair_freq;
  std::optional<double> learning_rate, temperature, timeout_s;
  std::optional<int> max_retries, concurrency;
  std::optional<bool> tok_toggle, head_toggle, dg_toggle, hidden_layer;
  std::optional<bool> use_system_role, with_timings;
  std::vector<std::uint64_t> seeds;
};

void add_common_options(CLI::App* cmd, std::string& config_path, Overrides& ov) {
  cmd->add_option("-c,--config", config_path, "JSON run-config file");
  cmd->add_option("--dataset", ov.dataset, "dataset file (TSV or JSONL)");
  cmd->add_option("--lexicon", ov.lexicon, "dialect lexicon file");
  cmd->add_option("--base-tokenizer", ov.base_tokenizer, "base tokenizer artifact");
  cmd->add_option("--dialect-corpus", ov.dialect_corpus, "dialect corpus, one sentence per line");
  cmd->add_option("--assets", ov.assets, "prompt asset directory");
  cmd->add_option("--guidelines", ov.guidelines, "annotation guideline asset file");
  cmd->add_option("--prompt-kind", ov.prompt_kind, "plain | ag | dg | dag");
  cmd->add_option("--mode", ov.mode, "generate | regress");
  cmd->add_option("--provider-url", ov.provider_url, "http(s)://... or mock://<seed>");
  cmd->add_option("--model", ov.model_name, "provider model name");
  cmd->add_option("--embedding-dim", ov.embedding_dim, "expected embedding dimension");
  cmd->add_option("--timeout", ov.timeout_s, "provider timeout, seconds");
  cmd->add_option("--max-retries", ov.max_retries, "transport retry count");
  cmd->add_option("--temperature", ov.temperature, "sampling temperature");
  cmd->add_option("--concurrency", ov.concurrency, "in-flight request bound");
  cmd->add_option("--seeds", ov.seeds, "seed list")->delimiter(',');
  cmd->add_option("--budget", ov.budget, "prompt token budget");
  cmd->add_option("--train-count", ov.train_count, "train split size");
  cmd->add_option("--test-count", ov.test_count, "test split size");
  cmd->add_option("--normalization-order", ov.normalization_order,
                  "average_then_z | z_then_average");
  cmd->add_option("--lr", ov.learning_rate, "head learning rate");
  cmd->add_option("--epochs", ov.epochs, "head training epochs");
  cmd->add_option("--batch-size", ov.batch_size, "head training batch size");
  cmd->add_option("--pooling", ov.pooling, "mean | last");
  cmd->add_option("--hidden-dim", ov.hidden_dim, "hidden layer width");
  cmd->add_option("--embed-input", ov.embed_input, "prompt | pair");
  cmd->add_option("--cache", ov.cache_dir, "embedding cache directory");
  cmd->add_option("--out", ov.out_dir, "output directory for reports");
  cmd->add_option("--vocab-target", ov.vocab_target, "dialect tokenizer target vocab size");
  cmd->add_option("--min-pair-freq", ov.min_pair_freq, "dialect tokenizer min pair frequency");
  cmd->add_flag("--dialect-tokenizer,!--no-dialect-tokenizer", ov.tok_toggle,
                "toggle: graft dialect tokens onto the base tokenizer");
  cmd->add_flag("--regression-head,!--no-regression-head", ov.head_toggle,
                "toggle: score with the trained regression head");
  cmd->add_flag("--dg-prompt,!--no-dg-prompt", ov.dg_toggle,
                "toggle: dialect-guided prompt");
  cmd->add_flag("--hidden-layer,!--no-hidden-layer", ov.hidden_layer,
                "head variant with one tanh hidden layer");
  cmd->add_flag("--system-role,!--no-system-role", ov.use_system_role,
                "send the role statement as a system message");
  cmd->add_flag("--with-timings", ov.with_timings,
                "include wall-clock timings in emitted reports");
}

runner::RunConfig assemble(const std::string& config_path, const Overrides& ov) {
  runner::RunConfig cfg;
  if (!config_path.empty()) cfg = runner::load_run_config(config_path);

  auto set = [](auto& dst, const auto& src) { if (src) dst = *src; };
  set(cfg.dataset_path, ov.dataset);
  set(cfg.lexicon_path, ov.lexicon);
  set(cfg.base_tokenizer_path, ov.base_tokenizer);
  set(cfg.dialect_corpus_path, ov.dialect_corpus);
  set(cfg.assets_dir, ov.assets);
  set(cfg.guideline_path, ov.guidelines);
  if (ov.prompt_kind) cfg.kind = promptkit::kind_from_string(*ov.prompt_kind);
  if (ov.mode) cfg.mode = runner::mode_from_string(*ov.mode);
  set(cfg.provider.base_url, ov.provider_url);
  set(cfg.provider.model_name, ov.model_name);
  set(cfg.provider.embedding_dim, ov.embedding_dim);
  set(cfg.provider.timeout_s, ov.timeout_s);
  set(cfg.provider.max_retries, ov.max_retries);
  set(cfg.provider.temperature, ov.temperature);
  set(cfg.provider.concurrency, ov.concurrency);
  if (!ov.seeds.empty()) cfg.seeds = ov.seeds;
  set(cfg.budget, ov.budget);
  set(cfg.train_count, ov.train_count);
  set(cfg.test_count, ov.test_count);
  if (ov.normalization_order)
    cfg.gold_order = corpus::gold_order_from_string(*ov.normalization_order);
  set(cfg.head.learning_rate, ov.learning_rate);
  set(cfg.head.epochs, ov.epochs);
  set(cfg.head.batch_size, ov.batch_size);
  if (ov.pooling) cfg.head.pooling = pooling_from_string(*ov.pooling);
  set(cfg.head.hidden_dim, ov.hidden_dim);
  set(cfg.head.hidden_layer, ov.hidden_layer);
  if (ov.embed_input) {
    if (*ov.embed_input != "prompt" && *ov.embed_input != "pair")
      raise(ErrorKind::config, "--embed-input must be 'prompt' or 'pair'");
    cfg.embed_prompt = *ov.embed_input == "prompt";
  }
  set(cfg.cache_dir, ov.cache_dir);
  set(cfg.out_dir, ov.out_dir);
  set(cfg.dialect_tokenizer_spec.target_vocab_size, ov.vocab_target);
  set(cfg.dialect_tokenizer_spec.min_pair_frequency, ov.min_pair_freq);
  set(cfg.toggles.dialect_tokenizer, ov.tok_toggle);
  set(cfg.toggles.regression_head, ov.head_toggle);
  set(cfg.toggles.dg_prompt, ov.dg_toggle);
  set(cfg.use_system_role, ov.use_system_role);
  set(cfg.with_timings, ov.with_timings);
  return cfg;
}

int cmd_ingest(const runner::RunConfig& cfg) {
  auto records = corpus::load_records(cfg.dataset_path);
  std::size_t annotators_min = SIZE_MAX, annotators_max = 0;
  for (const auto& r : records) {
    annotators_min = std::min(annotators_min, r.raw_scores.size());
    annotators_max = std::max(annotators_max, r.raw_scores.size());
  }
  std::cout << "dataset: " << cfg.dataset_path << "\n"
            << "  records: " << records.size() << "\n";
  if (!records.empty())
    std::cout << "  annotators per record: " << annotators_min << ".." << annotators_max
              << "\n";
  if (records.size() >= 2) {
    corpus::assign_gold(records, cfg.gold_order);
    std::cout << "  gold assigned (" << corpus::to_string(cfg.gold_order) << ")\n";
  }

  if (!cfg.lexicon_path.empty()) {
    const lexicon::Lexicon lex = lexicon::load_lexicon(cfg.lexicon_path);
    std::cout << "lexicon: " << cfg.lexicon_path << "\n"
              << "  entries: " << lex.size() << "\n";
    for (const auto& w : lex.duplicate_warnings())
      std::cout << "  warning: " << w << "\n";
  }
  std::cout << "ok\n";
  return 0;
}

int cmd_train_tokenizer(const runner::RunConfig& cfg, const std::string& out_path) {
  if (cfg.dialect_corpus_path.empty())
    raise(ErrorKind::config, "train-tokenizer needs --dialect-corpus");
  const auto lines = runner::read_corpus_lines(cfg.dialect_corpus_path);
  const subword::TokenizerModel model =
      subword::train_bpe(lines, cfg.dialect_tokenizer_spec);
  subword::save_tokenizer(model, out_path);
  std::cout << "trained tokenizer on " << lines.size() << " sentences\n"
            << "  vocab size: " << model.vocab_size() << "\n"
            << "  merges: " << model.merges().size() << "\n"
            << "  written to " << out_path << "\n";
  return 0;
}

int cmd_extend_vocab(const runner::RunConfig& cfg, const std::string& dialect_path,
                     const std::string& out_path) {
  subword::TokenizerModel base = subword::load_tokenizer(cfg.base_tokenizer_path);
  subword::TokenizerModel dialect;
  if (!dialect_path.empty()) {
    dialect = subword::load_tokenizer(dialect_path);
  } else if (!cfg.dialect_corpus_path.empty()) {
    dialect = subword::train_bpe(runner::read_corpus_lines(cfg.dialect_corpus_path),
                                 cfg.dialect_tokenizer_spec);
  } else {
    raise(ErrorKind::config, "extend-vocab needs --dialect-model or --dialect-corpus");
  }
  const auto novel = subword::vocab_diff(dialect, base);
  const subword::TokenizerModel extended = subword::extend_vocab(base, novel);
  subword::save_tokenizer(extended, out_path);
  std::cout << "base vocab: " << base.vocab_size() << "\n"
            << "grafted tokens: " << novel.size() << "\n"
            << "extended vocab: " << extended.vocab_size() << "\n"
            << "written to " << out_path << "\n";
  return 0;
}

int cmd_build_prompts(const runner::RunConfig& cfg, std::size_t limit) {
  if (cfg.out_dir.empty())
    raise(ErrorKind::config, "build-prompts needs --out");
  const runner::Pipeline pipe = runner::build_pipeline(cfg);
  fs::create_directories(cfg.out_dir);
  std::size_t n = 0, max_tokens = 0, trimmed = 0;
  for (const auto& rec : pipe.records) {
    if (limit && n >= limit) break;
    const promptkit::RenderedPrompt p = pipe.render(rec);
    max_tokens = std::max(max_tokens, p.token_count);
    if (cfg.kind == promptkit::PromptKind::dg || cfg.kind == promptkit::PromptKind::dag) {
      const auto full = lexicon::match_glossary(rec.source, pipe.lex);
      if (p.glossary_used.size() < full.size()) ++trimmed;
    }
    const std::string name =
        rec.id + "." + promptkit::to_string(cfg.kind) + ".txt";
    std::ofstream out(fs::path(cfg.out_dir) / name, std::ios::binary);
    out << p.text();
    ++n;
  }
  std::cout << "rendered " << n << " prompts (" << promptkit::to_string(cfg.kind)
            << ", budget " << cfg.budget << ") into " << cfg.out_dir << "\n"
            << "  max token count: " << max_tokens << "\n"
            << "  glossary-trimmed prompts: " << trimmed << "\n";
  return 0;
}

int cmd_embed_cache(const runner::RunConfig& cfg) {
  if (cfg.cache_dir.empty())
    raise(ErrorKind::config, "embed-cache needs --cache");
  const runner::Pipeline pipe = runner::build_pipeline(cfg);
  std::size_t n = 0;
  for (const auto& rec : pipe.records) {
    pipe.cache.get_or_fetch(pipe.client, pipe.embed_text(rec), cfg.head.pooling);
    ++n;
  }
  std::cout << "warmed cache for " << n << " records in " << cfg.cache_dir << "\n";
  return 0;
}

int cmd_train_head(const runner::RunConfig& cfg, const std::string& out_path,
                   const std::string& trace_path) {
  runner::RunConfig rcfg = cfg;
  rcfg.mode = runner::InferMode::regress;
  rcfg.toggles.regression_head = true;
  const runner::Pipeline pipe = runner::build_pipeline(rcfg);

  const std::uint64_t seed = pipe.cfg.seeds.front();
  auto [train_set, test_set] = corpus::split(
      pipe.records, {pipe.cfg.train_count, pipe.cfg.test_count, seed});

  std::vector<headtrain::TrainSample> samples;
  samples.reserve(train_set.size());
  for (const auto& rec : train_set)
    samples.push_back({pipe.cache.get_or_fetch(pipe.client, pipe.embed_text(rec),
                                               pipe.cfg.head.pooling),
                       rec.gold.value()});

  headtrain::HeadConfig head_cfg = pipe.cfg.head;
  head_cfg.seed = seed;
  headtrain::RegressionHead head = headtrain::make_head(head_cfg);
  const headtrain::TrainTrace trace = headtrain::train(head, samples, head_cfg);
  headtrain::save_head(head, out_path);
  if (!trace_path.empty()) headtrain::save_loss_trace(trace, trace_path);

  std::cout << "trained head on " << samples.size() << " samples, seed " << seed << "\n"
            << "  final epoch loss: " << trace.epoch_loss.back() << "\n"
            << "  checkpoint: " << out_path << "\n";
  if (!trace_path.empty()) std::cout << "  loss trace: " << trace_path << "\n";
  return 0;
}

int cmd_eval(const runner::RunConfig& cfg) {
  const runner::RunReport report = runner::run_eval(cfg);
  if (!cfg.out_dir.empty()) runner::emit_report(report, cfg.out_dir);
  std::cout << runner::render_report(report);
  if (!cfg.out_dir.empty())
    std::cout << "\nreport files: " << cfg.out_dir << "/report_" << report.fingerprint
              << ".{json,txt}\n";
  return 0;
}

int cmd_ablate(const runner::RunConfig& cfg) {
  const std::vector<runner::RunReport> reports = runner::run_ablation(cfg);
  if (!cfg.out_dir.empty()) runner::emit_ablation(reports, cfg.out_dir);
  std::cout << runner::render_ablation_table(reports);
  if (!cfg.out_dir.empty())
    std::cout << "\nreport files: " << cfg.out_dir
              << "/ablation.json, ablation_table.txt\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dialectqe: reference-less MT quality estimation for dialect-rich "
               "low-resource languages"};
  app.set_version_flag("--version", DIALECTQE_VERSION);
  app.require_subcommand(1);

  std::string config_path;
  Overrides ov;
  std::string out_path, trace_path, dialect_model_path, report_in;
  std::size_t limit = 0;

  CLI::App* ingest = app.add_subcommand("ingest", "validate dataset and lexicon");
  add_common_options(ingest, config_path, ov);

  CLI::App* traintok =
      app.add_subcommand("train-tokenizer", "train a dialect byte-level BPE tokenizer");
  add_common_options(traintok, config_path, ov);
  traintok->add_option("-o,--output", out_path, "tokenizer artifact path")->required();

  CLI::App* extend =
      app.add_subcommand("extend-vocab", "graft dialect tokens onto a base tokenizer");
  add_common_options(extend, config_path, ov);
  extend->add_option("--dialect-model", dialect_model_path,
                     "trained dialect tokenizer artifact");
  extend->add_option("-o,--output", out_path, "extended tokenizer path")->required();

  CLI::App* buildp =
      app.add_subcommand("build-prompts", "dry-run prompt rendering to files");
  add_common_options(buildp, config_path, ov);
  buildp->add_option("--limit", limit, "render at most N prompts");

  CLI::App* embedc =
      app.add_subcommand("embed-cache", "warm the embedding cache for the dataset");
  add_common_options(embedc, config_path, ov);

  CLI::App* trainh = app.add_subcommand("train-head", "train the regression head");
  add_common_options(trainh, config_path, ov);
  trainh->add_option("-o,--output", out_path, "head checkpoint path")->required();
  trainh->add_option("--trace", trace_path, "loss trace output path");

  CLI::App* evalc = app.add_subcommand("eval", "run one evaluation configuration");
  add_common_options(evalc, config_path, ov);

  CLI::App* ablate = app.add_subcommand("ablate", "run the four-row ablation matrix");
  add_common_options(ablate, config_path, ov);

  CLI::App* reportc = app.add_subcommand("report", "render an emitted report file");
  reportc->add_option("--in", report_in, "report JSON file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (reportc->parsed()) {
      std::cout << runner::render_report_file(report_in);
      return 0;
    }
    const runner::RunConfig cfg = assemble(config_path, ov);
    if (ingest->parsed()) return cmd_ingest(cfg);
    if (traintok->parsed()) return cmd_train_tokenizer(cfg, out_path);
    if (extend->parsed()) return cmd_extend_vocab(cfg, dialect_model_path, out_path);
    if (buildp->parsed()) return cmd_build_prompts(cfg, limit);
    if (embedc->parsed()) return cmd_embed_cache(cfg);
    if (trainh->parsed()) return cmd_train_head(cfg, out_path, trace_path);
    if (evalc->parsed()) return cmd_eval(cfg);
    if (ablate->parsed()) return cmd_ablate(cfg);
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
