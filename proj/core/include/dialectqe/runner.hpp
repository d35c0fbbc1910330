#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "dialectqe/corpus.hpp"
#include "dialectqe/headtrain.hpp"
#include "dialectqe/modelgate.hpp"
#include "dialectqe/promptkit.hpp"
#include "dialectqe/stats.hpp"
#include "dialectqe/subword.hpp"

namespace dialectqe::runner {

enum class InferMode { generate, regress };

InferMode mode_from_string(const std::string& name);
const char* to_string(InferMode mode);

// The three ablation switches: grafted dialect tokenizer, trained regression
// head, dialect-guided prompt.
struct Toggles {
  bool dialect_tokenizer = false;
  bool regression_head = false;
  bool dg_prompt = false;
};

struct RunConfig {
  std::string dataset_path;
  std::string lexicon_path;
  std::string base_tokenizer_path;
  std::string dialect_corpus_path;
  std::string assets_dir;      // empty -> promptkit::default_asset_dir()
  std::string guideline_path;  // empty -> manifest default

  promptkit::PromptKind kind = promptkit::PromptKind::dg;
  Toggles toggles;
  InferMode mode = InferMode::generate;
  modelgate::ProviderConfig provider;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::size_t budget = 512;

  std::size_t train_count = 0;
  std::size_t test_count = 0;
  corpus::GoldOrder gold_order = corpus::GoldOrder::average_then_z;
  headtrain::HeadConfig head;
  subword::TrainSpec dialect_tokenizer_spec;
  // Text fed to the embedding endpoint in regress mode: the budget-enforced
  // prompt, or the bare source/hypothesis pair.
  bool embed_prompt = true;
  bool use_system_role = true;

  std::string cache_dir;
  std::string out_dir;
  bool with_timings = false;
};

// Reads the declarative key-value config document (JSON).
RunConfig load_run_config(const std::string& path);

// Enforces the config invariants; throws config errors before any work runs.
void validate(const RunConfig& cfg);

// Canonical serialized form of the resolved config; reports embed it.
std::string resolved_config_json(const RunConfig& cfg);

// FNV-1a-64 hex of the resolved config document.
std::string fingerprint(const RunConfig& cfg);

// One configuration's loaded inputs and provider plumbing, shared by
// run_eval and the CLI subcommands.
struct Pipeline {
  RunConfig cfg;  // resolved
  std::vector<corpus::EvalRecord> records;
  lexicon::Lexicon lex;
  std::shared_ptr<subword::TokenizerModel> tokenizer;  // base or extended
  promptkit::PromptBuilder builder;
  modelgate::Client client;
  headtrain::EmbedCache cache;

  // Budget-enforced prompt of the configured kind for one record.
  promptkit::RenderedPrompt render(const corpus::EvalRecord& rec) const;
  // Text whose embedding feeds the regression head.
  std::string embed_text(const corpus::EvalRecord& rec) const;
};

Pipeline build_pipeline(const RunConfig& cfg);

// Non-blank lines of a text corpus, one sentence per line.
std::vector<std::string> read_corpus_lines(const std::string& path);

struct SeedResult {
  std::uint64_t seed = 0;
  stats::MetricReport metrics;
};

struct RunReport {
  std::string fingerprint;
  std::string provider_identity;
  promptkit::PromptKind kind = promptkit::PromptKind::plain;
  InferMode mode = InferMode::generate;
  Toggles toggles;
  std::vector<std::uint64_t> seeds;
  std::vector<SeedResult> per_seed;
  stats::Aggregate pearson;
  stats::Aggregate spearman;
  std::string config_json;   // resolved config, canonical form
  bool with_timings = false;
  std::string started_at;    // UTC, only emitted when with_timings
  std::string finished_at;
};

// Full pipeline for one configuration, repeated per seed and aggregated.
RunReport run_eval(const RunConfig& cfg);

// The four-row ablation matrix, in order:
//   (x,x,x) plain prompt, generate
//   (Y,x,x) extended tokenizer, plain prompt, generate
//   (Y,Y,x) extended tokenizer, plain prompt, regress
//   (Y,Y,Y) extended tokenizer, DG prompt, regress
std::vector<RunReport> run_ablation(const RunConfig& cfg);

// Human-readable single-report text.
std::string render_report(const RunReport& report);

// Four-row ablation table in the mean +/- std convention.
std::string render_ablation_table(const std::vector<RunReport>& reports);

// Machine-readable JSON document for one report.
std::string report_to_json(const RunReport& report);

// Writes report_<fingerprint>.json and report_<fingerprint>.txt under dir.
void emit_report(const RunReport& report, const std::string& dir);

// Writes ablation.json plus ablation_table.txt under dir.
void emit_ablation(const std::vector<RunReport>& reports, const std::string& dir);

// Re-renders emitted JSON (single report or ablation array) as tables.
std::string render_report_file(const std::string& path);

}  // namespace dialectqe::runner
