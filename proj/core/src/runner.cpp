#include "dialectqe/runner.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "dialectqe/errors.hpp"
#include "dialectqe/lexicon.hpp"
#include "dialectqe/rng.hpp"
#include "dialectqe/textnorm.hpp"

namespace dialectqe::runner {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt4(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::string now_utc() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    raise(ErrorKind::io, "cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!textnorm::trim(line).empty()) lines.push_back(line);
  }
  return lines;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    raise(ErrorKind::io, "cannot write file: " + path);
  out << content;
  if (!out)
    raise(ErrorKind::io, "short write: " + path);
}

// Index-parallel map bounded by `workers`; the first failure aborts the run.
template <typename Fn>
void parallel_records(std::size_t n, int workers, Fn&& fn) {
  const int count = std::max(1, std::min<int>(workers, static_cast<int>(n)));
  if (count == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(count));
  for (int w = 0; w < count; ++w) {
    pool.emplace_back([&] {
      while (!failed.load(std::memory_order_relaxed)) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) break;
        try {
          fn(i);
        } catch (...) {
          std::scoped_lock lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          failed.store(true, std::memory_order_relaxed);
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

json toggles_to_json(const Toggles& t) {
  return json{{"dialect_tokenizer", t.dialect_tokenizer},
              {"regression_head", t.regression_head},
              {"dg_prompt", t.dg_prompt}};
}

json config_to_json(const RunConfig& cfg) {
  json doc;
  doc["dataset"] = cfg.dataset_path;
  doc["lexicon"] = cfg.lexicon_path;
  doc["base_tokenizer"] = cfg.base_tokenizer_path;
  doc["dialect_corpus"] = cfg.dialect_corpus_path;
  doc["assets"] = cfg.assets_dir;
  doc["guidelines"] = cfg.guideline_path;
  doc["prompt_kind"] = promptkit::to_string(cfg.kind);
  doc["toggles"] = toggles_to_json(cfg.toggles);
  doc["mode"] = to_string(cfg.mode);
  doc["provider"] = {{"base_url", cfg.provider.base_url},
                     {"model_name", cfg.provider.model_name},
                     {"timeout_s", cfg.provider.timeout_s},
                     {"max_retries", cfg.provider.max_retries},
                     {"temperature", cfg.provider.temperature},
                     {"max_tokens", cfg.provider.max_tokens},
                     {"embedding_dim", cfg.provider.embedding_dim},
                     {"concurrency", cfg.provider.concurrency}};
  doc["seeds"] = cfg.seeds;
  doc["budget"] = cfg.budget;
  doc["split"] = {{"train", cfg.train_count}, {"test", cfg.test_count}};
  doc["normalization_order"] = corpus::to_string(cfg.gold_order);
  doc["head"] = {{"input_dim", cfg.head.input_dim},
                 {"pooling", to_string(cfg.head.pooling)},
                 {"learning_rate", cfg.head.learning_rate},
                 {"epochs", cfg.head.epochs},
                 {"batch_size", cfg.head.batch_size},
                 {"adam_beta1", cfg.head.adam_beta1},
                 {"adam_beta2", cfg.head.adam_beta2},
                 {"adam_eps", cfg.head.adam_eps},
                 {"hidden_layer", cfg.head.hidden_layer},
                 {"hidden_dim", cfg.head.hidden_dim}};
  doc["dialect_tokenizer_spec"] = {
      {"target_vocab_size", cfg.dialect_tokenizer_spec.target_vocab_size},
      {"min_pair_frequency", cfg.dialect_tokenizer_spec.min_pair_frequency}};
  doc["embed_input"] = cfg.embed_prompt ? "prompt" : "pair";
  doc["use_system_role"] = cfg.use_system_role;
  return doc;
}

const char* check_mark(bool b) { return b ? "✓" : "×"; }

std::string agg_cell(const stats::Aggregate& a) {
  return fmt4(a.mean) + " ± " + fmt4(a.stddev);
}

}  // namespace

InferMode mode_from_string(const std::string& name) {
  if (name == "generate") return InferMode::generate;
  if (name == "regress") return InferMode::regress;
  raise(ErrorKind::config, "unknown inference mode: " + name);
}

const char* to_string(InferMode mode) {
  return mode == InferMode::generate ? "generate" : "regress";
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    raise(ErrorKind::io, "cannot open config file: " + path);
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object())
    raise(ErrorKind::config, "config file is not a JSON document: " + path);

  RunConfig cfg;
  try {
    cfg.dataset_path = doc.value("dataset", "");
    cfg.lexicon_path = doc.value("lexicon", "");
    cfg.base_tokenizer_path = doc.value("base_tokenizer", "");
    cfg.dialect_corpus_path = doc.value("dialect_corpus", "");
    cfg.assets_dir = doc.value("assets", "");
    cfg.guideline_path = doc.value("guidelines", "");
    if (doc.contains("prompt_kind"))
      cfg.kind = promptkit::kind_from_string(doc["prompt_kind"].get<std::string>());
    if (doc.contains("toggles")) {
      const auto& t = doc["toggles"];
      cfg.toggles.dialect_tokenizer = t.value("dialect_tokenizer", false);
      cfg.toggles.regression_head = t.value("regression_head", false);
      cfg.toggles.dg_prompt = t.value("dg_prompt", false);
    }
    if (doc.contains("mode"))
      cfg.mode = mode_from_string(doc["mode"].get<std::string>());
    if (doc.contains("provider")) {
      const auto& p = doc["provider"];
      cfg.provider.base_url = p.value("base_url", cfg.provider.base_url);
      cfg.provider.model_name = p.value("model_name", cfg.provider.model_name);
      cfg.provider.timeout_s = p.value("timeout_s", cfg.provider.timeout_s);
      cfg.provider.max_retries = p.value("max_retries", cfg.provider.max_retries);
      cfg.provider.temperature = p.value("temperature", cfg.provider.temperature);
      cfg.provider.max_tokens = p.value("max_tokens", cfg.provider.max_tokens);
      cfg.provider.embedding_dim = p.value("embedding_dim", cfg.provider.embedding_dim);
      cfg.provider.concurrency = p.value("concurrency", cfg.provider.concurrency);
      cfg.provider.initial_backoff_s =
          p.value("initial_backoff_s", cfg.provider.initial_backoff_s);
      cfg.provider.api_key_env = p.value("api_key_env", cfg.provider.api_key_env);
    }
    if (doc.contains("seeds"))
      cfg.seeds = doc["seeds"].get<std::vector<std::uint64_t>>();
    cfg.budget = doc.value("budget", cfg.budget);
    if (doc.contains("split")) {
      cfg.train_count = doc["split"].value("train", cfg.train_count);
      cfg.test_count = doc["split"].value("test", cfg.test_count);
    }
    if (doc.contains("normalization_order"))
      cfg.gold_order =
          corpus::gold_order_from_string(doc["normalization_order"].get<std::string>());
    if (doc.contains("head")) {
      const auto& h = doc["head"];
      cfg.head.input_dim = h.value("input_dim", cfg.head.input_dim);
      if (h.contains("pooling"))
        cfg.head.pooling = pooling_from_string(h["pooling"].get<std::string>());
      cfg.head.learning_rate = h.value("learning_rate", cfg.head.learning_rate);
      cfg.head.epochs = h.value("epochs", cfg.head.epochs);
      cfg.head.batch_size = h.value("batch_size", cfg.head.batch_size);
      cfg.head.adam_beta1 = h.value("adam_beta1", cfg.head.adam_beta1);
      cfg.head.adam_beta2 = h.value("adam_beta2", cfg.head.adam_beta2);
      cfg.head.adam_eps = h.value("adam_eps", cfg.head.adam_eps);
      cfg.head.hidden_layer = h.value("hidden_layer", cfg.head.hidden_layer);
      cfg.head.hidden_dim = h.value("hidden_dim", cfg.head.hidden_dim);
    }
    if (doc.contains("dialect_tokenizer_spec")) {
      const auto& s = doc["dialect_tokenizer_spec"];
      cfg.dialect_tokenizer_spec.target_vocab_size =
          s.value("target_vocab_size", cfg.dialect_tokenizer_spec.target_vocab_size);
      cfg.dialect_tokenizer_spec.min_pair_frequency =
          s.value("min_pair_frequency", cfg.dialect_tokenizer_spec.min_pair_frequency);
    }
    if (doc.contains("embed_input")) {
      const std::string v = doc["embed_input"].get<std::string>();
      if (v != "prompt" && v != "pair")
        raise(ErrorKind::config, "embed_input must be 'prompt' or 'pair'");
      cfg.embed_prompt = v == "prompt";
    }
    cfg.use_system_role = doc.value("use_system_role", cfg.use_system_role);
    cfg.cache_dir = doc.value("cache_dir", "");
    cfg.out_dir = doc.value("out_dir", "");
    cfg.with_timings = doc.value("with_timings", false);
  } catch (const json::exception& e) {
    raise(ErrorKind::config, "bad config value in " + path + ": " + e.what());
  }
  return cfg;
}

void validate(const RunConfig& cfg) {
  if (cfg.dataset_path.empty())
    raise(ErrorKind::config, "dataset path is required");
  if (cfg.base_tokenizer_path.empty())
    raise(ErrorKind::config, "base tokenizer path is required");
  if (cfg.seeds.empty())
    raise(ErrorKind::config, "at least one seed is required");
  if (cfg.toggles.dg_prompt && cfg.kind != promptkit::PromptKind::dg &&
      cfg.kind != promptkit::PromptKind::dag)
    raise(ErrorKind::config, "dg_prompt toggle requires prompt kind dg or dag");
  if (cfg.mode == InferMode::regress && !cfg.toggles.regression_head)
    raise(ErrorKind::config, "regress mode requires the regression_head toggle");
  if ((cfg.kind == promptkit::PromptKind::dg || cfg.kind == promptkit::PromptKind::dag) &&
      cfg.lexicon_path.empty())
    raise(ErrorKind::config, "dg/dag prompts need a lexicon path");
  if (cfg.toggles.dialect_tokenizer && cfg.dialect_corpus_path.empty())
    raise(ErrorKind::config, "dialect_tokenizer toggle needs a dialect corpus path");
  if (cfg.train_count == 0 && cfg.mode == InferMode::regress)
    raise(ErrorKind::config, "regress mode needs a nonempty train split");
  if (cfg.test_count < 2)
    raise(ErrorKind::config, "test split needs at least 2 records for correlation");
  if (cfg.mode == InferMode::regress && cfg.head.input_dim == 0 &&
      cfg.provider.embedding_dim == 0)
    raise(ErrorKind::config,
          "regress mode needs provider.embedding_dim or head.input_dim");
}

namespace {

// Fill in values that are derivable before any work starts, so fingerprints
// cover the effective settings.
RunConfig resolve(RunConfig cfg) {
  if (cfg.provider.base_url.rfind("mock://", 0) == 0 && cfg.provider.embedding_dim == 0)
    cfg.provider.embedding_dim = 64;
  if (cfg.head.input_dim == 0) cfg.head.input_dim = cfg.provider.embedding_dim;
  return cfg;
}

}  // namespace

std::string resolved_config_json(const RunConfig& cfg) {
  return config_to_json(resolve(cfg)).dump(1, ' ');
}

std::string fingerprint(const RunConfig& cfg) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(resolved_config_json(cfg))));
  return buf;
}

promptkit::RenderedPrompt Pipeline::render(const corpus::EvalRecord& rec) const {
  std::vector<lexicon::LexiconEntry> glossary;
  if (cfg.kind == promptkit::PromptKind::dg || cfg.kind == promptkit::PromptKind::dag)
    glossary = lexicon::match_glossary(rec.source, lex);
  promptkit::RenderedPrompt p =
      builder.build(cfg.kind, rec.source, rec.hypothesis, std::move(glossary));
  return promptkit::enforce_budget(builder, p, *tokenizer, cfg.budget);
}

std::string Pipeline::embed_text(const corpus::EvalRecord& rec) const {
  if (cfg.embed_prompt) return render(rec).text();
  return rec.source + "\n" + rec.hypothesis;
}

std::vector<std::string> read_corpus_lines(const std::string& path) {
  return read_lines(path);
}

Pipeline build_pipeline(const RunConfig& raw_cfg) {
  RunConfig cfg = resolve(raw_cfg);
  validate(cfg);

  // Stage: dataset.
  std::vector<corpus::EvalRecord> records;
  try {
    records = corpus::load_records(cfg.dataset_path);
    corpus::assign_gold(records, cfg.gold_order);
  } catch (const Error& e) {
    throw Error(e.kind(), std::string("dataset stage: ") + e.what());
  }
  if (cfg.train_count + cfg.test_count > records.size())
    raise(ErrorKind::config, "split sizes exceed dataset size");

  // Stage: lexicon (only the glossary-bearing prompts need one).
  lexicon::Lexicon lex;
  if (cfg.kind == promptkit::PromptKind::dg || cfg.kind == promptkit::PromptKind::dag) {
    try {
      lex = lexicon::load_lexicon(cfg.lexicon_path);
    } catch (const Error& e) {
      throw Error(e.kind(), std::string("lexicon stage: ") + e.what());
    }
  }

  // Stage: tokenizer, grafting dialect tokens when toggled on.
  std::shared_ptr<subword::TokenizerModel> active;
  try {
    subword::TokenizerModel base = subword::load_tokenizer(cfg.base_tokenizer_path);
    if (cfg.toggles.dialect_tokenizer) {
      const std::vector<std::string> dialect_lines = read_lines(cfg.dialect_corpus_path);
      const subword::TokenizerModel dialect =
          subword::train_bpe(dialect_lines, cfg.dialect_tokenizer_spec);
      const std::vector<std::string> novel = subword::vocab_diff(dialect, base);
      active = std::make_shared<subword::TokenizerModel>(
          subword::extend_vocab(base, novel));
    } else {
      active = std::make_shared<subword::TokenizerModel>(std::move(base));
    }
  } catch (const Error& e) {
    throw Error(e.kind(), std::string("tokenizer stage: ") + e.what());
  }

  // Stage: prompts and provider.
  const std::string assets =
      cfg.assets_dir.empty() ? promptkit::default_asset_dir() : cfg.assets_dir;
  promptkit::PromptBuilder builder =
      promptkit::PromptBuilder::from_assets(assets, cfg.guideline_path);
  modelgate::Client client(cfg.provider, active);
  headtrain::EmbedCache cache(cfg.cache_dir);

  return Pipeline{std::move(cfg),     std::move(records), std::move(lex),
                  std::move(active),  std::move(builder), std::move(client),
                  std::move(cache)};
}

RunReport run_eval(const RunConfig& raw_cfg) {
  const Pipeline pipe = build_pipeline(raw_cfg);
  const RunConfig& cfg = pipe.cfg;

  RunReport report;
  report.fingerprint = fingerprint(cfg);
  report.kind = cfg.kind;
  report.mode = cfg.mode;
  report.toggles = cfg.toggles;
  report.seeds = cfg.seeds;
  report.config_json = resolved_config_json(cfg);
  report.with_timings = cfg.with_timings;
  report.started_at = now_utc();

  const auto& records = pipe.records;
  const auto& client = pipe.client;
  const auto& cache = pipe.cache;
  auto rendered_text = [&](const corpus::EvalRecord& rec) { return pipe.render(rec); };
  auto embed_text = [&](const corpus::EvalRecord& rec) { return pipe.embed_text(rec); };

  if (!cfg.out_dir.empty()) {
    std::error_code ec;
    fs::create_directories(fs::path(cfg.out_dir) / "partials", ec);
  }

  std::vector<double> pearson_values, spearman_values;
  for (const std::uint64_t seed : cfg.seeds) {
    auto [train_set, test_set] =
        corpus::split(records, {cfg.train_count, cfg.test_count, seed});

    std::vector<double> preds(test_set.size(), 0.0);
    if (cfg.mode == InferMode::generate) {
      parallel_records(test_set.size(), cfg.provider.concurrency, [&](std::size_t i) {
        const corpus::EvalRecord& rec = test_set[i];
        try {
          const promptkit::RenderedPrompt p = rendered_text(rec);
          const auto messages = promptkit::to_chat(p, cfg.use_system_role);
          preds[i] = client.chat_score(messages).score;
        } catch (const Error& e) {
          throw Error(e.kind(), "generate stage, record '" + rec.id + "': " + e.what());
        }
      });
    } else {
      // Embed the train split (bounded concurrency), train, then predict.
      std::vector<headtrain::TrainSample> samples(train_set.size());
      parallel_records(train_set.size(), cfg.provider.concurrency, [&](std::size_t i) {
        const corpus::EvalRecord& rec = train_set[i];
        try {
          samples[i].x = cache.get_or_fetch(client, embed_text(rec), cfg.head.pooling);
          samples[i].gold = rec.gold.value();
        } catch (const Error& e) {
          throw Error(e.kind(), "embed stage, record '" + rec.id + "': " + e.what());
        }
      });
      headtrain::HeadConfig head_cfg = cfg.head;
      head_cfg.seed = seed;
      headtrain::RegressionHead head = headtrain::make_head(head_cfg);
      headtrain::train(head, samples, head_cfg);
      // Warm the cache for the test split concurrently, then predict in order.
      parallel_records(test_set.size(), cfg.provider.concurrency, [&](std::size_t i) {
        cache.get_or_fetch(client, embed_text(test_set[i]), cfg.head.pooling);
      });
      preds = headtrain::predict(head, test_set, client, cache, embed_text);
    }

    std::vector<double> gold;
    gold.reserve(test_set.size());
    for (const auto& rec : test_set) gold.push_back(rec.gold.value());

    SeedResult sr;
    sr.seed = seed;
    sr.metrics.pearson = stats::pearson(preds, gold);
    sr.metrics.spearman = stats::spearman(preds, gold);
    sr.metrics.n = test_set.size();
    report.per_seed.push_back(sr);
    pearson_values.push_back(sr.metrics.pearson);
    spearman_values.push_back(sr.metrics.spearman);

    if (!cfg.out_dir.empty()) {
      json partial;
      partial["fingerprint"] = report.fingerprint;
      partial["seed"] = seed;
      partial["pearson"] = sr.metrics.pearson;
      partial["spearman"] = sr.metrics.spearman;
      partial["n"] = sr.metrics.n;
      write_file((fs::path(cfg.out_dir) / "partials" /
                  (report.fingerprint + "_seed" + std::to_string(seed) + ".json"))
                     .string(),
                 partial.dump(1, ' ') + "\n");
    }
  }

  report.pearson = stats::aggregate(pearson_values);
  report.spearman = stats::aggregate(spearman_values);
  report.provider_identity = client.identity();
  report.finished_at = now_utc();
  return report;
}

std::vector<RunReport> run_ablation(const RunConfig& cfg) {
  struct Row {
    Toggles toggles;
    promptkit::PromptKind kind;
    InferMode mode;
  };
  const Row rows[4] = {
      {{false, false, false}, promptkit::PromptKind::plain, InferMode::generate},
      {{true, false, false}, promptkit::PromptKind::plain, InferMode::generate},
      {{true, true, false}, promptkit::PromptKind::plain, InferMode::regress},
      {{true, true, true}, promptkit::PromptKind::dg, InferMode::regress},
  };

  std::vector<RunReport> reports;
  reports.reserve(4);
  for (const Row& row : rows) {
    RunConfig rcfg = cfg;
    rcfg.toggles = row.toggles;
    rcfg.kind = row.kind;
    rcfg.mode = row.mode;
    reports.push_back(run_eval(rcfg));
  }
  return reports;
}

std::string render_report(const RunReport& r) {
  std::ostringstream out;
  out << "dialectqe evaluation report\n";
  out << "fingerprint: " << r.fingerprint << "\n";
  out << "provider:    " << r.provider_identity << "\n";
  out << "mode: " << to_string(r.mode) << "   prompt: " << promptkit::to_string(r.kind)
      << "   toggles: tokenizer=" << check_mark(r.toggles.dialect_tokenizer)
      << " head=" << check_mark(r.toggles.regression_head)
      << " dg=" << check_mark(r.toggles.dg_prompt) << "\n";
  out << "seeds:";
  for (auto s : r.seeds) out << " " << s;
  out << "\n\nper-seed results:\n";
  for (const auto& sr : r.per_seed) {
    out << "  seed " << sr.seed << ": pearson " << fmt4(sr.metrics.pearson)
        << "  spearman " << fmt4(sr.metrics.spearman) << "  (n=" << sr.metrics.n
        << ")\n";
  }
  out << "\npearson:  " << agg_cell(r.pearson) << "\n";
  out << "spearman: " << agg_cell(r.spearman) << "\n";
  if (r.with_timings)
    out << "\nstarted: " << r.started_at << "\nfinished: " << r.finished_at << "\n";
  return out.str();
}

namespace {

// Pads to a display width counted in code points, not bytes.
std::string pad_cell(const std::string& s, std::size_t width) {
  std::size_t cols = 0;
  for (unsigned char c : s)
    if ((c & 0xC0) != 0x80) ++cols;
  std::string out = s;
  while (cols++ < width) out += ' ';
  return out;
}

}  // namespace

std::string render_ablation_table(const std::vector<RunReport>& reports) {
  std::ostringstream out;
  out << "Ablation (mean ± population std over seeds)\n";
  out << "Dialect Aware Tokenizer | Regression Head | DG Prompt | Pearson          "
         "| Spearman         | Fingerprint\n";
  for (const auto& r : reports) {
    out << pad_cell(check_mark(r.toggles.dialect_tokenizer), 23) << " | "
        << pad_cell(check_mark(r.toggles.regression_head), 15) << " | "
        << pad_cell(check_mark(r.toggles.dg_prompt), 9) << " | "
        << pad_cell(agg_cell(r.pearson), 16) << " | "
        << pad_cell(agg_cell(r.spearman), 16) << " | " << r.fingerprint << "\n";
  }
  return out.str();
}

namespace {

json report_json_doc(const RunReport& r) {
  json doc;
  doc["format"] = "dialectqe-report";
  doc["version"] = 1;
  doc["fingerprint"] = r.fingerprint;
  doc["provider"] = r.provider_identity;
  doc["prompt_kind"] = promptkit::to_string(r.kind);
  doc["mode"] = to_string(r.mode);
  doc["toggles"] = toggles_to_json(r.toggles);
  doc["seeds"] = r.seeds;
  json per_seed = json::array();
  for (const auto& sr : r.per_seed)
    per_seed.push_back({{"seed", sr.seed},
                        {"pearson", sr.metrics.pearson},
                        {"spearman", sr.metrics.spearman},
                        {"n", sr.metrics.n}});
  doc["per_seed"] = std::move(per_seed);
  doc["pearson"] = {{"mean", r.pearson.mean}, {"std", r.pearson.stddev}, {"k", r.pearson.k}};
  doc["spearman"] = {{"mean", r.spearman.mean}, {"std", r.spearman.stddev}, {"k", r.spearman.k}};
  doc["config"] = json::parse(r.config_json);
  if (r.with_timings)
    doc["timings"] = {{"started_at", r.started_at}, {"finished_at", r.finished_at}};
  return doc;
}

RunReport report_from_json(const json& doc) {
  RunReport r;
  r.fingerprint = doc.value("fingerprint", "");
  r.provider_identity = doc.value("provider", "");
  r.kind = promptkit::kind_from_string(doc.value("prompt_kind", "plain"));
  r.mode = mode_from_string(doc.value("mode", "generate"));
  if (doc.contains("toggles")) {
    r.toggles.dialect_tokenizer = doc["toggles"].value("dialect_tokenizer", false);
    r.toggles.regression_head = doc["toggles"].value("regression_head", false);
    r.toggles.dg_prompt = doc["toggles"].value("dg_prompt", false);
  }
  if (doc.contains("seeds")) r.seeds = doc["seeds"].get<std::vector<std::uint64_t>>();
  for (const auto& s : doc.value("per_seed", json::array())) {
    SeedResult sr;
    sr.seed = s.value("seed", std::uint64_t{0});
    sr.metrics.pearson = s.value("pearson", 0.0);
    sr.metrics.spearman = s.value("spearman", 0.0);
    sr.metrics.n = s.value("n", std::size_t{0});
    r.per_seed.push_back(sr);
  }
  r.pearson = {doc["pearson"].value("mean", 0.0), doc["pearson"].value("std", 0.0),
               doc["pearson"].value("k", std::size_t{0})};
  r.spearman = {doc["spearman"].value("mean", 0.0), doc["spearman"].value("std", 0.0),
                doc["spearman"].value("k", std::size_t{0})};
  if (doc.contains("config")) r.config_json = doc["config"].dump(1, ' ');
  if (doc.contains("timings")) {
    r.with_timings = true;
    r.started_at = doc["timings"].value("started_at", "");
    r.finished_at = doc["timings"].value("finished_at", "");
  }
  return r;
}

}  // namespace

std::string report_to_json(const RunReport& r) {
  return report_json_doc(r).dump(1, ' ') + "\n";
}

void emit_report(const RunReport& r, const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    raise(ErrorKind::io, "cannot create output dir: " + dir);
  const std::string stem = (fs::path(dir) / ("report_" + r.fingerprint)).string();
  write_file(stem + ".json", report_to_json(r));
  write_file(stem + ".txt", render_report(r));
}

void emit_ablation(const std::vector<RunReport>& reports, const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    raise(ErrorKind::io, "cannot create output dir: " + dir);
  json arr = json::array();
  for (const auto& r : reports) arr.push_back(report_json_doc(r));
  write_file((fs::path(dir) / "ablation.json").string(), arr.dump(1, ' ') + "\n");
  write_file((fs::path(dir) / "ablation_table.txt").string(),
             render_ablation_table(reports));
}

std::string render_report_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    raise(ErrorKind::io, "cannot open report file: " + path);
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded())
    raise(ErrorKind::format, "corrupt report file: " + path);
  if (doc.is_array()) {
    std::vector<RunReport> reports;
    for (const auto& item : doc) reports.push_back(report_from_json(item));
    std::string out = render_ablation_table(reports);
    for (const auto& r : reports) {
      out += "\n";
      out += render_report(r);
    }
    return out;
  }
  return render_report(report_from_json(doc));
}

}  // namespace dialectqe::runner
