// Acceptance suite: one criterion per numbered entry, one PASS/FAIL line each.
// Exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "dialectqe/corpus.hpp"
#include "dialectqe/errors.hpp"
#include "dialectqe/headtrain.hpp"
#include "dialectqe/lexicon.hpp"
#include "dialectqe/modelgate.hpp"
#include "dialectqe/promptkit.hpp"
#include "dialectqe/rng.hpp"
#include "dialectqe/runner.hpp"
#include "dialectqe/stats.hpp"
#include "dialectqe/subword.hpp"
#include "support/oracles.hpp"
#include "support/paths.hpp"

using namespace dialectqe;

namespace {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool cond, const std::string& msg) {
  if (!cond) throw Failure(msg);
}

void require_close(double a, double b, double tol, const std::string& msg) {
  if (!(std::abs(a - b) <= tol))
    throw Failure(msg + " (|" + std::to_string(a) + " - " + std::to_string(b) +
                  "| > " + std::to_string(tol) + ")");
}

// ---------------------------------------------------------------- criterion 1
void metric_oracles() {
  using stats::pearson;
  using stats::spearman;

  require_close(pearson(std::vector<double>{1, 2, 3, 4}, std::vector<double>{1, 3, 2, 4}),
                0.8, 1e-12, "pearson([1,2,3,4],[1,3,2,4]) != 0.8");
  require_close(spearman(std::vector<double>{1, 2, 2, 4}, std::vector<double>{1, 2, 3, 4}),
                4.5 / std::sqrt(22.5), 1e-12, "spearman tie case");

  SplitMix64 rng(20260809);
  for (int iter = 0; iter < 1000; ++iter) {
    const std::size_t n = 3 + rng.next_below(50);
    std::vector<double> x = testsupport::random_vector(rng, n, -10, 10);
    std::vector<double> y = testsupport::random_vector(rng, n, -10, 10);
    x[0] += 1e-3;

    require_close(pearson(x, y), pearson(y, x), 1e-12, "pearson symmetry");
    require_close(spearman(x, y), spearman(y, x), 1e-12, "spearman symmetry");

    const double a = 0.1 + 3 * rng.next_double();
    const double b = -1 + 2 * rng.next_double();
    std::vector<double> ax, nax;
    for (double v : x) {
      ax.push_back(a * v + b);
      nax.push_back(-a * v + b);
    }
    require_close(pearson(x, ax), 1.0, 1e-9, "pearson affine +");
    require_close(pearson(x, nax), -1.0, 1e-9, "pearson affine -");

    std::vector<double> xc;
    for (double v : x) xc.push_back(v * v * v);
    require_close(spearman(xc, y), spearman(x, y), 1e-12, "spearman monotone invariance");

    std::vector<double> xd(n), yd(n);
    std::iota(xd.begin(), xd.end(), 1.0);
    std::iota(yd.begin(), yd.end(), 1.0);
    fisher_yates(xd, rng);
    fisher_yates(yd, rng);
    require_close(spearman(xd, yd), testsupport::spearman_no_ties_shortcut(xd, yd),
                  1e-12, "no-ties shortcut equivalence");
  }
}

// ---------------------------------------------------------------- criterion 2
void bpe_oracle_equivalence() {
  SplitMix64 rng(4242);
  for (int corpus_idx = 0; corpus_idx < 50; ++corpus_idx) {
    const auto corpus = testsupport::random_small_corpus(rng, 1024);
    const std::size_t target = 256 + 1 + rng.next_below(64);
    const std::size_t min_freq = 1 + rng.next_below(3);

    const subword::TokenizerModel model = subword::train_bpe(corpus, {target, min_freq});
    testsupport::BruteForceBpe oracle;
    oracle.train(corpus, target, min_freq);

    require(model.merges().size() == oracle.merges.size(),
            "merge count mismatch on corpus " + std::to_string(corpus_idx));
    for (std::size_t i = 0; i < oracle.merges.size(); ++i) {
      require(model.token_bytes(model.merges()[i].first) == oracle.merges[i].first &&
                  model.token_bytes(model.merges()[i].second) == oracle.merges[i].second,
              "merge " + std::to_string(i) + " differs on corpus " +
                  std::to_string(corpus_idx));
    }
  }

  const subword::TokenizerModel codec =
      subword::train_bpe({"round trip corpus", "with some tokens"}, {300, 1});
  for (int i = 0; i < 10000; ++i) {
    const std::string s = testsupport::random_utf8(rng, 48);
    const auto back = codec.decode(codec.encode(s));
    require(back.text == s && !back.lossy, "encode/decode identity failed");
  }
}

// ---------------------------------------------------------------- criterion 3
void vocabulary_grafting() {
  const auto dialect_lines =
      runner::read_corpus_lines(testsupport::data_file("dialect_corpus.txt"));
  const subword::TokenizerModel base =
      subword::load_tokenizer(testsupport::data_file("base_tokenizer.json"));
  const subword::TokenizerModel dialect = subword::train_bpe(dialect_lines, {1200, 2});

  const auto novel = subword::vocab_diff(dialect, base);
  require(!novel.empty(), "dialect training produced no novel tokens");
  const subword::TokenizerModel extended = subword::extend_vocab(base, novel);

  require(subword::vocab_diff(dialect, extended).empty(), "re-diff after extend not empty");
  for (std::size_t id = 0; id < base.vocab_size(); ++id)
    require(extended.token_bytes(static_cast<int>(id)) ==
                base.token_bytes(static_cast<int>(id)),
            "base id " + std::to_string(id) + " changed");
  const subword::TokenizerModel twice = subword::extend_vocab(extended, novel);
  require(twice.vocab_size() == extended.vocab_size() &&
              twice.added_tokens() == extended.added_tokens(),
          "extend_vocab is not idempotent");

  for (const auto& sentence : dialect_lines)
    require(extended.encode(sentence).size() <= base.encode(sentence).size(),
            "grafting lengthened a dialect sentence tokenization");

  // The structural properties hold for arbitrary model pairs as well.
  SplitMix64 rng(99);
  for (int iter = 0; iter < 5; ++iter) {
    const auto ca = testsupport::random_small_corpus(rng, 500);
    const auto cb = testsupport::random_small_corpus(rng, 500);
    const auto da = subword::train_bpe(ca, {290, 1});
    const auto bb = subword::train_bpe(cb, {290, 1});
    const auto diff = subword::vocab_diff(da, bb);
    const auto ext = subword::extend_vocab(bb, diff);
    require(subword::vocab_diff(da, ext).empty(), "random pair re-diff not empty");
    require(subword::extend_vocab(ext, diff).vocab_size() == ext.vocab_size(),
            "random pair extend not idempotent");
  }
}

// ---------------------------------------------------------------- criterion 4
void fig2_golden_prompt() {
  const std::string golden = testsupport::read_file(
      (std::filesystem::path(testsupport::golden_dir()) / "fig2_dg.txt").string());
  require(!golden.empty(), "golden file missing");

  const lexicon::Lexicon lex =
      lexicon::load_lexicon(testsupport::data_file("lexicon.tsv"));
  const std::string source = "আমি ওবায় "
                             "যাইনু";
  const auto glossary = lexicon::match_glossary(source, lex);
  require(glossary.size() == 3, "expected 3 glossary matches");
  require(glossary[0].gloss == "I" && glossary[1].gloss == "There" &&
              glossary[2].gloss == "Go",
          "glossary lines disagree with the stored entries");

  const promptkit::PromptBuilder builder =
      promptkit::PromptBuilder::from_assets(testsupport::asset_dir());
  const promptkit::RenderedPrompt p =
      builder.build_dg(source, "I'm going to go to him", glossary);
  require(p.text() == golden, "rendered DG prompt differs from the golden bytes");
}

// ---------------------------------------------------------------- criterion 5
void budget_enforcement() {
  const subword::TokenizerModel tok =
      subword::load_tokenizer(testsupport::data_file("base_tokenizer.json"));
  const promptkit::PromptBuilder builder =
      promptkit::PromptBuilder::from_assets(testsupport::asset_dir());
  const std::string source = "আমি ওবায়";
  const std::string hyp = "I went there";

  std::vector<lexicon::LexiconEntry> big;
  for (int i = 0; i < 150; ++i)
    big.push_back({"যাইনু" + std::to_string(i),
                   "glossary-filler-" + std::to_string(i)});
  const promptkit::RenderedPrompt over = builder.build_dg(source, hyp, big);
  require(tok.encode(over.text()).size() > 512, "constructed prompt not over budget");

  const promptkit::RenderedPrompt fit = promptkit::enforce_budget(builder, over, tok, 512);
  require(fit.token_count <= 512, "enforced prompt still over budget");
  require(fit.glossary_used.size() < big.size(), "nothing was dropped");
  for (std::size_t i = 0; i < fit.glossary_used.size(); ++i)
    require(fit.glossary_used[i].term == big[i].term, "survivors are not a prefix");
  require(builder.build_dg(source, hyp, fit.glossary_used).text() == fit.text(),
          "non-glossary sections changed under enforcement");

  // monotone: one more entry than the survivor set no longer fits
  {
    std::vector<lexicon::LexiconEntry> one_more(big.begin(),
                                                big.begin() + fit.glossary_used.size() + 1);
    require(tok.encode(builder.build_dg(source, hyp, one_more).text()).size() > 512,
            "shrink was not minimal");
  }

  std::string long_source;
  for (int i = 0; i < 400; ++i) long_source += "আমি ";
  const promptkit::RenderedPrompt bare = builder.build_plain(long_source, hyp);
  require(tok.encode(bare.text()).size() > 512, "glossary-free prompt unexpectedly fits");
  try {
    promptkit::enforce_budget(builder, bare, tok, 512);
    throw Failure("over-budget glossary-free prompt did not error");
  } catch (const Error& e) {
    require(e.kind() == ErrorKind::validation, "wrong error kind for over-budget");
    require(std::string(e.what()).find("exceeds token budget by") != std::string::npos,
            "overflow amount not named");
  }
}

// ---------------------------------------------------------------- criterion 6
void regression_head() {
  using namespace headtrain;
  SplitMix64 rng(777);

  // gradient check, 100 random instances
  for (int iter = 0; iter < 100; ++iter) {
    HeadConfig cfg;
    cfg.input_dim = 2 + rng.next_below(8);
    cfg.learning_rate = 1e-3;
    cfg.hidden_layer = iter % 4 == 0;
    cfg.hidden_dim = 4;
    cfg.seed = iter;
    RegressionHead head = make_head(cfg);
    for (auto& p : head.params) p = rng.next_double() * 2 - 1;

    const std::size_t batch = 1 + rng.next_below(5);
    std::vector<EmbeddingVector> xs(batch);
    std::vector<double> ys(batch);
    for (std::size_t k = 0; k < batch; ++k) {
      xs[k].values.resize(cfg.input_dim);
      for (auto& v : xs[k].values) v = rng.next_double() * 4 - 2;
      ys[k] = rng.next_double() * 2 - 1;
    }
    std::vector<double> grad;
    loss_and_grad(head, xs, ys, grad);

    auto loss_at = [&](RegressionHead& h) {
      std::vector<double> preds;
      for (const auto& x : xs) preds.push_back(forward(h, x));
      return mse(preds, ys);
    };
    for (std::size_t i = 0; i < head.params.size(); ++i) {
      RegressionHead hp = head, hm = head;
      hp.params[i] += 1e-6;
      hm.params[i] -= 1e-6;
      const double numeric = (loss_at(hp) - loss_at(hm)) / 2e-6;
      const double denom = std::max({std::abs(numeric), std::abs(grad[i]), 1e-8});
      require(std::abs(numeric - grad[i]) / denom < 1e-4,
              "gradient check failed at instance " + std::to_string(iter));
    }
  }

  // Adam first step against the hand-evaluated recurrence
  {
    HeadConfig cfg;
    cfg.input_dim = 4;
    RegressionHead head = make_head(cfg);
    adam_step(head, std::vector<double>{1, 1, 1, 1}, 1.0, cfg);
    const double expected = -cfg.learning_rate / (1.0 + cfg.adam_eps);
    for (double p : head.params)
      require_close(p, expected, 1e-9, "Adam first-step magnitude");
  }

  // noiseless linear recovery: 64 dims, 512 samples
  {
    HeadConfig cfg;
    cfg.input_dim = 64;
    cfg.learning_rate = 1e-2;
    cfg.epochs = 2000;
    cfg.batch_size = 512;
    cfg.seed = 7;

    std::vector<double> w_star(64);
    for (auto& w : w_star) w = rng.next_double() * 2 - 1;
    const double b_star = 0.3;
    std::vector<TrainSample> data(512);
    for (auto& s : data) {
      s.x.values.resize(64);
      double y = b_star;
      for (std::size_t i = 0; i < 64; ++i) {
        double g = 0;
        for (int k = 0; k < 4; ++k) g += rng.next_double();
        s.x.values[i] = (g - 2.0) * std::sqrt(3.0);
        y += w_star[i] * s.x.values[i];
      }
      s.gold = y;
    }
    RegressionHead head = make_head(cfg);
    const TrainTrace trace = train(head, data, cfg);
    require(trace.epoch_loss.back() < 1e-6,
            "synthetic linear task ended at loss " +
                std::to_string(trace.epoch_loss.back()));

    RegressionHead again = make_head(cfg);
    const TrainTrace trace2 = train(again, data, cfg);
    require(again.params == head.params && trace2.epoch_loss == trace.epoch_loss,
            "seeded training is not bit-reproducible");
  }
}

// ---------------------------------------------------------------- criterion 7
void normalization() {
  SplitMix64 rng(31);
  for (int iter = 0; iter < 1000; ++iter) {
    const std::size_t n = 2 + rng.next_below(80);
    auto v = testsupport::random_vector(rng, n, 0, 100);
    v[0] += 0.25;
    const auto z = corpus::z_normalize(v);

    double mean = 0;
    for (double x : z) mean += x;
    mean /= static_cast<double>(n);
    double var = 0;
    for (double x : z) var += (x - mean) * (x - mean);
    var /= static_cast<double>(n);
    require(std::abs(mean) < 1e-9, "z mean off");
    require(std::abs(std::sqrt(var) - 1.0) < 1e-9, "z std off");
    for (std::size_t i = 0; i + 1 < n; ++i)
      if (v[i] < v[i + 1])
        require(z[i] < z[i + 1], "order not preserved");
  }
  try {
    corpus::z_normalize({4, 4, 4, 4});
    throw Failure("degenerate input did not error");
  } catch (const Error& e) {
    require(e.kind() == ErrorKind::degenerate, "wrong degenerate error kind");
  }
}

// ---------------------------------------------------------------- criterion 8
void offline_end_to_end() {
  testsupport::TempDir tmp("acceptance");
  runner::RunConfig cfg;
  cfg.dataset_path = testsupport::data_file("sylheti_synth.tsv");
  cfg.lexicon_path = testsupport::data_file("lexicon.tsv");
  cfg.base_tokenizer_path = testsupport::data_file("base_tokenizer.json");
  cfg.dialect_corpus_path = testsupport::data_file("dialect_corpus.txt");
  cfg.assets_dir = testsupport::asset_dir();
  cfg.provider.base_url = "mock://1";
  cfg.provider.model_name = "mock-llm";
  cfg.provider.embedding_dim = 64;
  cfg.seeds = {1, 2, 3};
  cfg.train_count = 40;
  cfg.test_count = 20;
  cfg.dialect_tokenizer_spec = {1200, 2};
  cfg.head.learning_rate = 1e-3;
  cfg.head.epochs = 60;
  cfg.head.batch_size = 16;

  const auto reports1 = runner::run_ablation(cfg);
  require(reports1.size() == 4, "ablation did not produce four rows");
  runner::emit_ablation(reports1, tmp.file("runs1"));

  const auto reports2 = runner::run_ablation(cfg);
  runner::emit_ablation(reports2, tmp.file("runs2"));

  require(testsupport::read_file(tmp.file("runs1") + "/ablation.json") ==
              testsupport::read_file(tmp.file("runs2") + "/ablation.json"),
          "ablation.json differs across consecutive runs");
  require(testsupport::read_file(tmp.file("runs1") + "/ablation_table.txt") ==
              testsupport::read_file(tmp.file("runs2") + "/ablation_table.txt"),
          "ablation_table.txt differs across consecutive runs");

  auto bits = [](const runner::Toggles& t) {
    return std::vector<bool>{t.dialect_tokenizer, t.regression_head, t.dg_prompt};
  };
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i + 1; j < 4; ++j)
      require(reports1[i].fingerprint != reports1[j].fingerprint,
              "fingerprints not pairwise distinct");
  for (std::size_t i = 0; i + 1 < 4; ++i) {
    int changed = 0;
    for (int k = 0; k < 3; ++k)
      changed += bits(reports1[i].toggles)[k] != bits(reports1[i + 1].toggles)[k];
    require(changed == 1, "adjacent rows differ in more than one toggle");
  }
}

// ---------------------------------------------------------------- criterion 9
void score_parsing() {
  SplitMix64 rng(555);
  for (int iter = 0; iter < 10000; ++iter) {
    const double x = static_cast<double>(rng.next_below(1000001)) / 10000.0;
    const double parsed = modelgate::parse_score(modelgate::format_score(x));
    require(parsed == x, "format/parse round trip failed for " + std::to_string(x));
  }
  try {
    modelgate::parse_score("no score");
    throw Failure("'no score' did not error");
  } catch (const Error& e) {
    require(e.kind() == ErrorKind::score_parse, "wrong error kind");
  }
  require(modelgate::parse_score("out of 100, I give 40") == 100.0,
          "documented first-match behavior changed");
}

struct Criterion {
  const char* name;
  double budget_s;  // informative runtime bound from the acceptance list
  std::function<void()> body;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"C1 metric oracle suite", 5.0, metric_oracles},
      {"C2 BPE oracle equivalence", 60.0, bpe_oracle_equivalence},
      {"C3 vocabulary grafting", 0.0, vocabulary_grafting},
      {"C4 Fig 2 golden prompt", 0.0, fig2_golden_prompt},
      {"C5 budget enforcement", 0.0, budget_enforcement},
      {"C6 regression head", 0.0, regression_head},
      {"C7 normalization", 0.0, normalization},
      {"C8 offline end-to-end ablation", 120.0, offline_end_to_end},
      {"C9 score parsing", 0.0, score_parsing},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string error;
    try {
      c.body();
    } catch (const std::exception& e) {
      error = e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (error.empty() && c.budget_s > 0 && elapsed > c.budget_s)
      error = "runtime " + std::to_string(elapsed) + "s exceeds " +
              std::to_string(c.budget_s) + "s";
    if (error.empty()) {
      std::printf("[PASS] %-34s (%.2fs)\n", c.name, elapsed);
    } else {
      std::printf("[FAIL] %-34s (%.2fs): %s\n", c.name, elapsed, error.c_str());
      ++failures;
    }
  }
  if (failures) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
