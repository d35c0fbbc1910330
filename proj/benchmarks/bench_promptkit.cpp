#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "dialectqe/promptkit.hpp"
#include "dialectqe/subword.hpp"

using namespace dialectqe;
using namespace dialectqe::promptkit;

namespace {

const PromptBuilder& builder() {
  static const PromptBuilder b = PromptBuilder::from_assets(DIALECTQE_BENCH_ASSETS);
  return b;
}

std::vector<lexicon::LexiconEntry> glossary(std::size_t n) {
  std::vector<lexicon::LexiconEntry> g;
  for (std::size_t i = 0; i < n; ++i)
    g.push_back({"আমি" + std::to_string(i), "word-" + std::to_string(i)});
  return g;
}

}  // namespace

static void BM_BuildDg(benchmark::State& state) {
  const auto g = glossary(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    const RenderedPrompt p =
        builder().build_dg("আমি ওবায়",
                           "I went there", g);
    benchmark::DoNotOptimize(p.user_text.data());
  }
}
BENCHMARK(BM_BuildDg)->Arg(3)->Arg(50);

static void BM_EnforceBudget(benchmark::State& state) {
  const subword::TokenizerModel tok = subword::load_tokenizer(
      std::string(DIALECTQE_BENCH_DATA) + "/base_tokenizer.json");
  const auto g = glossary(static_cast<std::size_t>(state.range(0)));
  const RenderedPrompt p =
      builder().build_dg("আমি ওবায়",
                         "I went there", g);
  for (auto _ : state) {
    const RenderedPrompt fit = enforce_budget(builder(), p, tok, 512);
    benchmark::DoNotOptimize(fit.token_count);
  }
}
BENCHMARK(BM_EnforceBudget)->Arg(3)->Arg(120);

BENCHMARK_MAIN();
