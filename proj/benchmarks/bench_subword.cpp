#include <benchmark/benchmark.h>

#include <fstream>
#include <string>
#include <vector>

#include "dialectqe/subword.hpp"

using namespace dialectqe::subword;

namespace {

std::vector<std::string> load_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) lines.push_back(line);
  return lines;
}

const std::vector<std::string>& dialect_corpus() {
  static const auto lines =
      load_lines(std::string(DIALECTQE_BENCH_DATA) + "/dialect_corpus.txt");
  return lines;
}

}  // namespace

static void BM_TrainBpe(benchmark::State& state) {
  const auto& corpus = dialect_corpus();
  const TrainSpec spec{static_cast<std::size_t>(state.range(0)), 2};
  for (auto _ : state) {
    TokenizerModel model = train_bpe(corpus, spec);
    benchmark::DoNotOptimize(model.vocab_size());
  }
}
BENCHMARK(BM_TrainBpe)->Arg(512)->Arg(1200);

static void BM_Encode(benchmark::State& state) {
  const TokenizerModel model = train_bpe(dialect_corpus(), {1200, 2});
  std::string text;
  for (std::size_t i = 0; i < 8 && i < dialect_corpus().size(); ++i)
    text += dialect_corpus()[i] + " ";
  std::size_t total = 0;
  for (auto _ : state) {
    const auto ids = model.encode(text);
    total += ids.size();
    benchmark::DoNotOptimize(ids.data());
  }
  state.SetBytesProcessed(static_cast<int64_t>(state.iterations() * text.size()));
  benchmark::DoNotOptimize(total);
}
BENCHMARK(BM_Encode);

static void BM_EncodeWithAddedTokens(benchmark::State& state) {
  const TokenizerModel dialect = train_bpe(dialect_corpus(), {1200, 2});
  TokenizerModel base = train_bpe({dialect_corpus().front()}, {300, 1});
  const TokenizerModel extended = extend_vocab(base, vocab_diff(dialect, base));
  std::string text;
  for (std::size_t i = 0; i < 8 && i < dialect_corpus().size(); ++i)
    text += dialect_corpus()[i] + " ";
  for (auto _ : state) {
    const auto ids = extended.encode(text);
    benchmark::DoNotOptimize(ids.data());
  }
  state.SetBytesProcessed(static_cast<int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_EncodeWithAddedTokens);

BENCHMARK_MAIN();
