#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

#include "dialectqe/chat.hpp"
#include "dialectqe/embedding.hpp"
#include "dialectqe/subword.hpp"

namespace dialectqe::modelgate {

struct ProviderConfig {
  // http(s)://host[:port][/prefix] for OpenAI-compatible servers, or
  // mock://<seed> for the deterministic offline provider.
  std::string base_url = "mock://1";
  std::string model_name = "default";
  double timeout_s = 30.0;
  int max_retries = 2;
  double temperature = 0.0;
  int max_tokens = 16;            // completion cap when asking for a score
  std::size_t embedding_dim = 0;  // expected dim; 0 accepts whatever arrives
  double initial_backoff_s = 1.0; // doubles per retry, +/-20% jitter
  int concurrency = 4;            // in-flight request bound
  std::string api_key_env = "DIALECTQE_API_KEY";
};

struct ChatScore {
  std::string raw_text;
  double score = 0.0;
};

// First in-range decimal number in the text; candidates outside [0,100] are
// skipped in favor of the next one. No usable number is a score_parse error.
double parse_score(std::string_view text);

// Canonical score formatting: up to four decimals, trailing zeros trimmed.
// parse_score(format_score(x)) == x for any x in [0,100] with <= 4 decimals.
std::string format_score(double value);

// Uniform provider client. Immutable after construction and safe to share
// across threads; concurrent requests are bounded by config().concurrency.
class Client {
public:
  // The tokenizer, when given, keys the mock provider on token ids instead of
  // raw prompt bytes, so vocabulary changes show up in offline runs. HTTP
  // providers tokenize server-side and ignore it.
  explicit Client(ProviderConfig cfg,
                  std::shared_ptr<const subword::TokenizerModel> tokenizer = nullptr);
  ~Client();
  Client(Client&&) noexcept;
  Client& operator=(Client&&) noexcept;

  ChatScore chat_score(const ChatMessages& messages) const;
  EmbeddingVector embed(const std::string& text, Pooling pooling = Pooling::mean) const;

  const ProviderConfig& config() const;
  bool is_mock() const;
  // Stable identity for cache keys and report provenance.
  std::string identity() const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace dialectqe::modelgate
