#include "dialectqe/modelgate.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <semaphore>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "dialectqe/errors.hpp"
#include "dialectqe/rng.hpp"

namespace dialectqe::modelgate {

namespace {

using nlohmann::json;

constexpr std::size_t kDefaultMockDim = 64;

std::string concat_messages(const ChatMessages& messages) {
  std::string out;
  for (const auto& m : messages) out += m.content;
  return out;
}

std::string excerpt(std::string_view text, std::size_t limit = 160) {
  if (text.size() <= limit) return std::string(text);
  return std::string(text.substr(0, limit)) + "...";
}

}  // namespace

double parse_score(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size()) {
    const bool neg = text[i] == '-' && i + 1 < text.size() &&
                     std::isdigit(static_cast<unsigned char>(text[i + 1]));
    if (!neg && !std::isdigit(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i + (neg ? 1 : 0);
    while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
    if (j < text.size() && text[j] == '.' && j + 1 < text.size() &&
        std::isdigit(static_cast<unsigned char>(text[j + 1]))) {
      ++j;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
    }
    const std::string token(text.substr(i, j - i));
    const double value = std::strtod(token.c_str(), nullptr);
    if (value >= 0.0 && value <= 100.0) return value;
    i = j;  // out-of-range candidate skipped, keep scanning
  }
  raise(ErrorKind::score_parse,
        "no score in [0,100] found in completion: \"" + excerpt(text) + "\"");
}

std::string format_score(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", value);
  std::string s(buf);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

struct Client::Impl {
  ProviderConfig cfg;
  std::shared_ptr<const subword::TokenizerModel> tokenizer;
  bool mock = false;
  std::uint64_t mock_seed = 0;
  std::string http_origin;  // scheme://host[:port]
  std::string path_prefix;  // optional path under the origin
  mutable std::counting_semaphore<4096> slots{1};

  explicit Impl(ProviderConfig c, std::shared_ptr<const subword::TokenizerModel> tok)
      : cfg(std::move(c)), tokenizer(std::move(tok)),
        slots(std::max(1, cfg.concurrency)) {
    if (cfg.timeout_s <= 0)
      raise(ErrorKind::config, "provider timeout must be positive");
    if (cfg.max_retries < 0)
      raise(ErrorKind::config, "provider max_retries must be >= 0");

    if (cfg.base_url.rfind("mock://", 0) == 0) {
      mock = true;
      const std::string seed_text = cfg.base_url.substr(7);
      auto [ptr, ec] = std::from_chars(seed_text.data(),
                                       seed_text.data() + seed_text.size(), mock_seed);
      if (ec != std::errc{} || ptr != seed_text.data() + seed_text.size())
        raise(ErrorKind::config, "mock provider url needs a numeric seed: " + cfg.base_url);
      return;
    }
    if (cfg.base_url.rfind("http://", 0) != 0 && cfg.base_url.rfind("https://", 0) != 0)
      raise(ErrorKind::config, "unsupported provider url: " + cfg.base_url);
    const std::size_t scheme_end = cfg.base_url.find("://") + 3;
    const std::size_t slash = cfg.base_url.find('/', scheme_end);
    if (slash == std::string::npos) {
      http_origin = cfg.base_url;
    } else {
      http_origin = cfg.base_url.substr(0, slash);
      path_prefix = cfg.base_url.substr(slash);
      while (!path_prefix.empty() && path_prefix.back() == '/') path_prefix.pop_back();
    }
  }

  struct SlotGuard {
    std::counting_semaphore<4096>& sem;
    explicit SlotGuard(std::counting_semaphore<4096>& s) : sem(s) { sem.acquire(); }
    ~SlotGuard() { sem.release(); }
  };

  std::uint64_t key_for(const std::string& text) const {
    std::uint64_t h;
    if (tokenizer) {
      const std::vector<int> ids = tokenizer->encode(text);
      std::string bytes;
      bytes.reserve(ids.size() * 4);
      for (int id : ids) {
        const auto u = static_cast<std::uint32_t>(id);
        bytes.push_back(static_cast<char>(u & 0xFF));
        bytes.push_back(static_cast<char>((u >> 8) & 0xFF));
        bytes.push_back(static_cast<char>((u >> 16) & 0xFF));
        bytes.push_back(static_cast<char>((u >> 24) & 0xFF));
      }
      h = fnv1a64(bytes);
    } else {
      h = fnv1a64(text);
    }
    return h ^ mock_seed;
  }

  ChatScore mock_chat(const ChatMessages& messages) const {
    const std::string text = concat_messages(messages);
    const std::uint64_t u = SplitMix64(key_for(text)).next();
    const double value = static_cast<double>(u % 10001) / 100.0;
    ChatScore out;
    out.raw_text = format_score(value);
    out.score = parse_score(out.raw_text);
    return out;
  }

  EmbeddingVector mock_embed(const std::string& text) const {
    const std::size_t dim = cfg.embedding_dim ? cfg.embedding_dim : kDefaultMockDim;
    SplitMix64 stream(key_for(text));
    EmbeddingVector v;
    v.values.reserve(dim);
    double norm_sq = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      const double x = stream.next_double() * 2.0 - 1.0;
      v.values.push_back(x);
      norm_sq += x * x;
    }
    if (norm_sq == 0.0) {
      v.values[0] = 1.0;
      norm_sq = 1.0;
    }
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (double& x : v.values) x *= inv;
    v.source_text_hash = fnv1a64(text);
    return v;
  }

  json post_json(const std::string& path, const json& body) const {
    SlotGuard guard(slots);

    httplib::Headers headers;
    const char* key = std::getenv(cfg.api_key_env.c_str());
    if (!key || !*key) key = std::getenv("OPENAI_API_KEY");
    if (key && *key) headers.emplace("Authorization", std::string("Bearer ") + key);

    const std::string payload = body.dump();
    std::string last_error = "unknown transport failure";
    std::mt19937_64 jitter_rng(std::random_device{}());
    std::uniform_real_distribution<double> jitter(0.8, 1.2);

    for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
      if (attempt > 0) {
        const double delay =
            cfg.initial_backoff_s * std::pow(2.0, attempt - 1) * jitter(jitter_rng);
        std::this_thread::sleep_for(std::chrono::duration<double>(delay));
      }
      httplib::Client http(http_origin);
      http.set_connection_timeout(std::chrono::duration<double>(cfg.timeout_s));
      http.set_read_timeout(std::chrono::duration<double>(cfg.timeout_s));
      http.set_write_timeout(std::chrono::duration<double>(cfg.timeout_s));

      httplib::Result res =
          http.Post(path_prefix + path, headers, payload, "application/json");
      if (!res) {
        last_error = httplib::to_string(res.error());
        continue;  // transport-level failure, retry
      }
      if (res->status < 200 || res->status >= 300)
        raise(ErrorKind::provider,
              "provider returned HTTP " + std::to_string(res->status) + " for " + path +
                  ": " + excerpt(res->body));
      json doc = json::parse(res->body, nullptr, false);
      if (doc.is_discarded())
        raise(ErrorKind::provider, "provider returned non-JSON body for " + path);
      return doc;
    }
    raise(ErrorKind::transport,
          "request to " + http_origin + path + " failed after " +
              std::to_string(cfg.max_retries + 1) + " attempts: " + last_error);
  }

  ChatScore http_chat(const ChatMessages& messages) const {
    json body;
    body["model"] = cfg.model_name;
    body["temperature"] = cfg.temperature;
    body["max_tokens"] = cfg.max_tokens;
    json msgs = json::array();
    for (const auto& m : messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
    body["messages"] = std::move(msgs);

    const json doc = post_json("/v1/chat/completions", body);
    if (!doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty())
      raise(ErrorKind::provider, "chat completion response has no choices");
    const auto& first = doc["choices"][0];
    if (!first.contains("message") || !first["message"].contains("content") ||
        !first["message"]["content"].is_string())
      raise(ErrorKind::provider, "chat completion response has no message content");

    ChatScore out;
    out.raw_text = first["message"]["content"].get<std::string>();
    out.score = parse_score(out.raw_text);
    return out;
  }

  EmbeddingVector http_embed(const std::string& text, Pooling pooling) const {
    json body;
    body["model"] = cfg.model_name;
    body["input"] = text;

    const json doc = post_json("/v1/embeddings", body);
    if (!doc.contains("data") || !doc["data"].is_array() || doc["data"].empty() ||
        !doc["data"][0].contains("embedding"))
      raise(ErrorKind::provider, "embeddings response has no data[0].embedding");

    const auto& emb = doc["data"][0]["embedding"];
    EmbeddingVector out;
    if (emb.is_array() && !emb.empty() && emb[0].is_array()) {
      // Per-token vectors; pool client-side.
      std::vector<EmbeddingVector> per_token;
      for (const auto& row : emb) {
        EmbeddingVector v;
        for (const auto& x : row) v.values.push_back(x.get<double>());
        per_token.push_back(std::move(v));
      }
      out = pool(per_token, pooling);
    } else {
      for (const auto& x : emb) out.values.push_back(x.get<double>());
    }
    out.source_text_hash = fnv1a64(text);
    return out;
  }
};

Client::Client(ProviderConfig cfg, std::shared_ptr<const subword::TokenizerModel> tokenizer)
    : impl_(std::make_unique<Impl>(std::move(cfg), std::move(tokenizer))) {}

Client::~Client() = default;
Client::Client(Client&&) noexcept = default;
Client& Client::operator=(Client&&) noexcept = default;

ChatScore Client::chat_score(const ChatMessages& messages) const {
  return impl_->mock ? impl_->mock_chat(messages) : impl_->http_chat(messages);
}

EmbeddingVector Client::embed(const std::string& text, Pooling pooling) const {
  EmbeddingVector v =
      impl_->mock ? impl_->mock_embed(text) : impl_->http_embed(text, pooling);
  for (double x : v.values) {
    if (!std::isfinite(x))
      raise(ErrorKind::provider, "embedding contains a non-finite value");
  }
  if (impl_->cfg.embedding_dim && v.dim() != impl_->cfg.embedding_dim)
    raise(ErrorKind::dimension,
          "provider embedding dim " + std::to_string(v.dim()) +
              " does not match configured dim " +
              std::to_string(impl_->cfg.embedding_dim));
  return v;
}

const ProviderConfig& Client::config() const { return impl_->cfg; }

bool Client::is_mock() const { return impl_->mock; }

std::string Client::identity() const {
  return impl_->cfg.base_url + "|" + impl_->cfg.model_name;
}

}  // namespace dialectqe::modelgate
