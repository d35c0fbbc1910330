#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace dialectqe::subword {

struct TrainSpec {
  std::size_t target_vocab_size = 4000;
  std::size_t min_pair_frequency = 2;
};

// Byte-level BPE model: ids 0..255 are the raw byte alphabet, each merge
// appends one token, grafted tokens are appended after with fresh ids.
// Immutable after construction; encode/decode are safe to call concurrently.
class TokenizerModel {
public:
  using MergePair = std::pair<int, int>;  // token ids of (left, right)

  // Bare byte alphabet, no merges.
  TokenizerModel();

  std::size_t vocab_size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::vector<MergePair>& merges() const { return merges_; }
  const std::vector<std::string>& added_tokens() const { return added_; }

  std::optional<int> token_id(std::string_view token) const;
  const std::string& token_bytes(int id) const;

  std::vector<int> encode(std::string_view text) const;

  struct Decoded {
    std::string text;
    bool lossy = false;  // replacement characters were substituted
  };
  Decoded decode(const std::vector<int>& ids) const;

private:
  friend TokenizerModel train_bpe(const std::vector<std::string>&, const TrainSpec&);
  friend TokenizerModel extend_vocab(const TokenizerModel&, const std::vector<std::string>&);
  friend TokenizerModel load_tokenizer(const std::string&);

  void push_merge(int left, int right);
  void push_added(const std::string& token);
  void rebuild_added_matcher();
  std::vector<int> bpe_encode_span(std::string_view bytes) const;

  std::vector<std::string> tokens_;                 // id -> raw bytes
  std::unordered_map<std::string, int> vocab_;      // raw bytes -> id
  std::vector<MergePair> merges_;                   // training order
  std::unordered_map<std::uint64_t, int> merge_rank_;  // packed pair -> rank
  std::vector<std::string> added_;                  // grafted tokens, longest-first
  std::vector<int> added_by_length_;                // match order into added_
};

// Sequence-level byte BPE: each corpus string is one byte sequence, the most
// frequent adjacent pair is merged until target_vocab_size is reached or no
// pair meets min_pair_frequency. Frequency ties pick the lexicographically
// smallest (left, right) byte-string pair.
TokenizerModel train_bpe(const std::vector<std::string>& corpus, const TrainSpec& spec);

// Tokens present in `dialect` but absent from `base`, in dialect-id order,
// byte alphabet excluded.
std::vector<std::string> vocab_diff(const TokenizerModel& dialect,
                                    const TokenizerModel& base);

// Appends novel tokens as added tokens with fresh consecutive ids. Existing
// ids never move; extending twice with the same list is a no-op.
TokenizerModel extend_vocab(const TokenizerModel& base,
                            const std::vector<std::string>& new_tokens);

// Single-document UTF-8 artifact: format tag, version, vocab map, merges in
// training order, added-token list. Byte content is stored through the
// conventional printable byte-to-character table.
void save_tokenizer(const TokenizerModel& model, const std::string& path);
TokenizerModel load_tokenizer(const std::string& path);

}  // namespace dialectqe::subword
