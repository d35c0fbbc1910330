#include "dialectqe/subword.hpp"

#include <algorithm>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "dialectqe/errors.hpp"
#include "dialectqe/textnorm.hpp"

namespace dialectqe::subword {

namespace {

using nlohmann::json;

constexpr int kByteAlphabetSize = 256;
constexpr int kFormatVersion = 1;
constexpr const char* kFormatTag = "dialectqe-tokenizer";

std::uint64_t pack_pair(int left, int right) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(left)) << 32) |
         static_cast<std::uint32_t>(right);
}

// Conventional printable remapping: bytes that are visible characters map to
// themselves, the rest map to U+0100.. in byte order. Keeps the serialized
// artifact readable while the in-memory tokens stay raw bytes.
const std::vector<char32_t>& byte_to_char_table() {
  static const std::vector<char32_t> table = [] {
    std::vector<char32_t> t(256, 0);
    std::vector<bool> direct(256, false);
    for (int b = 33; b <= 126; ++b) direct[b] = true;
    for (int b = 161; b <= 172; ++b) direct[b] = true;
    for (int b = 174; b <= 255; ++b) direct[b] = true;
    char32_t next = 256;
    for (int b = 0; b < 256; ++b)
      t[b] = direct[b] ? static_cast<char32_t>(b) : next++;
    return t;
  }();
  return table;
}

void append_utf8(std::string& out, char32_t c) {
  if (c < 0x80) {
    out.push_back(static_cast<char>(c));
  } else if (c < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (c >> 6)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xE0 | (c >> 12)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  }
}

std::string bytes_to_printable(std::string_view raw) {
  const auto& table = byte_to_char_table();
  std::string out;
  out.reserve(raw.size() * 2);
  for (unsigned char b : raw) append_utf8(out, table[b]);
  return out;
}

std::string printable_to_bytes(std::string_view printable) {
  static const std::unordered_map<char32_t, unsigned char> reverse = [] {
    std::unordered_map<char32_t, unsigned char> m;
    const auto& table = byte_to_char_table();
    for (int b = 0; b < 256; ++b) m.emplace(table[b], static_cast<unsigned char>(b));
    return m;
  }();

  std::string out;
  std::size_t i = 0;
  while (i < printable.size()) {
    const unsigned char c0 = static_cast<unsigned char>(printable[i]);
    char32_t cp = 0;
    std::size_t len = 1;
    if (c0 < 0x80) {
      cp = c0;
    } else if ((c0 & 0xE0) == 0xC0 && i + 1 < printable.size()) {
      cp = static_cast<char32_t>((c0 & 0x1F) << 6 |
                                 (static_cast<unsigned char>(printable[i + 1]) & 0x3F));
      len = 2;
    } else if ((c0 & 0xF0) == 0xE0 && i + 2 < printable.size()) {
      cp = static_cast<char32_t>(
          (c0 & 0x0F) << 12 |
          (static_cast<unsigned char>(printable[i + 1]) & 0x3F) << 6 |
          (static_cast<unsigned char>(printable[i + 2]) & 0x3F));
      len = 3;
    } else {
      raise(ErrorKind::format, "corrupt tokenizer file: bad token encoding");
    }
    auto it = reverse.find(cp);
    if (it == reverse.end())
      raise(ErrorKind::format, "corrupt tokenizer file: unmapped character in token");
    out.push_back(static_cast<char>(it->second));
    i += len;
  }
  return out;
}

// Merges every non-overlapping occurrence of (left, right) left to right.
void apply_merge(std::vector<int>& seq, int left, int right, int merged) {
  std::size_t w = 0;
  std::size_t r = 0;
  while (r < seq.size()) {
    if (r + 1 < seq.size() && seq[r] == left && seq[r + 1] == right) {
      seq[w++] = merged;
      r += 2;
    } else {
      seq[w++] = seq[r++];
    }
  }
  seq.resize(w);
}

}  // namespace

TokenizerModel::TokenizerModel() {
  tokens_.reserve(kByteAlphabetSize);
  for (int b = 0; b < kByteAlphabetSize; ++b) {
    tokens_.emplace_back(1, static_cast<char>(b));
    vocab_.emplace(tokens_.back(), b);
  }
}

std::optional<int> TokenizerModel::token_id(std::string_view token) const {
  auto it = vocab_.find(std::string(token));
  if (it == vocab_.end()) return std::nullopt;
  return it->second;
}

const std::string& TokenizerModel::token_bytes(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size())
    raise(ErrorKind::validation, "unknown token id " + std::to_string(id));
  return tokens_[static_cast<std::size_t>(id)];
}

void TokenizerModel::push_merge(int left, int right) {
  const int id = static_cast<int>(tokens_.size());
  tokens_.push_back(tokens_[static_cast<std::size_t>(left)] +
                    tokens_[static_cast<std::size_t>(right)]);
  vocab_.emplace(tokens_.back(), id);
  merge_rank_.emplace(pack_pair(left, right), static_cast<int>(merges_.size()));
  merges_.emplace_back(left, right);
}

void TokenizerModel::push_added(const std::string& token) {
  const int id = static_cast<int>(tokens_.size());
  tokens_.push_back(token);
  vocab_.emplace(token, id);
  added_.push_back(token);
}

void TokenizerModel::rebuild_added_matcher() {
  added_by_length_.resize(added_.size());
  for (std::size_t i = 0; i < added_.size(); ++i)
    added_by_length_[i] = static_cast<int>(i);
  std::sort(added_by_length_.begin(), added_by_length_.end(), [this](int a, int b) {
    const std::string& ta = added_[static_cast<std::size_t>(a)];
    const std::string& tb = added_[static_cast<std::size_t>(b)];
    if (ta.size() != tb.size()) return ta.size() > tb.size();
    return ta < tb;
  });
}

std::vector<int> TokenizerModel::bpe_encode_span(std::string_view bytes) const {
  std::vector<int> seq;
  seq.reserve(bytes.size());
  for (unsigned char b : bytes) seq.push_back(b);

  while (seq.size() > 1) {
    int best_rank = std::numeric_limits<int>::max();
    int best_left = -1, best_right = -1;
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
      auto it = merge_rank_.find(pack_pair(seq[i], seq[i + 1]));
      if (it != merge_rank_.end() && it->second < best_rank) {
        best_rank = it->second;
        best_left = seq[i];
        best_right = seq[i + 1];
      }
    }
    if (best_left < 0) break;
    // Merge products always precede added tokens in id space, so the token
    // created by merge r is exactly id 256 + r.
    apply_merge(seq, best_left, best_right, kByteAlphabetSize + best_rank);
  }
  return seq;
}

std::vector<int> TokenizerModel::encode(std::string_view text) const {
  if (text.empty()) return {};
  if (added_.empty()) return bpe_encode_span(text);

  // Grafted tokens match greedily as whole units (leftmost, longest) before
  // byte-level BPE sees the remainder.
  std::vector<int> out;
  std::size_t span_start = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    int matched = -1;
    for (int idx : added_by_length_) {
      const std::string& tok = added_[static_cast<std::size_t>(idx)];
      if (tok.size() <= text.size() - i &&
          text.compare(i, tok.size(), tok) == 0) {
        matched = idx;
        break;
      }
    }
    if (matched >= 0) {
      if (span_start < i) {
        const std::vector<int> span = bpe_encode_span(text.substr(span_start, i - span_start));
        out.insert(out.end(), span.begin(), span.end());
      }
      const std::string& tok = added_[static_cast<std::size_t>(matched)];
      out.push_back(*token_id(tok));
      i += tok.size();
      span_start = i;
    } else {
      ++i;
    }
  }
  if (span_start < text.size()) {
    const std::vector<int> span = bpe_encode_span(text.substr(span_start));
    out.insert(out.end(), span.begin(), span.end());
  }
  return out;
}

TokenizerModel::Decoded TokenizerModel::decode(const std::vector<int>& ids) const {
  std::string bytes;
  for (int id : ids) bytes += token_bytes(id);
  Decoded d;
  d.text = textnorm::sanitize_utf8(bytes, d.lossy);
  return d;
}

TokenizerModel train_bpe(const std::vector<std::string>& corpus, const TrainSpec& spec) {
  if (corpus.empty())
    raise(ErrorKind::validation, "train_bpe: empty corpus");
  if (spec.target_vocab_size < kByteAlphabetSize)
    raise(ErrorKind::validation, "train_bpe: target_vocab_size below byte alphabet (256)");
  if (spec.min_pair_frequency < 1)
    raise(ErrorKind::validation, "train_bpe: min_pair_frequency must be positive");

  TokenizerModel model;
  std::vector<std::vector<int>> seqs;
  seqs.reserve(corpus.size());
  for (const auto& s : corpus) {
    std::vector<int> seq;
    seq.reserve(s.size());
    for (unsigned char b : s) seq.push_back(b);
    seqs.push_back(std::move(seq));
  }

  std::unordered_map<std::uint64_t, std::size_t> counts;
  while (model.vocab_size() < spec.target_vocab_size) {
    counts.clear();
    for (const auto& seq : seqs) {
      for (std::size_t i = 0; i + 1 < seq.size(); ++i)
        ++counts[pack_pair(seq[i], seq[i + 1])];
    }
    if (counts.empty()) break;

    // Highest count first; ties go to the lexicographically smallest
    // (left, right) byte-string pair so training is reproducible.
    std::size_t best_count = 0;
    int best_left = -1, best_right = -1;
    for (const auto& [packed, count] : counts) {
      if (count < best_count) continue;
      const int left = static_cast<int>(packed >> 32);
      const int right = static_cast<int>(packed & 0xFFFFFFFFULL);
      if (count > best_count) {
        best_count = count;
        best_left = left;
        best_right = right;
        continue;
      }
      const std::string& bl = model.tokens()[static_cast<std::size_t>(best_left)];
      const std::string& br = model.tokens()[static_cast<std::size_t>(best_right)];
      const std::string& nl = model.tokens()[static_cast<std::size_t>(left)];
      const std::string& nr = model.tokens()[static_cast<std::size_t>(right)];
      if (std::tie(nl, nr) < std::tie(bl, br)) {
        best_left = left;
        best_right = right;
      }
    }
    if (best_count < spec.min_pair_frequency) break;

    const int merged = static_cast<int>(model.vocab_size());
    model.push_merge(best_left, best_right);
    for (auto& seq : seqs) apply_merge(seq, best_left, best_right, merged);
  }
  return model;
}

std::vector<std::string> vocab_diff(const TokenizerModel& dialect,
                                    const TokenizerModel& base) {
  std::vector<std::string> out;
  for (std::size_t id = kByteAlphabetSize; id < dialect.vocab_size(); ++id) {
    const std::string& tok = dialect.tokens()[id];
    if (!base.token_id(tok)) out.push_back(tok);
  }
  return out;
}

TokenizerModel extend_vocab(const TokenizerModel& base,
                            const std::vector<std::string>& new_tokens) {
  for (const auto& tok : new_tokens) {
    if (tok.empty())
      raise(ErrorKind::validation, "extend_vocab: empty token string");
  }
  TokenizerModel out = base;
  for (const auto& tok : new_tokens) {
    if (out.token_id(tok)) continue;
    out.push_added(tok);
  }
  out.rebuild_added_matcher();
  return out;
}

void save_tokenizer(const TokenizerModel& model, const std::string& path) {
  json doc;
  doc["format"] = kFormatTag;
  doc["version"] = kFormatVersion;

  json vocab = json::object();
  for (std::size_t id = 0; id < model.vocab_size(); ++id)
    vocab[bytes_to_printable(model.tokens()[id])] = id;
  doc["vocab"] = std::move(vocab);

  json merges = json::array();
  for (const auto& [left, right] : model.merges())
    merges.push_back(bytes_to_printable(model.token_bytes(left)) + " " +
                     bytes_to_printable(model.token_bytes(right)));
  doc["merges"] = std::move(merges);

  json added = json::array();
  for (const auto& tok : model.added_tokens())
    added.push_back(bytes_to_printable(tok));
  doc["added_tokens"] = std::move(added);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    raise(ErrorKind::io, "cannot write tokenizer file: " + path);
  out << doc.dump(1, '\t') << "\n";
  if (!out)
    raise(ErrorKind::io, "short write on tokenizer file: " + path);
}

TokenizerModel load_tokenizer(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    raise(ErrorKind::io, "cannot open tokenizer file: " + path);

  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object())
    raise(ErrorKind::format, "corrupt tokenizer file: " + path);
  if (doc.value("format", "") != kFormatTag)
    raise(ErrorKind::format, "not a tokenizer file: " + path);
  if (!doc.contains("version") || !doc["version"].is_number_integer())
    raise(ErrorKind::format, "corrupt tokenizer file: missing version");
  if (doc["version"].get<int>() != kFormatVersion)
    raise(ErrorKind::format,
          "unsupported tokenizer format version " + doc["version"].dump());
  if (!doc.contains("vocab") || !doc["vocab"].is_object() ||
      !doc.contains("merges") || !doc["merges"].is_array() ||
      !doc.contains("added_tokens") || !doc["added_tokens"].is_array())
    raise(ErrorKind::format, "corrupt tokenizer file: missing sections");

  // Rebuild id-ordered token list and check density.
  std::vector<std::string> by_id(doc["vocab"].size());
  for (const auto& [printable, id_json] : doc["vocab"].items()) {
    if (!id_json.is_number_integer())
      raise(ErrorKind::format, "corrupt tokenizer file: non-integer id");
    const long long id = id_json.get<long long>();
    if (id < 0 || static_cast<std::size_t>(id) >= by_id.size())
      raise(ErrorKind::format, "corrupt tokenizer file: ids not dense");
    by_id[static_cast<std::size_t>(id)] = printable_to_bytes(printable);
  }
  if (by_id.size() < kByteAlphabetSize)
    raise(ErrorKind::format, "corrupt tokenizer file: vocab smaller than byte alphabet");
  for (int b = 0; b < kByteAlphabetSize; ++b) {
    if (by_id[static_cast<std::size_t>(b)] != std::string(1, static_cast<char>(b)))
      raise(ErrorKind::format, "corrupt tokenizer file: byte alphabet mismatch");
  }

  TokenizerModel model;
  std::unordered_map<std::string, int> lookup = model.vocab_;

  std::vector<std::string> added;
  for (const auto& tok : doc["added_tokens"])
    added.push_back(printable_to_bytes(tok.get<std::string>()));
  std::unordered_map<std::string, bool> is_added;
  for (const auto& tok : added) is_added[tok] = true;

  std::size_t next_id = kByteAlphabetSize;
  for (const auto& line : doc["merges"]) {
    const std::string pair = line.get<std::string>();
    const std::size_t space = pair.find(' ');
    if (space == std::string::npos)
      raise(ErrorKind::format, "corrupt tokenizer file: bad merge line");
    const std::string left = printable_to_bytes(pair.substr(0, space));
    const std::string right = printable_to_bytes(pair.substr(space + 1));
    auto li = lookup.find(left);
    auto ri = lookup.find(right);
    if (li == lookup.end() || ri == lookup.end())
      raise(ErrorKind::format, "corrupt tokenizer file: merge references unknown token");
    if (next_id >= by_id.size() || by_id[next_id] != left + right)
      raise(ErrorKind::format, "corrupt tokenizer file: merges disagree with vocab");
    model.push_merge(li->second, ri->second);
    lookup.emplace(by_id[next_id], static_cast<int>(next_id));
    ++next_id;
  }
  for (const auto& tok : added) {
    if (next_id >= by_id.size() || by_id[next_id] != tok)
      raise(ErrorKind::format, "corrupt tokenizer file: added tokens disagree with vocab");
    model.push_added(tok);
    ++next_id;
  }
  if (next_id != by_id.size())
    raise(ErrorKind::format, "corrupt tokenizer file: unreferenced vocab entries");
  model.rebuild_added_matcher();
  return model;
}

}  // namespace dialectqe::subword
