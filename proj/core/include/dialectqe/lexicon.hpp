#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace dialectqe::lexicon {

struct LexiconEntry {
  std::string term;   // dialect word, normalized form is the lookup key
  std::string gloss;  // English equivalent
};

// Ordered dialect-term -> gloss dictionary. Immutable after load; safe for
// concurrent lookups.
class Lexicon {
public:
  Lexicon() = default;
  explicit Lexicon(std::vector<LexiconEntry> entries);

  const std::vector<LexiconEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  // Lookup by normalized term; nullptr when absent.
  const LexiconEntry* find(std::string_view normalized_term) const;

  // Entries whose normalized term duplicated an earlier one (first wins).
  const std::vector<std::string>& duplicate_warnings() const { return warnings_; }

private:
  std::vector<LexiconEntry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::string> warnings_;
};

// `term<TAB>gloss` per line, UTF-8; '#'-prefixed lines are comments.
Lexicon load_lexicon(const std::string& path);

// NFC composition plus leading/trailing punctuation and symbol stripping.
// Bengali script has no case, so no folding is applied.
std::string normalize_token(std::string_view raw);

// Whitespace-split the sentence, normalize each token, return the entry for
// every match: first-occurrence order, duplicates removed.
std::vector<LexiconEntry> match_glossary(std::string_view source, const Lexicon& lex);

}  // namespace dialectqe::lexicon
