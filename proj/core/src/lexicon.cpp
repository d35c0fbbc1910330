#include "dialectqe/lexicon.hpp"

#include <fstream>
#include <unordered_set>

#include "dialectqe/errors.hpp"
#include "dialectqe/textnorm.hpp"

namespace dialectqe::lexicon {

Lexicon::Lexicon(std::vector<LexiconEntry> raw) {
  for (auto& e : raw) {
    const std::string key = normalize_token(e.term);
    if (key.empty()) {
      warnings_.push_back("entry with empty normalized term dropped: '" + e.term + "'");
      continue;
    }
    auto [it, inserted] = index_.emplace(key, entries_.size());
    if (!inserted) {
      warnings_.push_back("duplicate term '" + key + "' (keeping first)");
      continue;
    }
    entries_.push_back(std::move(e));
  }
}

const LexiconEntry* Lexicon::find(std::string_view normalized_term) const {
  auto it = index_.find(std::string(normalized_term));
  return it == index_.end() ? nullptr : &entries_[it->second];
}

Lexicon load_lexicon(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    raise(ErrorKind::io, "cannot open lexicon file: " + path);

  std::vector<LexiconEntry> raw;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string_view trimmed = textnorm::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;

    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos)
      raise(ErrorKind::parse,
            path + ":" + std::to_string(line_no) + ": expected 'term<TAB>gloss'");
    LexiconEntry e;
    e.term = std::string(textnorm::trim(line.substr(0, tab)));
    e.gloss = std::string(textnorm::trim(line.substr(tab + 1)));
    if (e.term.empty() || e.gloss.empty())
      raise(ErrorKind::parse,
            path + ":" + std::to_string(line_no) + ": empty term or gloss");
    if (textnorm::split_whitespace(normalize_token(e.term)).size() > 1)
      raise(ErrorKind::validation,
            path + ":" + std::to_string(line_no) + ": term contains whitespace");
    raw.push_back(std::move(e));
  }
  return Lexicon(std::move(raw));
}

std::string normalize_token(std::string_view raw) {
  return textnorm::strip_edge_punct(textnorm::nfc(raw));
}

std::vector<LexiconEntry> match_glossary(std::string_view source, const Lexicon& lex) {
  std::vector<LexiconEntry> out;
  if (lex.empty()) return out;

  std::unordered_set<std::string> seen;
  for (std::string_view token : textnorm::split_whitespace(source)) {
    const std::string key = normalize_token(token);
    if (key.empty() || seen.count(key)) continue;
    if (const LexiconEntry* hit = lex.find(key)) {
      out.push_back(*hit);
      seen.insert(key);
    }
  }
  return out;
}

}  // namespace dialectqe::lexicon
