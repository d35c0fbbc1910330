#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "dialectqe/chat.hpp"
#include "dialectqe/lexicon.hpp"
#include "dialectqe/subword.hpp"

namespace dialectqe::promptkit {

// PLAIN is the no-guidance baseline; AG embeds annotation guidelines, DG the
// dialect glossary, DAG both.
enum class PromptKind { plain, ag, dg, dag };

PromptKind kind_from_string(const std::string& name);
const char* to_string(PromptKind kind);

struct RenderedPrompt {
  PromptKind kind = PromptKind::plain;
  std::string system_text;  // role statement (first template line)
  std::string user_text;    // remainder, starts at the first newline
  std::string source;
  std::string hypothesis;
  std::vector<lexicon::LexiconEntry> glossary_used;
  std::size_t token_count = 0;  // filled in by enforce_budget

  std::string text() const { return system_text + user_text; }
};

// Renders the versioned template assets. Templates use {{slot}} markers;
// rendering is a pure function of (template bytes, inputs).
class PromptBuilder {
public:
  // asset_dir must contain manifest.json. guideline_path overrides the
  // default guideline asset; an empty string keeps the default.
  static PromptBuilder from_assets(const std::string& asset_dir,
                                   const std::string& guideline_path = {});

  RenderedPrompt build(PromptKind kind, std::string_view source,
                       std::string_view hypothesis,
                       std::vector<lexicon::LexiconEntry> glossary = {}) const;

  RenderedPrompt build_plain(std::string_view source, std::string_view hypothesis) const;
  RenderedPrompt build_ag(std::string_view source, std::string_view hypothesis) const;
  RenderedPrompt build_dg(std::string_view source, std::string_view hypothesis,
                          std::vector<lexicon::LexiconEntry> glossary) const;
  RenderedPrompt build_dag(std::string_view source, std::string_view hypothesis,
                           std::vector<lexicon::LexiconEntry> glossary) const;

  const std::string& guidelines() const { return guidelines_; }

private:
  std::map<PromptKind, std::string> templates_;
  std::string guidelines_;
};

// Re-renders with glossary entries dropped from the end until the prompt fits
// the token budget. Non-glossary sections are never touched; an over-budget
// prompt with no glossary left is an error naming the overflow.
RenderedPrompt enforce_budget(const PromptBuilder& builder,
                              const RenderedPrompt& prompt,
                              const subword::TokenizerModel& tokenizer,
                              std::size_t budget = 512);

// System message carries the role statement, user message the remainder.
// With use_system_role = false everything goes into one user message.
ChatMessages to_chat(const RenderedPrompt& prompt, bool use_system_role = true);

// Asset resolution order: DIALECTQE_ASSETS env var, installed share dir,
// source tree. Errors when none exists.
std::string default_asset_dir();

}  // namespace dialectqe::promptkit
