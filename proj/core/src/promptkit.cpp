#include "dialectqe/promptkit.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dialectqe/errors.hpp"
#include "dialectqe/textnorm.hpp"

#ifndef DIALECTQE_SOURCE_ASSET_DIR
#define DIALECTQE_SOURCE_ASSET_DIR ""
#endif
#ifndef DIALECTQE_INSTALL_ASSET_DIR
#define DIALECTQE_INSTALL_ASSET_DIR ""
#endif

namespace dialectqe::promptkit {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    raise(ErrorKind::io, "cannot open asset file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Single-pass {{slot}} substitution; inserted values are never re-expanded.
std::string render_template(const std::string& tmpl,
                            const std::map<std::string, std::string>& slots) {
  std::string out;
  out.reserve(tmpl.size() + 256);
  std::size_t pos = 0;
  while (true) {
    const std::size_t open = tmpl.find("{{", pos);
    if (open == std::string::npos) {
      out.append(tmpl, pos, std::string::npos);
      break;
    }
    const std::size_t close = tmpl.find("}}", open + 2);
    if (close == std::string::npos)
      raise(ErrorKind::format, "template has an unterminated {{slot}}");
    out.append(tmpl, pos, open - pos);
    const std::string name = tmpl.substr(open + 2, close - open - 2);
    auto it = slots.find(name);
    if (it == slots.end())
      raise(ErrorKind::config, "template slot '" + name + "' has no value");
    out += it->second;
    pos = close + 2;
  }
  return out;
}

std::string glossary_block(const std::vector<lexicon::LexiconEntry>& glossary) {
  std::string out;
  for (std::size_t i = 0; i < glossary.size(); ++i) {
    if (i) out += '\n';
    out += glossary[i].term;
    out += " translate to ";
    out += glossary[i].gloss;
  }
  return out;
}

}  // namespace

PromptKind kind_from_string(const std::string& name) {
  if (name == "plain") return PromptKind::plain;
  if (name == "ag") return PromptKind::ag;
  if (name == "dg") return PromptKind::dg;
  if (name == "dag") return PromptKind::dag;
  raise(ErrorKind::config, "unknown prompt kind: " + name);
}

const char* to_string(PromptKind kind) {
  switch (kind) {
    case PromptKind::plain: return "plain";
    case PromptKind::ag: return "ag";
    case PromptKind::dg: return "dg";
    case PromptKind::dag: return "dag";
  }
  return "?";
}

PromptBuilder PromptBuilder::from_assets(const std::string& asset_dir,
                                         const std::string& guideline_path) {
  const fs::path root(asset_dir);
  const fs::path manifest_path = root / "manifest.json";
  json manifest = json::parse(read_file(manifest_path), nullptr, false);
  if (manifest.is_discarded() || !manifest.is_object())
    raise(ErrorKind::format, "corrupt asset manifest: " + manifest_path.string());
  if (manifest.value("template_version", -1) != 1)
    raise(ErrorKind::format, "unsupported template_version in " + manifest_path.string());

  PromptBuilder b;
  const auto& files = manifest.at("templates");
  b.templates_[PromptKind::plain] = read_file(root / files.at("plain").get<std::string>());
  b.templates_[PromptKind::ag] = read_file(root / files.at("ag").get<std::string>());
  b.templates_[PromptKind::dg] = read_file(root / files.at("dg").get<std::string>());
  b.templates_[PromptKind::dag] = read_file(root / files.at("dag").get<std::string>());

  if (!guideline_path.empty())
    b.guidelines_ = read_file(guideline_path);
  else if (manifest.contains("default_guidelines"))
    b.guidelines_ = read_file(root / manifest["default_guidelines"].get<std::string>());
  return b;
}

RenderedPrompt PromptBuilder::build(PromptKind kind, std::string_view source,
                                    std::string_view hypothesis,
                                    std::vector<lexicon::LexiconEntry> glossary) const {
  if (textnorm::trim(source).empty())
    raise(ErrorKind::validation, "prompt source is empty");
  if (textnorm::trim(hypothesis).empty())
    raise(ErrorKind::validation, "prompt hypothesis is empty");

  std::map<std::string, std::string> slots;
  slots["source"] = std::string(source);
  slots["hypothesis"] = std::string(hypothesis);
  if (kind == PromptKind::dg || kind == PromptKind::dag)
    slots["glossary"] = glossary_block(glossary);
  else
    glossary.clear();
  if (kind == PromptKind::ag || kind == PromptKind::dag) {
    if (textnorm::trim(guidelines_).empty())
      raise(ErrorKind::config, "annotation guideline asset is missing or empty");
    slots["guidelines"] = guidelines_;
  }

  const std::string text = render_template(templates_.at(kind), slots);

  RenderedPrompt p;
  p.kind = kind;
  p.source = std::string(source);
  p.hypothesis = std::string(hypothesis);
  p.glossary_used = std::move(glossary);
  const std::size_t nl = text.find('\n');
  if (nl == std::string::npos) {
    p.system_text = text;
  } else {
    p.system_text = text.substr(0, nl);
    p.user_text = text.substr(nl);
  }
  return p;
}

RenderedPrompt PromptBuilder::build_plain(std::string_view source,
                                          std::string_view hypothesis) const {
  return build(PromptKind::plain, source, hypothesis);
}

RenderedPrompt PromptBuilder::build_ag(std::string_view source,
                                       std::string_view hypothesis) const {
  return build(PromptKind::ag, source, hypothesis);
}

RenderedPrompt PromptBuilder::build_dg(std::string_view source, std::string_view hypothesis,
                                       std::vector<lexicon::LexiconEntry> glossary) const {
  return build(PromptKind::dg, source, hypothesis, std::move(glossary));
}

RenderedPrompt PromptBuilder::build_dag(std::string_view source, std::string_view hypothesis,
                                        std::vector<lexicon::LexiconEntry> glossary) const {
  return build(PromptKind::dag, source, hypothesis, std::move(glossary));
}

RenderedPrompt enforce_budget(const PromptBuilder& builder,
                              const RenderedPrompt& prompt,
                              const subword::TokenizerModel& tokenizer,
                              std::size_t budget) {
  RenderedPrompt cur = prompt;
  cur.token_count = tokenizer.encode(cur.text()).size();
  while (cur.token_count > budget) {
    if (cur.glossary_used.empty())
      raise(ErrorKind::validation,
            "prompt exceeds token budget by " +
                std::to_string(cur.token_count - budget) +
                " tokens with no glossary entries left to drop");
    std::vector<lexicon::LexiconEntry> shrunk = cur.glossary_used;
    shrunk.pop_back();
    cur = builder.build(cur.kind, cur.source, cur.hypothesis, std::move(shrunk));
    cur.token_count = tokenizer.encode(cur.text()).size();
  }
  return cur;
}

ChatMessages to_chat(const RenderedPrompt& prompt, bool use_system_role) {
  if (!use_system_role)
    return {{"user", prompt.text()}};
  return {{"system", prompt.system_text}, {"user", prompt.user_text}};
}

std::string default_asset_dir() {
  if (const char* env = std::getenv("DIALECTQE_ASSETS"); env && *env) return env;
  for (const char* candidate : {DIALECTQE_INSTALL_ASSET_DIR, DIALECTQE_SOURCE_ASSET_DIR}) {
    if (*candidate && fs::exists(fs::path(candidate) / "manifest.json"))
      return candidate;
  }
  raise(ErrorKind::config,
        "no prompt asset directory found; set DIALECTQE_ASSETS or pass --assets");
}

}  // namespace dialectqe::promptkit
