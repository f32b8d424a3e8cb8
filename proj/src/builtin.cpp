#include "tyflow/builtin.hpp"

#include <mutex>
#include <unordered_map>

namespace tyflow {

namespace detail {
extern const char* const kStlcTyl;
extern const char* const kStlcExtTyl;
extern const char* const kTinyTyl;
extern const char* const kStlcCorpus;
extern const char* const kStlcExtCorpus;
} // namespace detail

namespace {

struct Entry {
  std::string_view name;
  const char* language;
  const char* corpus; // may be null
};

const Entry kEntries[] = {
    {"stlc", detail::kStlcTyl, detail::kStlcCorpus},
    {"stlc-ext", detail::kStlcExtTyl, detail::kStlcExtCorpus},
    {"tiny", detail::kTinyTyl, nullptr},
};

const Entry* find_entry(std::string_view name) {
  for (const auto& e : kEntries)
    if (e.name == name) return &e;
  return nullptr;
}

} // namespace

std::vector<std::string_view> builtin_language_names() {
  std::vector<std::string_view> out;
  for (const auto& e : kEntries) out.push_back(e.name);
  return out;
}

const char* builtin_language_text(std::string_view name) {
  const Entry* e = find_entry(name);
  return e ? e->language : nullptr;
}

std::shared_ptr<const Language> builtin_language(std::string_view name) {
  static std::mutex mu;
  static std::unordered_map<std::string, std::shared_ptr<const Language>> cache;

  const char* text = builtin_language_text(name);
  if (!text) throw Fault("unknown builtin language: " + std::string(name));

  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(std::string(name));
  if (it != cache.end()) return it->second;

  LanguageParse parsed = parse_language(text);
  if (!parsed.language)
    throw Fault("builtin language failed to parse: " +
                format_diagnostics(parsed.diagnostics));
  auto lang = std::shared_ptr<const Language>(std::move(parsed.language));
  cache.emplace(std::string(name), lang);
  return lang;
}

const char* builtin_corpus_text(std::string_view name) {
  const Entry* e = find_entry(name);
  return e ? e->corpus : nullptr;
}

} // namespace tyflow
