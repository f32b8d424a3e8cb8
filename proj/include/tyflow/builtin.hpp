#pragma once

#include <memory>
#include <string_view>
#include <vector>

#include "tyflow/language.hpp"

namespace tyflow {

// Languages compiled into the library. Definition files under languages/ are
// the single source of truth; their text is embedded at configure time.
std::vector<std::string_view> builtin_language_names();

// Raw definition text, or nullptr if the name is unknown.
const char* builtin_language_text(std::string_view name);

// Parsed and validated language, cached per name. Faults on unknown names.
std::shared_ptr<const Language> builtin_language(std::string_view name);

// Embedded task corpus (JSONL), or nullptr if no corpus ships for the name.
const char* builtin_corpus_text(std::string_view name);

} // namespace tyflow
