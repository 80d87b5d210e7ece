#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace ecpt {

struct LanguageEntry {
  std::string_view code;
  std::string_view name;
};

/// Natural languages known to the pipeline (CC-100 inventory, ISO-style codes).
std::span<const LanguageEntry> natural_languages();

/// Programming languages with corpus support.
std::span<const std::string_view> programming_languages();

/// Label used for natural-language text whose language is not asserted.
inline constexpr std::string_view kTextLabel = "text";
inline constexpr std::string_view kUnknownLang = "unknown";

bool is_programming_language(std::string_view name);
bool is_known_language_code(std::string_view code);

/// Display name for a code, a display name, a PL name, or "text".
/// Returns nullopt for anything not in the registry.
std::optional<std::string> language_display_name(std::string_view code_or_name);

}  // namespace ecpt
