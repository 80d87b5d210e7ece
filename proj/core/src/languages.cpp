#include "ecpt/languages.hpp"

#include <algorithm>
#include <array>

namespace ecpt {
namespace {

constexpr std::array kNaturalLanguages = std::to_array<LanguageEntry>({
    {"am", "Amharic"},
    {"ar", "Arabic"},
    {"as", "Assamese"},
    {"az", "Azerbaijani"},
    {"be", "Belarusian"},
    {"bg", "Bulgarian"},
    {"bn", "Bengali"},
    {"bn_rom", "Bengali Romanized"},
    {"br", "Breton"},
    {"bs", "Bosnian"},
    {"ca", "Catalan"},
    {"cs", "Czech"},
    {"cy", "Welsh"},
    {"da", "Danish"},
    {"de", "German"},
    {"el", "Greek"},
    {"en", "English"},
    {"eo", "Esperanto"},
    {"es", "Spanish"},
    {"et", "Estonian"},
    {"eu", "Basque"},
    {"fa", "Persian"},
    {"ff", "Fulah"},
    {"fi", "Finnish"},
    {"fr", "French"},
    {"fy", "Western Frisian"},
    {"ga", "Irish"},
    {"gd", "Scottish Gaelic"},
    {"gl", "Galician"},
    {"gn", "Guarani"},
    {"gu", "Gujarati"},
    {"ha", "Hausa"},
    {"he", "Hebrew"},
    {"hi", "Hindi"},
    {"hi_rom", "Hindi Romanized"},
    {"hr", "Croatian"},
    {"ht", "Haitian"},
    {"hu", "Hungarian"},
    {"hy", "Armenian"},
    {"id", "Indonesian"},
    {"ig", "Igbo"},
    {"is", "Icelandic"},
    {"it", "Italian"},
    {"ja", "Japanese"},
    {"jv", "Javanese"},
    {"ka", "Georgian"},
    {"kk", "Kazakh"},
    {"km", "Central Khmer"},
    {"kn", "Kannada"},
    {"ko", "Korean"},
    {"ku", "Kurdish"},
    {"ky", "Kirghiz"},
    {"la", "Latin"},
    {"lg", "Ganda"},
    {"li", "Limburgan"},
    {"ln", "Lingala"},
    {"lo", "Lao"},
    {"lv", "Latvian"},
    {"mg", "Malagasy"},
    {"mk", "Macedonian"},
    {"ml", "Malayalam"},
    {"mn", "Mongolian"},
    {"mr", "Marathi"},
    {"ms", "Malay"},
    {"my", "Burmese"},
    {"my_zaw", "Burmese (Zawgyi)"},
    {"ne", "Nepali"},
    {"nl", "Dutch"},
    {"no", "Norwegian"},
    {"ns", "Northern Sotho"},
    {"om", "Oromo"},
    {"or", "Oriya"},
    {"pa", "Panjabi"},
    {"pl", "Polish"},
    {"ps", "Pushto"},
    {"pt", "Portuguese"},
    {"qu", "Quechua"},
    {"rm", "Romansh"},
    {"ro", "Romanian"},
    {"ru", "Russian"},
    {"sa", "Sanskrit"},
    {"sc", "Sardinian"},
    {"sd", "Sindhi"},
    {"si", "Sinhala"},
    {"sk", "Slovak"},
    {"sl", "Slovenian"},
    {"so", "Somali"},
    {"sq", "Albanian"},
    {"sr", "Serbian"},
    {"ss", "Swati"},
    {"su", "Sundanese"},
    {"sv", "Swedish"},
    {"sw", "Swahili"},
    {"ta", "Tamil"},
    {"ta_rom", "Tamil Romanized"},
    {"te", "Telugu"},
    {"te_rom", "Telugu Romanized"},
    {"th", "Thai"},
    {"tl", "Tagalog"},
    {"tn", "Tswana"},
    {"tr", "Turkish"},
    {"ug", "Uighur"},
    {"uk", "Ukrainian"},
    {"ur", "Urdu"},
    {"ur_rom", "Urdu Romanized"},
    {"uz", "Uzbek"},
    {"vi", "Vietnamese"},
    {"wo", "Wolof"},
    {"xh", "Xhosa"},
    {"yi", "Yiddish"},
    {"yo", "Yoruba"},
    {"zh", "Chinese"},
    {"zh-Hant", "Chinese (Traditional)"},
    {"zu", "Zulu"},
});

constexpr std::array<std::string_view, 6> kProgrammingLanguages = {
    "Go", "Java", "JavaScript", "PHP", "Python", "Ruby"};

}  // namespace

std::span<const LanguageEntry> natural_languages() { return kNaturalLanguages; }

std::span<const std::string_view> programming_languages() { return kProgrammingLanguages; }

bool is_programming_language(std::string_view name) {
  return std::find(kProgrammingLanguages.begin(), kProgrammingLanguages.end(), name) !=
         kProgrammingLanguages.end();
}

bool is_known_language_code(std::string_view code) {
  return std::any_of(kNaturalLanguages.begin(), kNaturalLanguages.end(),
                     [&](const LanguageEntry& e) { return e.code == code; });
}

std::optional<std::string> language_display_name(std::string_view code_or_name) {
  if (code_or_name == kTextLabel) return std::string(kTextLabel);
  if (is_programming_language(code_or_name)) return std::string(code_or_name);
  for (const auto& e : kNaturalLanguages) {
    if (e.code == code_or_name || e.name == code_or_name) return std::string(e.name);
  }
  return std::nullopt;
}

}  // namespace ecpt
