#pragma once

// Word lists used by the tokenizer and the language heuristic. Built-in
// defaults mirror the files under data/lexicons; any of them can be replaced
// by a plain UTF-8 list (one entry per line, '#' starts a comment).

#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "chromsearch/chemtok/periodic_table.hpp"
#include "chromsearch/common.hpp"

namespace chromsearch::chemtok {

namespace detail {

inline constexpr std::string_view kExtraElementNames[] = {
    // alternative spellings
    "aluminum", "cesium", "sulphur",
    // adjectival and oxidation-state forms
    "ferric", "ferrous", "cupric", "cuprous", "stannic", "stannous", "plumbic",
    "plumbous", "mercuric", "mercurous", "cobaltic", "cobaltous", "nickelous",
    "manganous", "manganic", "ceric", "cerous", "chromic", "chromous",
    "auric", "aurous", "argentic", "argentous", "titanous", "vanadic",
    "molybdic", "zincic", "calcic", "sodic", "potassic", "lithic",
};

inline constexpr std::string_view kUnits[] = {
    "°C", "°F", "℃", "wt%", "wt.%", "at%", "at.%", "vol%", "vol.%", "%", "mV", "μV", "µV",
    "kV", "mA", "μA", "µA", "nA", "A/cm2", "mA/cm2", "μA/cm2", "µA/cm2", "nm", "μm", "µm",
    "mm", "cm", "km", "h", "hr", "hrs", "min", "s", "ms", "Hz", "kHz", "MHz", "mol",
    "mmol", "M", "mM", "μM", "µM", "g", "mg", "kg", "μg", "µg", "L", "mL", "ml", "μL",
    "µL", "ppm", "ppb", "Pa", "kPa", "MPa", "GPa", "J", "kJ", "eV", "keV", "kW", "mW",
    "Ω", "ohm", "kΩ", "MΩ", "cm2", "cm−2", "mol/L", "g/L", "mg/L", "rpm",
    "mV/s", "°",
};

// Short English function-word list for the language heuristic.
inline constexpr std::string_view kEnglishFunctionWords[] = {
    "a", "about", "after", "all", "also", "an", "and", "any", "are", "as", "at", "be",
    "been", "before", "being", "between", "both", "but", "by", "can", "could", "did",
    "do", "does", "during", "each", "for", "from", "had", "has", "have", "here", "how",
    "however", "if", "in", "into", "is", "it", "its", "may", "more", "most", "no", "not",
    "of", "on", "only", "or", "other", "our", "over", "same", "should", "so", "some",
    "such", "than", "that", "the", "their", "them", "then", "there", "these", "they",
    "this", "those", "through", "thus", "to", "under", "up", "upon", "was", "we", "were",
    "what", "when", "where", "which", "while", "who", "whose", "why", "will", "with",
    "within", "without", "would",
};

inline std::vector<std::string> load_list(const std::filesystem::path& path) {
  std::vector<std::string> out;
  for (auto& line : read_lines(path.string())) {
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    out.emplace_back(t);
  }
  return out;
}

}  // namespace detail

struct Lexicons {
  std::unordered_set<std::string> element_names;  // lowercase
  std::unordered_set<std::string> units;          // case-sensitive
  std::unordered_set<std::string> function_words; // lowercase

  static Lexicons builtin() {
    Lexicons lx;
    for (const auto& e : kPeriodicTable) lx.element_names.emplace(e.name);
    for (auto n : detail::kExtraElementNames) lx.element_names.emplace(n);
    for (auto u : detail::kUnits) lx.units.emplace(u);
    for (auto w : detail::kEnglishFunctionWords) lx.function_words.emplace(w);
    return lx;
  }

  // Files that exist in `dir` replace the matching built-in list:
  // element_names.txt, units.txt, english_function_words.txt.
  static Lexicons load(const std::filesystem::path& dir) {
    Lexicons lx = builtin();
    auto replace = [&](const char* file, std::unordered_set<std::string>& target, bool lower) {
      const auto p = dir / file;
      if (!std::filesystem::exists(p)) return;
      target.clear();
      for (auto& e : detail::load_list(p)) target.insert(lower ? to_lower(e) : e);
    };
    replace("element_names.txt", lx.element_names, true);
    replace("units.txt", lx.units, false);
    replace("english_function_words.txt", lx.function_words, true);
    return lx;
  }

  bool is_element_name(std::string_view word) const {
    return element_names.count(to_lower(word)) > 0;
  }
  bool is_unit(std::string_view token) const { return units.count(std::string(token)) > 0; }
  bool is_function_word(std::string_view word) const {
    return function_words.count(to_lower(word)) > 0;
  }
};

// Sorted dump, used to regenerate the shipped list files.
inline std::vector<std::string> sorted_entries(const std::unordered_set<std::string>& s) {
  std::set<std::string> ordered(s.begin(), s.end());
  return {ordered.begin(), ordered.end()};
}

}  // namespace chromsearch::chemtok
