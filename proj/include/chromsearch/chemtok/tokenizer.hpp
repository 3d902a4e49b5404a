#pragma once

// Chemistry-aware word tokenization: sentence splitting, token
// classification and the placeholder/casing pipeline that feeds the
// embedding trainer (policy on) and the subword path (policy off).

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "chromsearch/chemtok/formula.hpp"
#include "chromsearch/chemtok/lexicons.hpp"
#include "chromsearch/common.hpp"

namespace chromsearch::chemtok {

enum class TokenKind { Word, Formula, Element, Number, Unit, Abbreviation };

inline std::string_view to_string(TokenKind k) {
  switch (k) {
    case TokenKind::Word: return "Word";
    case TokenKind::Formula: return "Formula";
    case TokenKind::Element: return "Element";
    case TokenKind::Number: return "Number";
    case TokenKind::Unit: return "Unit";
    case TokenKind::Abbreviation: return "Abbreviation";
  }
  return "Word";
}

inline constexpr std::string_view kElementPlaceholder = "#element";
inline constexpr std::string_view kNumberPlaceholder = "#nUm";
inline constexpr std::string_view kUnitPlaceholder = "#unit";

struct Token {
  std::string surface;
  TokenKind kind = TokenKind::Word;
  std::string normalized;

  friend bool operator==(const Token&, const Token&) = default;
};

struct Sentence {
  std::vector<Token> tokens;
};

struct TokenContext {
  bool sentence_initial = false;
};

enum class PlaceholderPolicy { On, Off };

// Single-letter symbols accepted as elements; everything else of length one
// stays a word to keep prose like "A" or "H" out of the chemistry path.
inline constexpr std::array<std::string_view, 13> kSingleLetterElementAllowlist = {
    "B", "C", "N", "O", "F", "P", "S", "K", "V", "W", "Y", "I", "U"};

// ---------------------------------------------------------------------------
// sentence splitting

namespace detail {

inline constexpr std::array<std::string_view, 14> kNoBreakAbbreviations = {
    "e.g", "i.e", "al", "Fig", "Figs", "Eq", "Eqs", "vs", "approx", "ca", "cf", "Ref", "Refs", "etc"};

// Word immediately before position `dot` (exclusive), scanning back over
// letters and inner dots.
inline std::string_view word_before(std::string_view text, std::size_t dot) {
  std::size_t start = dot;
  while (start > 0 && (is_ascii_alpha(text[start - 1]) || text[start - 1] == '.')) --start;
  return text.substr(start, dot - start);
}

inline bool is_no_break_word(std::string_view word) {
  if (word.size() == 1 && is_ascii_lower(word[0])) return true;
  for (auto a : kNoBreakAbbreviations) {
    if (word == a) return true;
  }
  return false;
}

}  // namespace detail

// Boundaries fall after '.', '!' or '?' when followed by whitespace and an
// uppercase letter, outside parentheses, and not right after a lowercase
// single-letter or listed abbreviation ("e.g.", "Fig.").
inline std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  int depth = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '(' || c == '[') ++depth;
    else if ((c == ')' || c == ']') && depth > 0) --depth;
    if ((c != '.' && c != '!' && c != '?') || depth > 0) continue;
    std::size_t j = i + 1;
    if (j >= text.size() || !is_ascii_space(text[j])) continue;
    while (j < text.size() && is_ascii_space(text[j])) ++j;
    if (j >= text.size() || !is_ascii_upper(text[j])) continue;
    if (c == '.' && detail::is_no_break_word(detail::word_before(text, i))) continue;
    auto piece = trim(text.substr(start, i + 1 - start));
    if (!piece.empty()) out.emplace_back(piece);
    start = j;
  }
  auto tail = trim(text.substr(std::min(start, text.size())));
  if (!tail.empty()) out.emplace_back(tail);
  return out;
}

// ---------------------------------------------------------------------------
// word splitting

namespace detail {

inline bool is_number_text(std::string_view s) {
  if (s.empty()) return false;
  std::size_t i = 0;
  if (s[i] == '+' || s[i] == '-') ++i;
  else if (s.substr(0, 3) == "\xE2\x88\x92") i += 3;  // U+2212 minus sign
  std::size_t digits = 0;
  bool seen_dot = false;
  for (; i < s.size(); ++i) {
    const char c = s[i];
    if (is_ascii_digit(c)) {
      ++digits;
    } else if (c == '.' && !seen_dot) {
      seen_dot = true;
    } else if (c == ',' && !seen_dot && digits > 0 && i + 3 < s.size() &&
               is_ascii_digit(s[i + 1]) && is_ascii_digit(s[i + 2]) && is_ascii_digit(s[i + 3]) &&
               (i + 4 == s.size() || !is_ascii_digit(s[i + 4]))) {
      // thousands separator
    } else {
      break;
    }
  }
  if (digits == 0) return false;
  if (i == s.size()) return s.back() != '.' && s.back() != ',';
  if (s[i] != 'e' && s[i] != 'E') return false;
  ++i;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
  std::size_t exp_digits = 0;
  for (; i < s.size() && is_ascii_digit(s[i]); ++i) ++exp_digits;
  return exp_digits > 0 && i == s.size();
}

inline int count_char(std::string_view s, char c) {
  return static_cast<int>(std::count(s.begin(), s.end(), c));
}

inline bool starts_with_any(std::string_view s, std::initializer_list<std::string_view> prefixes,
                            std::size_t& len) {
  for (auto p : prefixes) {
    if (s.substr(0, p.size()) == p) {
      len = p.size();
      return true;
    }
  }
  return false;
}

inline std::string_view strip_punctuation(std::string_view t) {
  bool changed = true;
  while (changed && !t.empty()) {
    changed = false;
    std::size_t len = 0;
    if (starts_with_any(t, {"\"", "'", "\xE2\x80\x9C", "\xE2\x80\x98"}, len)) {
      t.remove_prefix(len);
      changed = true;
    } else if ((t.front() == '(' && count_char(t, '(') > count_char(t, ')')) ||
               (t.front() == '[' && count_char(t, '[') > count_char(t, ']'))) {
      t.remove_prefix(1);
      changed = true;
    }
    if (t.empty()) break;
    const char b = t.back();
    if (b == '.' || b == ',' || b == ';' || b == ':' || b == '!' || b == '?' || b == '"' ||
        b == '\'') {
      t.remove_suffix(1);
      changed = true;
    } else if ((b == ')' && count_char(t, ')') > count_char(t, '(')) ||
               (b == ']' && count_char(t, ']') > count_char(t, '['))) {
      t.remove_suffix(1);
      changed = true;
    } else if (t.size() >= 3 && (t.substr(t.size() - 3) == "\xE2\x80\x9D" ||
                                 t.substr(t.size() - 3) == "\xE2\x80\x99")) {
      t.remove_suffix(3);
      changed = true;
    }
  }
  return t;
}

}  // namespace detail

// Whitespace split with outer punctuation removed; "25°C" style number+unit
// glue is split in two when the suffix is a known unit.
inline std::vector<std::string> split_words(std::string_view sentence, const Lexicons& lex) {
  std::vector<std::string> out;
  for (const auto& raw : split_whitespace(sentence)) {
    auto t = detail::strip_punctuation(raw);
    if (t.empty()) continue;
    bool split = false;
    if (is_ascii_digit(t.front()) && !detail::is_number_text(t)) {
      for (std::size_t k = 1; k < t.size(); ++k) {
        if (detail::is_number_text(t.substr(0, k)) && lex.is_unit(t.substr(k))) {
          out.emplace_back(t.substr(0, k));
          out.emplace_back(t.substr(k));
          split = true;
          break;
        }
      }
    }
    if (!split) out.emplace_back(t);
  }
  return out;
}

// ---------------------------------------------------------------------------
// classification

inline bool has_noninitial_upper(std::string_view s) {
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (is_ascii_upper(s[i])) return true;
  }
  return false;
}

inline bool is_element_symbol_in_context(std::string_view surface, TokenContext ctx) {
  if (!is_element_symbol(surface) || ctx.sentence_initial) return false;
  if (surface.size() == 2) return true;
  return std::find(kSingleLetterElementAllowlist.begin(), kSingleLetterElementAllowlist.end(),
                   surface) != kSingleLetterElementAllowlist.end();
}

// Precedence: Formula > Element > Number > Unit > Abbreviation > Word.
inline TokenKind classify_token(std::string_view surface, TokenContext ctx, const Lexicons& lex) {
  if (auto ast = parse_formula(surface); ast && !ast->is_single_element()) {
    return TokenKind::Formula;
  }
  if (is_element_symbol_in_context(surface, ctx) || lex.is_element_name(surface)) {
    return TokenKind::Element;
  }
  if (detail::is_number_text(surface)) return TokenKind::Number;
  if (lex.is_unit(surface)) return TokenKind::Unit;
  if (has_noninitial_upper(surface)) return TokenKind::Abbreviation;
  return TokenKind::Word;
}

inline Token make_token(std::string_view surface, TokenContext ctx, const Lexicons& lex) {
  Token t;
  t.surface = std::string(surface);
  t.kind = classify_token(surface, ctx, lex);
  if (t.kind == TokenKind::Formula) {
    t.normalized = *normalize_formula_text(surface);
  } else {
    t.normalized = t.surface;
  }
  return t;
}

inline Sentence classify_sentence(const std::vector<std::string>& words, const Lexicons& lex) {
  Sentence s;
  for (std::size_t i = 0; i < words.size(); ++i) {
    s.tokens.push_back(make_token(words[i], TokenContext{i == 0}, lex));
  }
  return s;
}

// Policy On (embedding path): Element -> "#element", Number -> "#nUm",
// Unit -> "#unit", Formula -> normalized, Word -> lowercase, Abbreviation
// unchanged. Policy Off (subword path): formulas normalized, words
// lowercased, everything else kept as written.
inline Sentence apply_word_pipeline(const Sentence& in, PlaceholderPolicy policy) {
  Sentence out;
  out.tokens.reserve(in.tokens.size());
  for (const auto& tok : in.tokens) {
    Token t = tok;
    switch (tok.kind) {
      case TokenKind::Formula:
        t.normalized = *normalize_formula_text(tok.surface);
        break;
      case TokenKind::Element:
        if (policy == PlaceholderPolicy::On) {
          t.normalized = std::string(kElementPlaceholder);
        } else {
          t.normalized = is_element_symbol(tok.surface) ? tok.surface : to_lower(tok.surface);
        }
        break;
      case TokenKind::Number:
        t.normalized = policy == PlaceholderPolicy::On ? std::string(kNumberPlaceholder) : tok.surface;
        break;
      case TokenKind::Unit:
        t.normalized = policy == PlaceholderPolicy::On ? std::string(kUnitPlaceholder) : tok.surface;
        break;
      case TokenKind::Abbreviation:
        t.normalized = tok.surface;
        break;
      case TokenKind::Word:
        t.normalized = to_lower(tok.surface);
        break;
    }
    out.tokens.push_back(std::move(t));
  }
  return out;
}

// Full path from cleaned text to pipeline-normalized sentences.
inline std::vector<Sentence> tokenize_text(std::string_view text, PlaceholderPolicy policy,
                                           const Lexicons& lex) {
  std::vector<Sentence> out;
  for (const auto& sent : split_sentences(text)) {
    auto words = split_words(sent, lex);
    if (words.empty()) continue;
    out.push_back(apply_word_pipeline(classify_sentence(words, lex), policy));
  }
  return out;
}

// Normalized strings of every token, sentences concatenated in order.
inline std::vector<std::string> normalized_tokens(std::string_view text, PlaceholderPolicy policy,
                                                  const Lexicons& lex) {
  std::vector<std::string> out;
  for (const auto& s : tokenize_text(text, policy, lex)) {
    for (const auto& t : s.tokens) out.push_back(t.normalized);
  }
  return out;
}

}  // namespace chromsearch::chemtok
