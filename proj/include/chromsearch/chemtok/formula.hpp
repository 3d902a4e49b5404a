#pragma once

// Chemical formula grammar:
//   formula := unit+
//   unit    := element count? | '(' unit+ ')' count?
// Groups are expanded by multiplying inner counts and duplicate elements are
// merged. Unicode subscript digits are mapped to ASCII first and a trailing
// ionic charge ("^2-", "2-", "+", "3+") is stripped.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chromsearch/chemtok/periodic_table.hpp"
#include "chromsearch/common.hpp"

namespace chromsearch::chemtok {

struct FormulaItem {
  std::string symbol;
  long long count = 1;

  friend bool operator==(const FormulaItem&, const FormulaItem&) = default;
};

// Flattened composition in order of first appearance.
struct FormulaAst {
  std::vector<FormulaItem> items;
  // Number of top-level units before flattening; "Fe" has one, "FeO" two.
  std::size_t unit_count = 0;
  bool had_group = false;
  bool had_count = false;

  std::map<std::string, long long> multiset() const {
    std::map<std::string, long long> m;
    for (const auto& it : items) m[it.symbol] += it.count;
    return m;
  }

  // A bare element symbol such as "Fe"; classified as Element, not Formula.
  bool is_single_element() const {
    return items.size() == 1 && items.front().count == 1 && !had_group && !had_count;
  }
};

// Maps Unicode subscript digits (U+2080..U+2089) to ASCII digits.
inline std::string map_subscripts(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    if (b0 == 0xE2 && i + 2 < s.size() && static_cast<unsigned char>(s[i + 1]) == 0x82) {
      const auto b2 = static_cast<unsigned char>(s[i + 2]);
      if (b2 >= 0x80 && b2 <= 0x89) {
        out += static_cast<char>('0' + (b2 - 0x80));
        i += 2;
        continue;
      }
    }
    out += s[i];
  }
  return out;
}

namespace detail {

inline std::string_view strip_charge(std::string_view s) {
  if (auto caret = s.find('^'); caret != std::string_view::npos) {
    return s.substr(0, caret);
  }
  if (!s.empty() && (s.back() == '+' || s.back() == '-')) {
    // "SO42-" is ambiguous; only strip a sign, and a single charge digit
    // when another digit precedes it ("CrO42-" -> "CrO4").
    s.remove_suffix(1);
    if (s.size() >= 2 && is_ascii_digit(s.back()) && is_ascii_digit(s[s.size() - 2])) {
      s.remove_suffix(1);
    }
  }
  return s;
}

class FormulaParser {
 public:
  explicit FormulaParser(std::string_view text) : text_(text) {}

  std::optional<FormulaAst> parse() {
    FormulaAst ast;
    std::vector<FormulaItem> items;
    while (pos_ < text_.size()) {
      if (!parse_unit(items, ast)) return std::nullopt;
      ++ast.unit_count;
    }
    if (items.empty()) return std::nullopt;
    // merge duplicates, keep first-appearance order
    for (auto& it : items) {
      auto found = std::find_if(ast.items.begin(), ast.items.end(),
                                [&](const FormulaItem& x) { return x.symbol == it.symbol; });
      if (found == ast.items.end()) {
        ast.items.push_back(it);
      } else {
        found->count += it.count;
      }
    }
    return ast;
  }

 private:
  bool parse_unit(std::vector<FormulaItem>& out, FormulaAst& ast) {
    if (text_[pos_] == '(' || text_[pos_] == '[') {
      const char close = text_[pos_] == '(' ? ')' : ']';
      ++pos_;
      std::vector<FormulaItem> inner;
      bool any = false;
      while (pos_ < text_.size() && text_[pos_] != close) {
        if (!parse_unit(inner, ast)) return false;
        any = true;
      }
      if (pos_ >= text_.size() || !any) return false;  // dangling parenthesis
      ++pos_;
      ast.had_group = true;
      const long long mult = parse_count(ast);
      if (mult <= 0) return false;
      for (auto& it : inner) {
        it.count *= mult;
        out.push_back(it);
      }
      return true;
    }
    if (!is_ascii_upper(text_[pos_])) return false;
    std::string symbol(1, text_[pos_]);
    ++pos_;
    if (pos_ < text_.size() && is_ascii_lower(text_[pos_])) {
      std::string two = symbol + text_[pos_];
      if (is_element_symbol(two)) {
        symbol = std::move(two);
        ++pos_;
      }
    }
    if (!is_element_symbol(symbol)) return false;
    const long long count = parse_count(ast);
    if (count <= 0) return false;
    out.push_back({symbol, count});
    return true;
  }

  // Returns 1 when no count follows, 0 for an explicit zero.
  long long parse_count(FormulaAst& ast) {
    if (pos_ >= text_.size() || !is_ascii_digit(text_[pos_])) return 1;
    long long v = 0;
    while (pos_ < text_.size() && is_ascii_digit(text_[pos_])) {
      v = v * 10 + (text_[pos_] - '0');
      if (v > 1'000'000) return 0;
      ++pos_;
    }
    ast.had_count = true;
    return v;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

// Returns nullopt for anything outside the grammar (unknown symbol, dangling
// parenthesis, stray characters).
inline std::optional<FormulaAst> parse_formula(std::string_view surface) {
  const std::string mapped = map_subscripts(surface);
  const std::string_view body = detail::strip_charge(mapped);
  if (body.empty()) return std::nullopt;
  return detail::FormulaParser(body).parse();
}

// Elements sorted by symbol (ASCII), count suffix omitted when 1.
inline std::string normalize_formula(const FormulaAst& ast) {
  const auto ms = ast.multiset();  // std::map orders by ASCII symbol
  std::string out;
  for (const auto& [symbol, count] : ms) {
    out += symbol;
    if (count != 1) out += std::to_string(count);
  }
  return out;
}

inline std::optional<std::string> normalize_formula_text(std::string_view surface) {
  auto ast = parse_formula(surface);
  if (!ast) return std::nullopt;
  return normalize_formula(*ast);
}

}  // namespace chromsearch::chemtok
