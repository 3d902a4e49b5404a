#pragma once

// Abstract records: cleaning, filtering, language heuristic and the
// line-oriented corpus file (one JSON object per line, fields id, text).

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "chromsearch/chemtok/lexicons.hpp"
#include "chromsearch/common.hpp"

namespace chromsearch::corpus {

enum class ContentType { Article, Review, Conference, Other };
enum class RecordSource { LiveApi, Fixture };

inline std::string_view to_string(ContentType t) {
  switch (t) {
    case ContentType::Article: return "article";
    case ContentType::Review: return "review";
    case ContentType::Conference: return "conference";
    case ContentType::Other: return "other";
  }
  return "other";
}

inline ContentType parse_content_type(std::string_view s) {
  const auto l = to_lower(trim(s));
  if (l == "article" || l == "ar") return ContentType::Article;
  if (l == "review" || l == "re") return ContentType::Review;
  if (l == "conference" || l == "conference paper" || l == "cp") return ContentType::Conference;
  return ContentType::Other;
}

struct DocumentRecord {
  std::string id;
  std::string title;
  std::string abstract;
  std::vector<std::string> keywords;
  std::string language = "unknown";
  ContentType content_type = ContentType::Article;
  RecordSource source = RecordSource::Fixture;

  friend bool operator==(const DocumentRecord&, const DocumentRecord&) = default;
};

// One line of the corpus file.
struct CorpusRecord {
  std::string id;
  std::string text;

  friend bool operator==(const CorpusRecord&, const CorpusRecord&) = default;
};

// ---------------------------------------------------------------------------
// clean_text

namespace detail {

inline bool decode_entity(std::string_view s, std::size_t amp, std::string& out, std::size_t& consumed) {
  static constexpr std::pair<std::string_view, std::string_view> kNamed[] = {
      {"&quot;", "\""}, {"&apos;", "'"}, {"&amp;", "&"}, {"&lt;", "<"}, {"&gt;", ">"}, {"&nbsp;", " "}};
  const auto rest = s.substr(amp);
  for (auto [name, value] : kNamed) {
    if (rest.substr(0, name.size()) == name) {
      out += value;
      consumed = name.size();
      return true;
    }
  }
  if (rest.size() > 3 && rest[1] == '#') {
    const auto semi = rest.find(';');
    if (semi == std::string_view::npos || semi > 10) return false;
    const bool hex = rest[2] == 'x' || rest[2] == 'X';
    const auto digits = rest.substr(hex ? 3 : 2, semi - (hex ? 3 : 2));
    if (digits.empty()) return false;
    std::uint32_t cp = 0;
    for (char c : digits) {
      int v = -1;
      if (is_ascii_digit(c)) v = c - '0';
      else if (hex && c >= 'a' && c <= 'f') v = c - 'a' + 10;
      else if (hex && c >= 'A' && c <= 'F') v = c - 'A' + 10;
      if (v < 0) return false;
      cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(v);
    }
    if (cp == 0 || cp > 0x10FFFF) return false;
    append_utf8(out, cp);
    consumed = semi + 1;
    return true;
  }
  return false;
}

// Character-level formatting ("H<inf>2</inf>O") joins its neighbours.
inline bool is_inline_tag(std::string_view body) {
  if (!body.empty() && body.front() == '/') body.remove_prefix(1);
  std::size_t n = 0;
  while (n < body.size() && is_ascii_alpha(body[n])) ++n;
  static const std::set<std::string> inline_tags = {"inf", "sup", "sub", "i", "b", "em", "strong", "u", "sc", "span"};
  return inline_tags.count(to_lower(body.substr(0, n))) > 0;
}

inline std::string clean_once(std::string_view raw) {
  // Entities first so that escaped markup ("&lt;p&gt;") is removed below.
  std::string decoded;
  decoded.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size();) {
    std::size_t consumed = 0;
    if (raw[i] == '&' && decode_entity(raw, i, decoded, consumed)) {
      i += consumed;
    } else {
      decoded += raw[i++];
    }
  }
  // Tags: '<' followed by a letter, '/', '!' or '?' up to the next '>', or to
  // the end of the text when unbalanced.
  std::string untagged;
  untagged.reserve(decoded.size());
  for (std::size_t i = 0; i < decoded.size();) {
    const char c = decoded[i];
    if (c == '<' && i + 1 < decoded.size() &&
        (is_ascii_alpha(decoded[i + 1]) || decoded[i + 1] == '/' || decoded[i + 1] == '!' ||
         decoded[i + 1] == '?')) {
      const auto close = decoded.find('>', i);
      if (close == std::string::npos) break;
      if (!is_inline_tag(std::string_view(decoded).substr(i + 1, close - i - 1))) untagged += ' ';
      i = close + 1;
    } else {
      untagged += c;
      ++i;
    }
  }
  std::string collapsed;
  collapsed.reserve(untagged.size());
  for (char c : untagged) {
    if (is_ascii_space(c)) {
      if (!collapsed.empty() && collapsed.back() != ' ') collapsed += ' ';
    } else {
      collapsed += c;
    }
  }
  std::string_view t = trim(collapsed);
  if (starts_with_icase(t, "abstract") && (t.size() == 8 || !is_ascii_alpha(t[8]))) {
    t.remove_prefix(8);
    while (!t.empty() && (t.front() == ':' || t.front() == '.' || t.front() == '-' || is_ascii_space(t.front()))) {
      t.remove_prefix(1);
    }
  }
  return std::string(t);
}

}  // namespace detail

// Markup and XML entities removed, a leading "Abstract" heading dropped and
// whitespace collapsed. Iterated to a fixed point, so idempotent; each pass
// that changes anything shortens the text, so the loop terminates.
inline std::string clean_text(std::string_view raw) {
  std::string cur(raw);
  for (;;) {
    std::string next = detail::clean_once(cur);
    if (next == cur) return next;
    cur = std::move(next);
  }
}

// ---------------------------------------------------------------------------
// filtering

struct FilterSpec {
  // ANDed groups of ORed patterns, matched against title, abstract, keywords.
  std::vector<std::vector<std::string>> title_or_abstract_terms;
  // At least one must match.
  std::vector<std::string> substrate_terms;
  std::string allowed_language = "en";
  std::set<ContentType> allowed_content_types{ContentType::Article, ContentType::Review,
                                              ContentType::Conference};
  // Stand-in for the copyright / missing-passage removal.
  std::size_t min_abstract_chars = 200;
  std::vector<std::string> blocklist_phrases{"copyright", "no abstract available"};
  // Language heuristic thresholds, used when a record's language is "unknown".
  double min_function_word_ratio = 0.05;
  double min_ascii_letter_ratio = 0.9;

  // The query used for the chromate-replacement corpus.
  static FilterSpec chromate_default() {
    FilterSpec s;
    s.title_or_abstract_terms = {{"chrom*"}, {"replace*", "substitute"}};
    s.substrate_terms = {"alumin*", "zinc", "magnesium", "alloy", "steel", "iron"};
    return s;
  }

  void validate() const {
    auto check = [](const std::string& p) {
      if (p.empty() || p == "*") throw ConfigError("empty filter pattern");
      const auto star = p.find('*');
      if (star != std::string::npos && star != p.size() - 1) {
        throw ConfigError("wildcard '*' allowed only in terminal position: " + p);
      }
    };
    for (const auto& g : title_or_abstract_terms) {
      if (g.empty()) throw ConfigError("empty filter term group");
      for (const auto& p : g) check(p);
    }
    for (const auto& p : substrate_terms) check(p);
  }
};

// Lowercased alphanumeric runs.
inline std::vector<std::string> match_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (is_ascii_alnum(c)) {
      cur += is_ascii_upper(c) ? static_cast<char>(c - 'A' + 'a') : c;
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

inline bool pattern_matches(std::string_view pattern, const std::vector<std::string>& tokens) {
  const std::string p = to_lower(pattern);
  const bool prefix = !p.empty() && p.back() == '*';
  const std::string_view stem = prefix ? std::string_view(p).substr(0, p.size() - 1) : std::string_view(p);
  for (const auto& t : tokens) {
    if (prefix ? t.starts_with(stem) : t == stem) return true;
  }
  return false;
}

struct LanguageGuess {
  double function_word_ratio = 0.0;
  double ascii_letter_ratio = 0.0;
};

inline LanguageGuess measure_language(std::string_view text, const chemtok::Lexicons& lex) {
  LanguageGuess g;
  const auto words = split_whitespace(text);
  std::size_t fw = 0;
  for (const auto& w : words) {
    if (lex.is_function_word(to_lower(w))) ++fw;
  }
  g.function_word_ratio = words.empty() ? 0.0 : static_cast<double>(fw) / static_cast<double>(words.size());
  std::size_t ascii_letters = 0;
  std::size_t letters = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto b = static_cast<unsigned char>(text[i]);
    if (is_ascii_alpha(text[i])) {
      ++ascii_letters;
      ++letters;
    } else if (b >= 0xC0) {
      // non-ASCII lead byte; count as a letter unless it is a known symbol
      // block (general punctuation, super/subscripts, math operators).
      if (!(b == 0xE2 || b == 0xC2)) ++letters;
    }
  }
  g.ascii_letter_ratio = letters == 0 ? 0.0 : static_cast<double>(ascii_letters) / static_cast<double>(letters);
  return g;
}

inline bool is_allowed_language(const DocumentRecord& r, const FilterSpec& spec, const chemtok::Lexicons& lex) {
  if (to_lower(r.language) != "unknown" && !r.language.empty()) {
    const auto tag = to_lower(r.language);
    const auto primary = tag.substr(0, tag.find_first_of("-_"));
    return primary == to_lower(spec.allowed_language);
  }
  const auto g = measure_language(r.abstract, lex);
  return g.function_word_ratio >= spec.min_function_word_ratio &&
         g.ascii_letter_ratio >= spec.min_ascii_letter_ratio;
}

inline bool passes_filter(const DocumentRecord& r, const FilterSpec& spec, const chemtok::Lexicons& lex) {
  auto tokens = match_tokens(r.title);
  auto abs_tokens = match_tokens(r.abstract);
  tokens.insert(tokens.end(), abs_tokens.begin(), abs_tokens.end());
  for (const auto& k : r.keywords) {
    auto kt = match_tokens(k);
    tokens.insert(tokens.end(), kt.begin(), kt.end());
  }
  for (const auto& group : spec.title_or_abstract_terms) {
    if (std::none_of(group.begin(), group.end(), [&](const auto& p) { return pattern_matches(p, tokens); })) {
      return false;
    }
  }
  if (!spec.substrate_terms.empty() &&
      std::none_of(spec.substrate_terms.begin(), spec.substrate_terms.end(),
                   [&](const auto& p) { return pattern_matches(p, tokens); })) {
    return false;
  }
  if (!is_allowed_language(r, spec, lex)) return false;
  if (!spec.allowed_content_types.count(r.content_type)) return false;
  if (utf8_length(r.abstract) < spec.min_abstract_chars) return false;
  const auto lower_abs = to_lower(r.abstract);
  for (const auto& phrase : spec.blocklist_phrases) {
    if (!phrase.empty() && lower_abs.find(to_lower(phrase)) != std::string::npos) return false;
  }
  return true;
}

// Per-record predicate, so the result is monotone in the input. Output order
// equals input order for any worker count.
inline std::vector<DocumentRecord> filter_records(const std::vector<DocumentRecord>& records,
                                                  const FilterSpec& spec,
                                                  const chemtok::Lexicons& lex = chemtok::Lexicons::builtin(),
                                                  unsigned workers = 1) {
  spec.validate();
  std::vector<char> keep(records.size(), 0);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) keep[i] = passes_filter(records[i], spec, lex) ? 1 : 0;
  };
  workers = std::max(1u, workers);
  if (workers == 1 || records.size() < 2) {
    work(0, records.size());
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (records.size() + workers - 1) / workers;
    for (std::size_t b = 0; b < records.size(); b += chunk) {
      pool.emplace_back(work, b, std::min(records.size(), b + chunk));
    }
    for (auto& t : pool) t.join();
  }
  std::vector<DocumentRecord> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (keep[i]) out.push_back(records[i]);
  }
  return out;
}

inline DocumentRecord clean_record(DocumentRecord r) {
  r.title = clean_text(r.title);
  r.abstract = clean_text(r.abstract);
  for (auto& k : r.keywords) k = clean_text(k);
  return r;
}

inline CorpusRecord to_corpus_record(const DocumentRecord& r) { return {r.id, clean_text(r.abstract)}; }

// ---------------------------------------------------------------------------
// record JSON

inline DocumentRecord record_from_json(const nlohmann::json& j, std::string_view where) {
  auto need_string = [&](const char* key) -> std::string {
    if (!j.contains(key)) throw ParseError(std::string(where) + ": missing field '" + key + "'");
    if (!j[key].is_string()) throw ParseError(std::string(where) + ": field '" + key + "' is not a string");
    return j[key].get<std::string>();
  };
  DocumentRecord r;
  r.id = need_string("id");
  if (r.id.empty()) throw ParseError(std::string(where) + ": empty id");
  r.abstract = need_string("abstract");
  if (j.contains("title")) r.title = j["title"].get<std::string>();
  if (j.contains("keywords")) {
    if (!j["keywords"].is_array()) throw ParseError(std::string(where) + ": 'keywords' must be an array");
    for (const auto& k : j["keywords"]) r.keywords.push_back(k.get<std::string>());
  }
  if (j.contains("language")) r.language = j["language"].get<std::string>();
  if (j.contains("content_type")) r.content_type = parse_content_type(j["content_type"].get<std::string>());
  return r;
}

inline nlohmann::ordered_json record_to_json(const DocumentRecord& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["title"] = r.title;
  j["abstract"] = r.abstract;
  j["keywords"] = r.keywords;
  j["language"] = r.language;
  j["content_type"] = std::string(to_string(r.content_type));
  return j;
}

inline std::string dump_line(const nlohmann::ordered_json& j) {
  return j.dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace);
}

// Fixture mode: every regular file in `dir`, lexicographic by filename, each
// non-blank line one record.
inline std::vector<DocumentRecord> read_fixture_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw MissingArtifact("fixture directory not found: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end(),
            [](const auto& a, const auto& b) { return a.filename().string() < b.filename().string(); });
  std::vector<DocumentRecord> out;
  for (const auto& f : files) {
    const auto lines = read_lines(f.string());
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (trim(lines[i]).empty()) continue;
      const std::string where = f.string() + ":" + std::to_string(i + 1);
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(lines[i]);
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(where + ": " + e.what());
      }
      try {
        auto r = record_from_json(j, where);
        r.source = RecordSource::Fixture;
        out.push_back(std::move(r));
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(where + ": " + e.what());
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// corpus file

struct WriteResult {
  std::size_t written = 0;
  std::size_t duplicates = 0;
};

// Later duplicates (by id) are dropped. Field order is fixed (id, text), so
// identical input gives identical bytes.
inline WriteResult write_corpus(const std::vector<CorpusRecord>& records, const std::string& path) {
  auto os = open_output(path, true);
  WriteResult res;
  std::unordered_set<std::string> seen;
  for (const auto& r : records) {
    if (r.id.empty()) throw ParseError("record with empty id");
    if (!seen.insert(r.id).second) {
      ++res.duplicates;
      continue;
    }
    nlohmann::ordered_json j;
    j["id"] = r.id;
    j["text"] = r.text;
    const auto line = dump_line(j);
    os.write(line.data(), static_cast<std::streamsize>(line.size()));
    os.put('\n');
    ++res.written;
  }
  if (!os) throw IoError("write failed: " + path);
  return res;
}

inline std::vector<CorpusRecord> read_corpus(const std::string& path) {
  const auto lines = read_lines(path);
  std::vector<CorpusRecord> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const std::string where = path + ":" + std::to_string(i + 1);
    try {
      const auto j = nlohmann::json::parse(lines[i]);
      if (!j.contains("id") || !j.contains("text")) throw ParseError(where + ": expected fields id, text");
      out.push_back({j["id"].get<std::string>(), j["text"].get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(where + ": " + e.what());
    }
  }
  return out;
}

}  // namespace chromsearch::corpus
