#pragma once

// Evaluation of ranked candidate lists: relevance filtering, benchmark
// category matching, per-model rates, inter-model overlap, corpus
// frequencies and the figure-ready CSV exports.

#include <algorithm>
#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "chromsearch/chemtok/formula.hpp"
#include "chromsearch/chemtok/lexicons.hpp"
#include "chromsearch/chemtok/tokenizer.hpp"
#include "chromsearch/common.hpp"
#include "chromsearch/csv.hpp"

namespace chromsearch::evalrank {

inline constexpr std::string_view kWordModelLabel = "w2v";
inline constexpr std::array<std::string_view, 6> kMaskLabels = {"can", "may", "chromate", "inhibitor", "perform",
                                                                 "coating"};
inline constexpr int kCategoryCount = 20;

inline bool is_mask_label(std::string_view l) {
  return std::find(kMaskLabels.begin(), kMaskLabels.end(), l) != kMaskLabels.end();
}

// Comparison key: subscripts mapped to ASCII, formulas normalized, then
// lowercased.
inline std::string term_key(std::string_view term) {
  const std::string mapped(trim(chemtok::map_subscripts(term)));
  if (auto f = chemtok::normalize_formula_text(mapped)) return to_lower(*f);
  return to_lower(mapped);
}

// ---------------------------------------------------------------------------
// candidate lists

struct CandidateEntry {
  int rank;
  std::string term;
};

struct CandidateList {
  std::string model_label;
  std::vector<CandidateEntry> entries;

  void validate() const {
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (entries[i].term.empty()) throw ParseError(model_label + ": empty term at position " + std::to_string(i + 1));
      if (i > 0 && entries[i].rank <= entries[i - 1].rank) {
        throw ParseError(model_label + ": ranks not strictly increasing at position " + std::to_string(i + 1));
      }
    }
  }
};

// First k entries, source ranks kept.
inline CandidateList take_top_k(const CandidateList& list, std::size_t k) {
  CandidateList out{list.model_label, {}};
  for (std::size_t i = 0; i < list.entries.size() && i < k; ++i) out.entries.push_back(list.entries[i]);
  return out;
}

// model_label,rank,term; lists returned in order of first appearance.
inline std::vector<CandidateList> load_candidate_lists(const std::string& path) {
  const auto t = csv::read_table(path, {"model_label", "rank", "term"});
  std::vector<CandidateList> lists;
  std::map<std::string, std::size_t> where;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    const std::string loc = path + ":" + std::to_string(t.line_numbers[i]);
    int rank = 0;
    try {
      rank = static_cast<int>(parse_int(r[1], "rank"));
    } catch (const ConfigError& e) {
      throw ParseError(loc + ": " + e.what());
    }
    auto [it, fresh] = where.emplace(r[0], lists.size());
    if (fresh) lists.push_back({r[0], {}});
    lists[it->second].entries.push_back({rank, std::string(trim(r[2]))});
  }
  for (const auto& l : lists) l.validate();
  return lists;
}

inline void write_candidate_list(const CandidateList& list, std::ostream& os) {
  for (const auto& e : list.entries) {
    os << csv::escape(list.model_label) << ',' << e.rank << ',' << csv::escape(e.term) << '\n';
  }
}

// ---------------------------------------------------------------------------
// benchmark lexicon

struct BenchmarkCategory {
  int id;
  std::string name;
  std::vector<std::string> aliases;
};

class BenchmarkLexicon {
 public:
  static BenchmarkLexicon load(const std::string& path) {
    const auto t = csv::read_table(path, {"category_id", "category_name", "alias"});
    BenchmarkLexicon lx;
    lx.categories_.resize(kCategoryCount);
    for (int i = 0; i < kCategoryCount; ++i) lx.categories_[static_cast<std::size_t>(i)].id = i + 1;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      const auto& r = t.rows[i];
      const std::string loc = path + ":" + std::to_string(t.line_numbers[i]);
      long long id = 0;
      try {
        id = parse_int(r[0], "category_id");
      } catch (const ConfigError& e) {
        throw ParseError(loc + ": " + e.what());
      }
      if (id < 1 || id > kCategoryCount) throw ParseError(loc + ": category id outside 1..20");
      auto& c = lx.categories_[static_cast<std::size_t>(id - 1)];
      if (c.name.empty()) c.name = r[1];
      else if (c.name != r[1]) throw ParseError(loc + ": inconsistent name for category " + std::to_string(id));
      lx.add_alias(static_cast<int>(id), r[2], loc);
    }
    for (const auto& c : lx.categories_) {
      if (c.name.empty()) throw ParseError(path + ": category " + std::to_string(c.id) + " has no entries");
    }
    return lx;
  }

  // Category id, or nullopt.
  std::optional<int> match(std::string_view term) const {
    const auto lit = to_lower(trim(chemtok::map_subscripts(term)));
    if (auto it = index_.find(lit); it != index_.end()) return it->second;
    if (auto it = index_.find(term_key(term)); it != index_.end()) return it->second;
    return std::nullopt;
  }

  const std::vector<BenchmarkCategory>& categories() const { return categories_; }
  const BenchmarkCategory& category(int id) const { return categories_.at(static_cast<std::size_t>(id - 1)); }

 private:
  void add_alias(int id, const std::string& alias, const std::string& loc) {
    if (trim(alias).empty()) throw ParseError(loc + ": empty alias");
    categories_[static_cast<std::size_t>(id - 1)].aliases.push_back(alias);
    std::set<std::string> keys{to_lower(trim(chemtok::map_subscripts(alias))), term_key(alias)};
    for (const auto& k : keys) {
      auto [it, fresh] = index_.emplace(k, id);
      if (!fresh && it->second != id) {
        throw ParseError(loc + ": alias '" + alias + "' already belongs to category " + std::to_string(it->second));
      }
    }
  }

  std::vector<BenchmarkCategory> categories_;
  std::unordered_map<std::string, int> index_;
};

inline std::optional<int> match_benchmark(std::string_view term, const BenchmarkLexicon& lx) { return lx.match(term); }

// ---------------------------------------------------------------------------
// relevance

// Patterns are lowercase literals with an optional leading or trailing '*',
// plus two classes: "@element" (element symbol or name) and "@formula"
// (parses as a multi-element formula).
class RelevanceLexicons {
 public:
  std::vector<std::string> allow;
  std::vector<std::string> stop;

  static RelevanceLexicons load(const std::string& allow_path, const std::string& stop_path,
                                chemtok::Lexicons words = chemtok::Lexicons::builtin()) {
    RelevanceLexicons r;
    r.words_ = std::move(words);
    auto read = [](const std::string& p) {
      std::vector<std::string> out;
      for (const auto& line : read_lines(p)) {
        const auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        out.push_back(to_lower(t));
      }
      return out;
    };
    r.allow = read(allow_path);
    r.stop = read(stop_path);
    r.validate();
    return r;
  }

  void validate() const {
    std::set<std::string> a(allow.begin(), allow.end());
    for (const auto& s : stop) {
      if (a.count(s)) throw ConfigError("pattern in both allowlist and stoplist: " + s);
    }
  }

  bool matches(const std::vector<std::string>& patterns, std::string_view term) const {
    const std::string mapped(trim(chemtok::map_subscripts(term)));
    const auto lower = to_lower(mapped);
    for (const auto& p : patterns) {
      if (p == "@element") {
        if (chemtok::is_element_symbol(mapped) || words_.is_element_name(lower)) return true;
      } else if (p == "@formula") {
        if (auto f = chemtok::parse_formula(mapped); f && !f->is_single_element()) return true;
      } else if (p.size() > 1 && p.front() == '*') {
        if (lower.ends_with(std::string_view(p).substr(1))) return true;
      } else if (p.size() > 1 && p.back() == '*') {
        if (lower.starts_with(std::string_view(p).substr(0, p.size() - 1))) return true;
      } else if (lower == p) {
        return true;
      }
    }
    return false;
  }

  bool is_relevant(std::string_view term) const { return matches(allow, term) && !matches(stop, term); }

 private:
  chemtok::Lexicons words_ = chemtok::Lexicons::builtin();
};

// Hand-curated relevant terms (by term_key); reproduces manual judgments.
struct CuratedRelevance {
  std::set<std::string> keys;

  static CuratedRelevance load(const std::string& path) {
    CuratedRelevance c;
    for (const auto& line : read_lines(path)) {
      const auto t = trim(line);
      if (t.empty() || t.front() == '#') continue;
      c.keys.insert(term_key(t));
    }
    return c;
  }
  bool is_relevant(std::string_view term) const { return keys.count(term_key(term)) > 0; }
};

template <class Relevance>
CandidateList relevance_filter(const CandidateList& list, const Relevance& rel) {
  CandidateList out{list.model_label, {}};
  for (const auto& e : list.entries) {
    if (rel.is_relevant(e.term)) out.entries.push_back(e);
  }
  return out;
}

// ---------------------------------------------------------------------------
// corpus frequency

class TermCounter {
 public:
  void add_tokens(const std::vector<std::string>& tokens) {
    for (const auto& t : tokens) ++counts_[term_key(t)];
  }

  // Token streams come from the word pipeline with placeholders off, so
  // element names and symbols survive.
  static TermCounter from_texts(const std::vector<std::string>& texts,
                                const chemtok::Lexicons& lex = chemtok::Lexicons::builtin()) {
    TermCounter c;
    for (const auto& t : texts) c.add_tokens(chemtok::normalized_tokens(t, chemtok::PlaceholderPolicy::Off, lex));
    return c;
  }

  long long frequency(std::string_view term) const {
    auto it = counts_.find(term_key(term));
    return it == counts_.end() ? 0 : it->second;
  }

 private:
  std::unordered_map<std::string, long long> counts_;
};

inline long long corpus_frequency(const TermCounter& counter, std::string_view term) {
  return counter.frequency(term);
}

// ---------------------------------------------------------------------------
// report

enum class OverlapDefinition { OverWordModel, OverUnion };

inline std::string describe(OverlapDefinition d) {
  return d == OverlapDefinition::OverWordModel
             ? "overlap = |relevant(w2v) & relevant(bert_union)| / |relevant(w2v)|, distinct terms compared by "
               "case-insensitive key with subscripts mapped and formulas normalized"
             : "overlap = |relevant(w2v) & relevant(bert_union)| / |relevant(w2v) | relevant(bert_union)|, distinct "
               "terms compared by case-insensitive key with subscripts mapped and formulas normalized";
}

struct ModelStats {
  std::string label;
  std::size_t list_length = 0;
  std::size_t relevant = 0;
  std::size_t benchmark = 0;
  double rate = 0.0;  // benchmark / relevant, 0 when nothing is relevant
  std::array<std::size_t, kCategoryCount> per_category{};
};

struct FrequencyRow {
  std::string term;
  long long count = 0;
  bool out_of_corpus = false;
};

struct EvalReport {
  std::vector<ModelStats> models;
  std::vector<BenchmarkCategory> categories;
  std::array<std::size_t, kCategoryCount> w2v_per_category{};
  std::array<std::size_t, kCategoryCount> bert_per_category{};  // summed over the mask lists
  std::size_t bert_union_relevant = 0;                           // distinct terms
  std::size_t w2v_distinct_relevant = 0;
  std::size_t overlap_count = 0;
  std::size_t overlap_denominator = 0;
  double overlap_rate = 0.0;
  OverlapDefinition overlap_definition = OverlapDefinition::OverWordModel;
  std::vector<FrequencyRow> frequencies;

  const ModelStats* model(std::string_view label) const {
    for (const auto& m : models) {
      if (m.label == label) return &m;
    }
    return nullptr;
  }

  std::vector<int> categories_missed_by_w2v() const {
    std::vector<int> out;
    for (int i = 0; i < kCategoryCount; ++i) {
      if (w2v_per_category[static_cast<std::size_t>(i)] == 0) out.push_back(i + 1);
    }
    return out;
  }
  std::size_t bert_categories_covered() const {
    return static_cast<std::size_t>(
        std::count_if(bert_per_category.begin(), bert_per_category.end(), [](std::size_t c) { return c > 0; }));
  }
};

struct ReportOptions {
  OverlapDefinition overlap = OverlapDefinition::OverWordModel;
  std::vector<std::string> frequency_terms;
};

template <class Relevance>
EvalReport compute_report(const std::vector<CandidateList>& lists, const Relevance& rel, const BenchmarkLexicon& bench,
                          const TermCounter* counter = nullptr, const ReportOptions& opt = {}) {
  EvalReport rep;
  rep.categories = bench.categories();
  rep.overlap_definition = opt.overlap;
  std::set<std::string> w2v_keys;
  std::set<std::string> bert_keys;
  for (const auto& list : lists) {
    ModelStats s;
    s.label = list.model_label;
    s.list_length = list.entries.size();
    const auto relevant = relevance_filter(list, rel);
    s.relevant = relevant.entries.size();
    const bool is_w2v = list.model_label == kWordModelLabel;
    const bool is_bert = is_mask_label(list.model_label);
    for (const auto& e : relevant.entries) {
      const auto key = term_key(e.term);
      if (is_w2v) w2v_keys.insert(key);
      if (is_bert) bert_keys.insert(key);
      if (auto cat = bench.match(e.term)) {
        ++s.benchmark;
        const auto ci = static_cast<std::size_t>(*cat - 1);
        ++s.per_category[ci];
        if (is_w2v) ++rep.w2v_per_category[ci];
        if (is_bert) ++rep.bert_per_category[ci];
      }
    }
    s.rate = s.relevant == 0 ? 0.0 : static_cast<double>(s.benchmark) / static_cast<double>(s.relevant);
    rep.models.push_back(std::move(s));
  }
  rep.bert_union_relevant = bert_keys.size();
  rep.w2v_distinct_relevant = w2v_keys.size();
  for (const auto& k : w2v_keys) rep.overlap_count += bert_keys.count(k);
  rep.overlap_denominator = opt.overlap == OverlapDefinition::OverWordModel
                                ? w2v_keys.size()
                                : w2v_keys.size() + bert_keys.size() - rep.overlap_count;
  rep.overlap_rate = rep.overlap_denominator == 0
                         ? 0.0
                         : static_cast<double>(rep.overlap_count) / static_cast<double>(rep.overlap_denominator);
  if (counter != nullptr) {
    for (const auto& t : opt.frequency_terms) {
      const auto n = counter->frequency(t);
      rep.frequencies.push_back({t, n, n == 0});
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// export

inline void export_report(const EvalReport& rep, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  auto open = [&](const char* name) { return open_output((out_dir / name).string(), true); };
  {
    auto os = open("figure4.csv");
    os << "model,count\n";
    for (const auto& m : rep.models) os << csv::escape(m.label) << ',' << m.relevant << '\n';
  }
  {
    auto os = open("figure5.csv");
    os << "model,benchmark_count\n";
    for (const auto& m : rep.models) os << csv::escape(m.label) << ',' << m.benchmark << '\n';
  }
  {
    auto os = open("figure6.csv");
    os << "category_id,category_name,w2v_count,bert_count\n";
    for (const auto& c : rep.categories) {
      const auto i = static_cast<std::size_t>(c.id - 1);
      os << c.id << ',' << csv::escape(c.name) << ',' << rep.w2v_per_category[i] << ',' << rep.bert_per_category[i]
         << '\n';
    }
  }
  {
    auto os = open("summary.csv");
    os << "metric,value\n";
    if (!rep.models.empty()) {
      for (const auto& m : rep.models) {
        os << "relevant_count[" << m.label << "]," << m.relevant << '\n';
        os << "benchmark_count[" << m.label << "]," << m.benchmark << '\n';
        os << "benchmark_related_rate[" << m.label << "]," << format_fixed(m.rate, 6) << '\n';
      }
      os << "bert_union_relevant," << rep.bert_union_relevant << '\n';
      os << "bert_categories_covered," << rep.bert_categories_covered() << '\n';
      std::string missed;
      for (int c : rep.categories_missed_by_w2v()) missed += (missed.empty() ? "" : ";") + std::to_string(c);
      os << "w2v_categories_missed," << csv::escape(missed) << '\n';
      os << "overlap_count," << rep.overlap_count << '\n';
      os << "overlap_denominator," << rep.overlap_denominator << '\n';
      os << "overlap_rate," << format_fixed(rep.overlap_rate, 6) << '\n';
      os << "overlap_definition," << csv::escape(describe(rep.overlap_definition)) << '\n';
      for (const auto& f : rep.frequencies) {
        os << "frequency[" << f.term << "]," << f.count << (f.out_of_corpus ? " (out-of-corpus)" : "") << '\n';
      }
    }
  }
}

}  // namespace chromsearch::evalrank
