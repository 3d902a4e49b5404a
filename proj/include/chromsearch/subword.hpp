#pragma once

// Subword vocabulary for the encoder path. Training is frequency-greedy pair
// merging over word types (continuation pieces carry "##"); encoding is
// greedy longest-match per word with an UNK fallback.

#include <algorithm>
#include <map>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "chromsearch/common.hpp"

namespace chromsearch::subword {

inline constexpr std::string_view kPad = "[PAD]";
inline constexpr std::string_view kUnk = "[UNK]";
inline constexpr std::string_view kCls = "[CLS]";
inline constexpr std::string_view kSep = "[SEP]";
inline constexpr std::string_view kMask = "[MASK]";
inline constexpr std::string_view kContinuation = "##";

inline constexpr int kPadId = 0;
inline constexpr int kUnkId = 1;
inline constexpr int kClsId = 2;
inline constexpr int kSepId = 3;
inline constexpr int kMaskId = 4;
inline constexpr int kNumSpecials = 5;

inline constexpr std::size_t kDefaultTargetSize = 2000;
inline constexpr std::size_t kBaseTargetSize = 30000;
inline constexpr std::size_t kMaxCharsPerWord = 100;

inline bool is_special_id(int id) { return id >= 0 && id < kNumSpecials; }

class WordPieceVocab {
 public:
  WordPieceVocab() {
    for (auto s : {kPad, kUnk, kCls, kSep, kMask}) add(std::string(s));
  }

  // Returns the id of `piece`, adding it when new.
  int add(const std::string& piece) {
    if (auto it = index_.find(piece); it != index_.end()) return it->second;
    const int id = static_cast<int>(entries_.size());
    entries_.push_back(piece);
    index_.emplace(piece, id);
    return id;
  }

  int id_of(std::string_view piece) const {
    auto it = index_.find(std::string(piece));
    return it == index_.end() ? -1 : it->second;
  }
  bool contains(std::string_view piece) const { return id_of(piece) >= 0; }

  const std::string& piece(int id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= entries_.size()) {
      throw Error("token id out of range: " + std::to_string(id));
    }
    return entries_[static_cast<std::size_t>(id)];
  }

  std::size_t size() const { return entries_.size(); }
  const std::vector<std::string>& entries() const { return entries_; }

  void save(const std::string& path) const {
    auto os = open_output(path, true);
    for (const auto& e : entries_) {
      os << e << '\n';
    }
    if (!os) throw IoError("write failed: " + path);
  }

  static WordPieceVocab load(const std::string& path) {
    const auto lines = read_lines(path);
    if (lines.size() < kNumSpecials) throw ParseError(path + ": vocab shorter than the special block");
    WordPieceVocab v;
    for (std::size_t i = 0; i < kNumSpecials; ++i) {
      if (lines[i] != v.entries_[i]) {
        throw ParseError(path + ":" + std::to_string(i + 1) + ": expected special " + v.entries_[i]);
      }
    }
    for (std::size_t i = kNumSpecials; i < lines.size(); ++i) {
      if (lines[i].empty() || v.contains(lines[i])) {
        throw ParseError(path + ":" + std::to_string(i + 1) + ": empty or duplicate piece");
      }
      v.add(lines[i]);
    }
    return v;
  }

 private:
  std::vector<std::string> entries_;
  std::unordered_map<std::string, int> index_;
};

struct EncodedSequence {
  std::vector<int> ids;
  std::vector<int> type_ids;
  std::vector<int> attention_mask;

  std::size_t real_length() const {
    return static_cast<std::size_t>(std::count(attention_mask.begin(), attention_mask.end(), 1));
  }
};

// ---------------------------------------------------------------------------
// training

namespace detail {

inline std::string strip_continuation(const std::string& p) {
  return p.starts_with(kContinuation) ? p.substr(kContinuation.size()) : p;
}

inline std::string merged_piece(const std::string& a, const std::string& b) {
  return a + strip_continuation(b);
}

}  // namespace detail

// `words` is the flattened token stream; only word types and their counts
// matter. Every character seen enters the vocabulary in both initial and
// continuation form, so any word over the seen alphabet stays encodable.
inline WordPieceVocab train_wordpiece(const std::vector<std::string>& words, std::size_t target_size) {
  std::map<std::string, long long> type_counts;
  for (const auto& w : words) {
    if (w.empty() || utf8_length(w) > kMaxCharsPerWord) continue;
    ++type_counts[w];
  }
  if (type_counts.empty()) throw ConfigError("cannot train a subword vocabulary on an empty corpus");

  std::vector<std::string> alphabet;
  {
    std::map<std::string, int> chars;
    for (const auto& [w, c] : type_counts) {
      for (auto& ch : utf8_chars(w)) chars.emplace(ch, 0);
    }
    for (const auto& [ch, unused] : chars) alphabet.push_back(ch);
  }
  const std::size_t base = kNumSpecials + 2 * alphabet.size();
  if (target_size < base) {
    throw ConfigError("target_size " + std::to_string(target_size) + " below alphabet size + specials (" +
                      std::to_string(base) + ")");
  }

  WordPieceVocab vocab;
  for (const auto& ch : alphabet) vocab.add(ch);
  for (const auto& ch : alphabet) vocab.add(std::string(kContinuation) + ch);

  struct WordState {
    std::vector<int> pieces;
    long long count;
  };
  std::vector<WordState> states;
  states.reserve(type_counts.size());
  for (const auto& [w, c] : type_counts) {
    WordState s{{}, c};
    bool first = true;
    for (auto& ch : utf8_chars(w)) {
      s.pieces.push_back(vocab.id_of(first ? ch : std::string(kContinuation) + ch));
      first = false;
    }
    states.push_back(std::move(s));
  }

  auto key = [](int a, int b) { return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b); };
  std::unordered_map<std::uint64_t, long long> pairs;
  while (vocab.size() < target_size) {
    pairs.clear();
    for (const auto& s : states) {
      for (std::size_t i = 0; i + 1 < s.pieces.size(); ++i) pairs[key(s.pieces[i], s.pieces[i + 1])] += s.count;
    }
    // Highest count wins; ties go to the lexicographically smallest
    // (left, right) piece pair.
    std::uint64_t best = 0;
    long long best_count = 0;
    for (const auto& [k, c] : pairs) {
      if (c < best_count) continue;
      if (c > best_count) {
        best = k;
        best_count = c;
        continue;
      }
      const auto& bl = vocab.piece(static_cast<int>(best >> 32));
      const auto& br = vocab.piece(static_cast<int>(best & 0xFFFFFFFFu));
      const auto& kl = vocab.piece(static_cast<int>(k >> 32));
      const auto& kr = vocab.piece(static_cast<int>(k & 0xFFFFFFFFu));
      if (std::tie(kl, kr) < std::tie(bl, br)) best = k;
    }
    if (best_count < 2) break;
    const int left = static_cast<int>(best >> 32);
    const int right = static_cast<int>(best & 0xFFFFFFFFu);
    const int merged = vocab.add(detail::merged_piece(vocab.piece(left), vocab.piece(right)));
    for (auto& s : states) {
      std::size_t out = 0;
      for (std::size_t i = 0; i < s.pieces.size(); ++i) {
        if (i + 1 < s.pieces.size() && s.pieces[i] == left && s.pieces[i + 1] == right) {
          s.pieces[out++] = merged;
          ++i;
        } else {
          s.pieces[out++] = s.pieces[i];
        }
      }
      s.pieces.resize(out);
    }
  }
  return vocab;
}

// ---------------------------------------------------------------------------
// encoding

// Ids of one word, or a single UNK when any remainder cannot be matched.
inline std::vector<int> encode_word(const WordPieceVocab& vocab, std::string_view word) {
  const auto chars = utf8_chars(word);
  if (chars.empty() || chars.size() > kMaxCharsPerWord) return {kUnkId};
  std::vector<int> ids;
  std::size_t start = 0;
  while (start < chars.size()) {
    int found = -1;
    std::size_t found_end = start;
    std::string candidate = start > 0 ? std::string(kContinuation) : std::string();
    const std::size_t prefix_len = candidate.size();
    for (std::size_t k = start; k < chars.size(); ++k) candidate += chars[k];
    for (std::size_t end = chars.size(); end > start; --end) {
      if (const int id = vocab.id_of(candidate); id >= 0 && !is_special_id(id)) {
        found = id;
        found_end = end;
        break;
      }
      candidate.resize(candidate.size() - chars[end - 1].size());
      if (candidate.size() == prefix_len) break;
    }
    if (found < 0) return {kUnkId};
    ids.push_back(found);
    start = found_end;
  }
  return ids;
}

inline std::vector<int> encode_words(const WordPieceVocab& vocab, const std::vector<std::string>& words) {
  std::vector<int> ids;
  for (const auto& w : words) {
    auto wi = encode_word(vocab, w);
    ids.insert(ids.end(), wi.begin(), wi.end());
  }
  return ids;
}

// [CLS] a [SEP] (b [SEP]), truncated so that CLS and every SEP survive, then
// padded to max_len.
inline EncodedSequence assemble(std::vector<int> a, std::vector<int> b, bool pair, std::size_t max_len) {
  if (max_len < 3 || (pair && max_len < 4)) throw ConfigError("max_len too small: " + std::to_string(max_len));
  const std::size_t specials = pair ? 3 : 2;
  while (a.size() + b.size() + specials > max_len) {
    if (b.size() > a.size()) b.pop_back();
    else a.pop_back();
  }
  EncodedSequence s;
  s.ids.push_back(kClsId);
  s.type_ids.push_back(0);
  for (int id : a) {
    s.ids.push_back(id);
    s.type_ids.push_back(0);
  }
  s.ids.push_back(kSepId);
  s.type_ids.push_back(0);
  if (pair) {
    for (int id : b) {
      s.ids.push_back(id);
      s.type_ids.push_back(1);
    }
    s.ids.push_back(kSepId);
    s.type_ids.push_back(1);
  }
  s.attention_mask.assign(s.ids.size(), 1);
  while (s.ids.size() < max_len) {
    s.ids.push_back(kPadId);
    s.type_ids.push_back(0);
    s.attention_mask.push_back(0);
  }
  return s;
}

inline EncodedSequence encode(const WordPieceVocab& vocab, const std::vector<std::string>& words,
                              std::size_t max_len) {
  if (max_len < 3) throw ConfigError("max_len must be >= 3");
  return assemble(encode_words(vocab, words), {}, false, max_len);
}

inline EncodedSequence encode_pair(const WordPieceVocab& vocab, const std::vector<std::string>& a,
                                   const std::vector<std::string>& b, std::size_t max_len) {
  return assemble(encode_words(vocab, a), encode_words(vocab, b), true, max_len);
}

// Drops PAD/CLS/SEP/MASK, keeps UNK as its literal, glues "##" pieces.
inline std::string decode(const WordPieceVocab& vocab, const std::vector<int>& ids) {
  std::string out;
  for (int id : ids) {
    const auto& p = vocab.piece(id);
    if (is_special_id(id) && id != kUnkId) continue;
    if (p.starts_with(kContinuation) && !out.empty()) {
      out += p.substr(kContinuation.size());
    } else {
      if (!out.empty()) out += ' ';
      out += p;
    }
  }
  return out;
}

}  // namespace chromsearch::subword
