#pragma once

// Generated corpora shared by unit and acceptance tests.

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "chromsearch/chemtok/lexicons.hpp"
#include "chromsearch/chemtok/periodic_table.hpp"
#include "chromsearch/chemtok/tokenizer.hpp"
#include "chromsearch/subword.hpp"
#include "chromsearch/common.hpp"

namespace synthetic {

// Distinct lowercase pseudo-words (consonant-vowel syllables) that are not
// element names or English function words.
inline std::vector<std::string> pseudo_words(std::size_t n, std::uint64_t seed) {
  static const std::string cons = "bdfgklmprstvz";
  static const std::string vow = "aeiou";
  const auto lex = chromsearch::chemtok::Lexicons::builtin();
  chromsearch::Rng rng(seed);
  std::set<std::string> seen;
  std::vector<std::string> out;
  while (out.size() < n) {
    std::string w;
    const int syl = 2 + static_cast<int>(rng.below(2));
    for (int s = 0; s < syl; ++s) {
      w += cons[rng.below(cons.size())];
      w += vow[rng.below(vow.size())];
    }
    if (lex.is_element_name(w) || lex.is_function_word(w) || !seen.insert(w).second) continue;
    out.push_back(w);
  }
  return out;
}

// Random formula text built from element symbols, counts and parenthesised
// groups; `expect` receives its element multiset.
inline std::string random_formula(chromsearch::Rng& rng, std::map<std::string, long long>& expect) {
  using chromsearch::chemtok::kPeriodicTable;
  std::string s;
  expect.clear();
  const int units = 1 + static_cast<int>(rng.below(4));
  for (int u = 0; u < units; ++u) {
    std::map<std::string, long long> inner;
    std::string body;
    const int n = 1 + static_cast<int>(rng.below(3));
    for (int i = 0; i < n; ++i) {
      const auto& e = kPeriodicTable[rng.below(kPeriodicTable.size())];
      const long long c = 1 + static_cast<long long>(rng.below(5));
      body += e.symbol;
      if (c > 1) body += std::to_string(c);
      inner[std::string(e.symbol)] += c;
    }
    long long mult = 1;
    if (rng.below(4) == 0) {
      mult = 1 + static_cast<long long>(rng.below(4));
      body = "(" + body + ")" + (mult > 1 ? std::to_string(mult) : "");
    }
    s += body;
    for (const auto& [k, v] : inner) expect[k] += v * mult;
  }
  return s;
}

struct TwoTopicCorpus {
  std::vector<std::vector<std::string>> sentences;
  std::vector<std::string> topic_a;
  std::vector<std::string> topic_b;
  std::vector<std::string> function_words;
};

// Each sentence draws 6 words from one topic and 4 shared function words,
// shuffled together.
inline TwoTopicCorpus two_topic_corpus(std::size_t sentences = 2000, std::size_t topic_size = 50,
                                       std::uint64_t seed = 42) {
  TwoTopicCorpus c;
  const auto words = pseudo_words(2 * topic_size, seed);
  c.topic_a.assign(words.begin(), words.begin() + static_cast<std::ptrdiff_t>(topic_size));
  c.topic_b.assign(words.begin() + static_cast<std::ptrdiff_t>(topic_size), words.end());
  c.function_words = {"the", "of", "and", "in", "was", "with", "for", "by", "to", "is"};
  chromsearch::Rng rng(chromsearch::derive_seed(seed, "two_topic"));
  for (std::size_t i = 0; i < sentences; ++i) {
    const auto& topic = (i % 2 == 0) ? c.topic_a : c.topic_b;
    std::vector<std::string> s;
    for (int k = 0; k < 6; ++k) s.push_back(topic[rng.below(topic.size())]);
    for (int k = 0; k < 4; ++k) s.push_back(c.function_words[rng.below(c.function_words.size())]);
    rng.shuffle(s);
    c.sentences.push_back(std::move(s));
  }
  return c;
}

struct PlantedCorpus {
  std::vector<std::string> train;    // sentences as text
  std::vector<std::string> heldout;
  std::vector<std::pair<std::string, std::string>> pairs;  // A -> B
  std::vector<std::string> vocabulary;
};

// Every sentence is "A can be replaced by B." over a 200-word vocabulary:
// the first 20 words form the 10 fixed pairs, the other 180 are paired freely.
inline PlantedCorpus planted_corpus(std::size_t train_sentences = 500, std::size_t heldout_sentences = 100,
                                    std::uint64_t seed = 42) {
  PlantedCorpus c;
  c.vocabulary = pseudo_words(200, chromsearch::derive_seed(seed, "planted.words"));
  for (std::size_t i = 0; i < 10; ++i) c.pairs.emplace_back(c.vocabulary[2 * i], c.vocabulary[2 * i + 1]);
  // Half the sentences use a fixed pair, the rest pair two other words at random.
  const std::vector<std::string> other(c.vocabulary.begin() + 20, c.vocabulary.end());
  auto make = [&](chromsearch::Rng& rng) {
    if (rng.below(2) == 0) {
      const auto& p = c.pairs[rng.below(c.pairs.size())];
      return p.first + " can be replaced by " + p.second + ".";
    }
    const auto a = rng.below(other.size());
    auto b = rng.below(other.size() - 1);
    if (b >= a) ++b;
    return other[a] + " can be replaced by " + other[b] + ".";
  };
  chromsearch::Rng train_rng(chromsearch::derive_seed(seed, "planted.train"));
  for (std::size_t i = 0; i < train_sentences; ++i) c.train.push_back(make(train_rng));
  chromsearch::Rng held_rng(chromsearch::derive_seed(seed, "planted.heldout"));
  for (std::size_t i = 0; i < heldout_sentences; ++i) c.heldout.push_back(make(held_rng));
  return c;
}

struct EncodedPlanted {
  chromsearch::subword::WordPieceVocab vocab;
  std::vector<chromsearch::subword::EncodedSequence> train;
  std::vector<chromsearch::subword::EncodedSequence> heldout;
};

inline EncodedPlanted encode_planted(const PlantedCorpus& c, std::size_t target_size, std::size_t max_seq) {
  using namespace chromsearch;
  const auto lex = chemtok::Lexicons::builtin();
  auto tok = [&](const std::string& s) { return chemtok::normalized_tokens(s, chemtok::PlaceholderPolicy::Off, lex); };
  std::vector<std::string> all;
  for (const auto& s : c.train) {
    auto t = tok(s);
    all.insert(all.end(), t.begin(), t.end());
  }
  EncodedPlanted e;
  e.vocab = subword::train_wordpiece(all, target_size);
  for (const auto& s : c.train) e.train.push_back(subword::encode(e.vocab, tok(s), max_seq));
  for (const auto& s : c.heldout) e.heldout.push_back(subword::encode(e.vocab, tok(s), max_seq));
  return e;
}

}  // namespace synthetic
