#pragma once

// Glue between the cleaned corpus and the two model families.

#include <string>
#include <vector>

#include "chromsearch/chemtok/tokenizer.hpp"
#include "chromsearch/corpus.hpp"
#include "chromsearch/embed.hpp"
#include "chromsearch/subword.hpp"

namespace chromsearch::pipeline {

// One token list per sentence.
inline embed::Corpus sentences(const std::vector<corpus::CorpusRecord>& records, chemtok::PlaceholderPolicy policy,
                               const chemtok::Lexicons& lex) {
  embed::Corpus out;
  for (const auto& r : records) {
    for (const auto& s : chemtok::tokenize_text(r.text, policy, lex)) {
      std::vector<std::string> toks;
      toks.reserve(s.tokens.size());
      for (const auto& t : s.tokens) toks.push_back(t.normalized);
      if (!toks.empty()) out.push_back(std::move(toks));
    }
  }
  return out;
}

// Flat word stream for subword training (placeholders off).
inline std::vector<std::string> words(const std::vector<corpus::CorpusRecord>& records,
                                      const chemtok::Lexicons& lex) {
  std::vector<std::string> out;
  for (const auto& r : records) {
    auto t = chemtok::normalized_tokens(r.text, chemtok::PlaceholderPolicy::Off, lex);
    out.insert(out.end(), t.begin(), t.end());
  }
  return out;
}

// One encoded sequence per sentence, truncated to max_len.
inline std::vector<subword::EncodedSequence> encode_sentences(const embed::Corpus& sents,
                                                              const subword::WordPieceVocab& vocab,
                                                              std::size_t max_len) {
  std::vector<subword::EncodedSequence> out;
  out.reserve(sents.size());
  for (const auto& s : sents) out.push_back(subword::encode(vocab, s, max_len));
  return out;
}

}  // namespace chromsearch::pipeline
