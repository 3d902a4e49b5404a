#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "chromsearch/common.hpp"
#include "chromsearch/mlm/config.hpp"
#include "chromsearch/subword.hpp"

namespace chromsearch::mlm {

struct MaskedExample {
  std::vector<int> input_ids;
  std::vector<int> type_ids;
  std::vector<int> attention_mask;
  std::vector<int> labels;  // original id where chosen, kIgnoreLabel elsewhere

  std::size_t masked_count() const {
    std::size_t n = 0;
    for (int l : labels) n += l != kIgnoreLabel ? 1 : 0;
    return n;
  }
};

inline bool is_maskable(int id, int attention) {
  return attention == 1 && id != subword::kPadId && id != subword::kClsId && id != subword::kSepId;
}

// Splits n chosen positions into (mask, random, keep) counts by the largest
// remainder of n * fractions; remainder ties favour the earlier bucket.
inline std::array<std::size_t, 3> corruption_split(std::size_t n, double mask_fraction, double random_fraction) {
  const std::array<double, 3> quota{n * mask_fraction, n * random_fraction,
                                    n * (1.0 - mask_fraction - random_fraction)};
  std::array<std::size_t, 3> out{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    out[i] = static_cast<std::size_t>(std::floor(quota[i] + 1e-9));
    assigned += out[i];
  }
  std::array<std::size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return quota[a] - static_cast<double>(out[a]) > quota[b] - static_cast<double>(out[b]) + 1e-12;
  });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++out[order[k % 3]];
  return out;
}

struct MaskOutcome {
  std::vector<MaskedExample> examples;
  std::size_t skipped = 0;  // sequences without maskable tokens
};

// Picks round(rate * maskable) positions uniformly without replacement per
// sequence and corrupts them 80/10/10 (configurable).
inline MaskOutcome mask_batch(const std::vector<subword::EncodedSequence>& seqs, const EncoderConfig& c, Rng& rng) {
  MaskOutcome out;
  for (const auto& s : seqs) {
    std::vector<std::size_t> maskable;
    for (std::size_t i = 0; i < s.ids.size(); ++i) {
      if (is_maskable(s.ids[i], s.attention_mask[i])) maskable.push_back(i);
    }
    if (maskable.empty()) {
      ++out.skipped;
      continue;
    }
    const auto n = static_cast<std::size_t>(std::llround(c.mask_rate * static_cast<double>(maskable.size())));
    // partial Fisher-Yates: the first n entries are the chosen positions
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(maskable.size() - i));
      std::swap(maskable[i], maskable[j]);
    }
    const auto split = corruption_split(n, c.mask_token_fraction, c.random_token_fraction);
    MaskedExample ex{s.ids, s.type_ids, s.attention_mask, std::vector<int>(s.ids.size(), kIgnoreLabel)};
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t pos = maskable[k];
      ex.labels[pos] = s.ids[pos];
      if (k < split[0]) {
        ex.input_ids[pos] = subword::kMaskId;
      } else if (k < split[0] + split[1]) {
        const auto span = static_cast<std::uint64_t>(c.vocab_size - subword::kNumSpecials);
        ex.input_ids[pos] = subword::kNumSpecials + static_cast<int>(rng.below(span));
      }
    }
    out.examples.push_back(std::move(ex));
  }
  return out;
}

}  // namespace chromsearch::mlm
