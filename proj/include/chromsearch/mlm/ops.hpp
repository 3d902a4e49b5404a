#pragma once

// Prediction-head arithmetic: softmax, argmax, masked-token loss and
// perplexity.

#include <cmath>
#include <span>
#include <vector>

#include "chromsearch/common.hpp"
#include "chromsearch/mlm/config.hpp"
#include "chromsearch/mlm/params.hpp"

namespace chromsearch::mlm {

// Max-shifted, so large logits cannot overflow.
template <class T>
std::vector<double> softmax(std::span<const T> z) {
  if (z.empty()) throw NumericError("softmax of an empty vector");
  double m = -std::numeric_limits<double>::infinity();
  for (auto x : z) {
    if (!std::isfinite(static_cast<double>(x))) throw NumericError("softmax input is not finite");
    m = std::max(m, static_cast<double>(x));
  }
  std::vector<double> out(z.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    out[i] = std::exp(static_cast<double>(z[i]) - m);
    sum += out[i];
  }
  for (auto& x : out) x /= sum;
  return out;
}

inline std::vector<double> softmax(const std::vector<double>& z) { return softmax(std::span<const double>(z)); }

// Smallest index attaining the maximum.
template <class T>
std::size_t argmax_select(std::span<const T> v) {
  if (v.empty()) throw Error("argmax of an empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

inline std::size_t argmax_select(const std::vector<double>& v) { return argmax_select(std::span<const double>(v)); }

// log softmax(z)[target], computed stably.
template <class T>
double log_prob(std::span<const T> z, int target) {
  double m = -std::numeric_limits<double>::infinity();
  for (auto x : z) m = std::max(m, static_cast<double>(x));
  double sum = 0.0;
  for (auto x : z) sum += std::exp(static_cast<double>(x) - m);
  return static_cast<double>(z[static_cast<std::size_t>(target)]) - m - std::log(sum);
}

// Mean negative log-likelihood (nats) over positions whose label is not
// kIgnoreLabel. `logits` is seq_len x vocab.
template <class S>
double mlm_loss(const Tensor<S>& logits, const std::vector<int>& labels) {
  if (labels.size() != logits.rows) throw Error("mlm_loss: labels length does not match logits rows");
  double total = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == kIgnoreLabel) continue;
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= logits.cols) throw Error("mlm_loss: label out of range");
    total -= log_prob(std::span<const S>(logits.row(i), logits.cols), labels[i]);
    ++n;
  }
  if (n == 0) throw Error("mlm_loss: no masked positions");
  return total / static_cast<double>(n);
}

// PP = 2^H with H = -(1/N) sum log2 p.
inline double perplexity_from_log2(const std::vector<double>& log2_probs) {
  if (log2_probs.empty()) throw Error("perplexity: no evaluated positions");
  double h = 0.0;
  for (double l : log2_probs) h -= l;
  h /= static_cast<double>(log2_probs.size());
  return std::exp2(h);
}

inline double perplexity_from_probs(const std::vector<double>& probs) {
  std::vector<double> l;
  l.reserve(probs.size());
  for (double p : probs) l.push_back(std::log2(p));
  return perplexity_from_log2(l);
}

}  // namespace chromsearch::mlm
