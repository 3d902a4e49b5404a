#pragma once

// Word-level embeddings: vocabulary, skip-gram with negative sampling,
// cosine queries, 3CosAdd analogies and the CEMB file format.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "chromsearch/common.hpp"

namespace chromsearch::embed {

using Corpus = std::vector<std::vector<std::string>>;

// ---------------------------------------------------------------------------
// vocabulary

struct WordVocab {
  std::vector<std::string> words;
  std::vector<long long> counts;
  std::unordered_map<std::string, int> index;
  long long min_count = 1;

  std::size_t size() const { return words.size(); }
  int id_of(const std::string& w) const {
    auto it = index.find(w);
    return it == index.end() ? -1 : it->second;
  }
  bool contains(const std::string& w) const { return index.count(w) > 0; }
  int require(const std::string& w) const {
    const int id = id_of(w);
    if (id < 0) throw Error("word not in vocabulary: " + w);
    return id;
  }
  void rebuild_index() {
    index.clear();
    for (std::size_t i = 0; i < words.size(); ++i) index.emplace(words[i], static_cast<int>(i));
  }
};

// Ids by descending count, ties lexicographic.
inline WordVocab build_vocab(const Corpus& corpus, long long min_count) {
  std::map<std::string, long long> counts;
  for (const auto& s : corpus) {
    for (const auto& w : s) ++counts[w];
  }
  std::vector<std::pair<std::string, long long>> kept;
  for (auto& [w, c] : counts) {
    if (c >= min_count) kept.emplace_back(w, c);
  }
  if (kept.empty()) throw ConfigError("vocabulary is empty after min_count=" + std::to_string(min_count));
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  WordVocab v;
  v.min_count = min_count;
  for (auto& [w, c] : kept) {
    v.words.push_back(w);
    v.counts.push_back(c);
  }
  v.rebuild_index();
  return v;
}

// ---------------------------------------------------------------------------
// hyperparameters and model

struct W2VHyper {
  int dim = 300;
  double learning_rate = 0.001;
  int batch_size = 128;
  int epochs = 30;
  int window = 8;
  int negatives = 5;
  double subsample_threshold = 1e-4;
  std::uint64_t seed = 42;
  // >1 enables sharded lock-free updates; results then depend on scheduling.
  int workers = 1;

  void validate() const {
    if (dim < 1) throw ConfigError("dim must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (window < 1) throw ConfigError("window must be >= 1");
    if (negatives < 1) throw ConfigError("negatives must be >= 1");
    if (subsample_threshold < 0.0) throw ConfigError("subsample_threshold must be >= 0");
    if (workers < 1) throw ConfigError("workers must be >= 1");
  }
};

inline constexpr double kFinalLearningRateFraction = 1e-5;

template <class Scalar>
struct EmbeddingModel {
  WordVocab vocab;
  int dim = 0;
  std::vector<Scalar> input;   // V x dim, center vectors
  std::vector<Scalar> output;  // V x dim, context vectors
  bool normalized = false;

  std::span<const Scalar> row(int id) const {
    return {input.data() + static_cast<std::size_t>(id) * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
  std::span<Scalar> row(int id) {
    return {input.data() + static_cast<std::size_t>(id) * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
};

template <class Scalar>
EmbeddingModel<Scalar> init_model(const WordVocab& vocab, int dim, std::uint64_t seed) {
  EmbeddingModel<Scalar> m;
  m.vocab = vocab;
  m.dim = dim;
  const std::size_t n = vocab.size() * static_cast<std::size_t>(dim);
  m.input.resize(n);
  m.output.assign(n, Scalar(0));
  Rng rng(derive_seed(seed, "w2v.init"));
  const double half = 0.5 / dim;
  for (auto& x : m.input) x = static_cast<Scalar>(rng.uniform(-half, half));
  return m;
}

// ---------------------------------------------------------------------------
// objective

template <class Scalar>
Scalar sigmoid(Scalar x) {
  if (x >= 0) return Scalar(1) / (Scalar(1) + std::exp(-x));
  const Scalar e = std::exp(x);
  return e / (Scalar(1) + e);
}

// log(sigmoid(x)) without overflow.
template <class Scalar>
Scalar log_sigmoid(Scalar x) {
  if (x >= 0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

template <class Scalar>
Scalar dot(const Scalar* a, const Scalar* b, int dim) {
  Scalar s = 0;
  for (int i = 0; i < dim; ++i) s += a[i] * b[i];
  return s;
}

// One training example: center c, positive context o and sampled negatives.
struct SgnsExample {
  int center;
  int context;
  std::vector<int> negatives;
};

// L = -log s(u_o.v_c) - sum_n log s(-u_n.v_c). Adds dL/dv_c to grad_in row c
// and dL/du to grad_out rows; either grad pointer may be null.
template <class Scalar>
Scalar sgns_loss_and_grad(const Scalar* input, const Scalar* output, int dim, const SgnsExample& ex,
                          Scalar* grad_in_center, const std::function<Scalar*(int)>& grad_out_row) {
  const Scalar* vc = input + static_cast<std::size_t>(ex.center) * static_cast<std::size_t>(dim);
  Scalar loss = 0;
  auto term = [&](int target, Scalar label) {
    const Scalar* u = output + static_cast<std::size_t>(target) * static_cast<std::size_t>(dim);
    const Scalar s = dot(u, vc, dim);
    // label 1: -log s(s); label 0: -log s(-s). d/ds = s(s) - label.
    loss -= label > 0 ? log_sigmoid(s) : log_sigmoid(-s);
    const Scalar g = sigmoid(s) - label;
    if (grad_in_center != nullptr) {
      for (int i = 0; i < dim; ++i) grad_in_center[i] += g * u[i];
    }
    if (grad_out_row) {
      Scalar* gu = grad_out_row(target);
      for (int i = 0; i < dim; ++i) gu[i] += g * vc[i];
    }
  };
  term(ex.context, Scalar(1));
  for (int n : ex.negatives) term(n, Scalar(0));
  return loss;
}

// ---------------------------------------------------------------------------
// sampling

class UnigramSampler {
 public:
  UnigramSampler(const std::vector<long long>& counts, double power = 0.75) {
    cumulative_.reserve(counts.size());
    double acc = 0.0;
    for (long long c : counts) {
      acc += std::pow(static_cast<double>(c), power);
      cumulative_.push_back(acc);
    }
  }
  int sample(Rng& rng) const {
    const double r = rng.uniform() * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), r);
    if (it == cumulative_.end()) --it;
    return static_cast<int>(it - cumulative_.begin());
  }
  std::size_t size() const { return cumulative_.size(); }
  double probability(int id) const {
    const double prev = id == 0 ? 0.0 : cumulative_[static_cast<std::size_t>(id) - 1];
    return (cumulative_[static_cast<std::size_t>(id)] - prev) / cumulative_.back();
  }

 private:
  std::vector<double> cumulative_;
};

// Probability of keeping an occurrence of a word with corpus frequency f
// (word2vec form); 1 when subsampling is off.
inline double keep_probability(long long count, long long total, double threshold) {
  if (threshold <= 0.0 || total <= 0) return 1.0;
  const double f = static_cast<double>(count) / static_cast<double>(total);
  const double ratio = threshold / f;
  return std::min(1.0, std::sqrt(ratio) + ratio);
}

inline std::vector<std::vector<int>> to_ids(const Corpus& corpus, const WordVocab& vocab) {
  std::vector<std::vector<int>> out;
  out.reserve(corpus.size());
  for (const auto& s : corpus) {
    std::vector<int> ids;
    for (const auto& w : s) {
      const int id = vocab.id_of(w);
      if (id >= 0) ids.push_back(id);
    }
    out.push_back(std::move(ids));
  }
  return out;
}

// Enumerates (center, context) pairs of one sentence in position order.
template <class F>
void for_each_pair(const std::vector<int>& ids, int window, F&& f) {
  const int n = static_cast<int>(ids.size());
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - window);
    const int hi = std::min(n - 1, i + window);
    for (int j = lo; j <= hi; ++j) {
      if (j != i) f(ids[static_cast<std::size_t>(i)], ids[static_cast<std::size_t>(j)]);
    }
  }
}

inline std::vector<int> draw_negatives(const UnigramSampler& sampler, Rng& rng, int count, int context) {
  std::vector<int> neg;
  if (sampler.size() < 2) return neg;
  neg.reserve(static_cast<std::size_t>(count));
  while (static_cast<int>(neg.size()) < count) {
    const int n = sampler.sample(rng);
    if (n != context) neg.push_back(n);
  }
  return neg;
}

// Mean objective over every window pair of the corpus with negatives drawn
// from a fixed seed, so two models can be compared on identical terms.
template <class Scalar>
double corpus_loss(const EmbeddingModel<Scalar>& m, const Corpus& corpus, int window, int negatives,
                   std::uint64_t seed) {
  const auto ids = to_ids(corpus, m.vocab);
  UnigramSampler sampler(m.vocab.counts);
  Rng rng(derive_seed(seed, "w2v.loss_oracle"));
  double total = 0.0;
  long long pairs = 0;
  for (const auto& s : ids) {
    for_each_pair(s, window, [&](int c, int o) {
      SgnsExample ex{c, o, draw_negatives(sampler, rng, negatives, o)};
      total += static_cast<double>(sgns_loss_and_grad<Scalar>(m.input.data(), m.output.data(), m.dim, ex, nullptr, {}));
      ++pairs;
    });
  }
  if (pairs == 0) throw Error("corpus has no training pairs");
  return total / static_cast<double>(pairs);
}

// ---------------------------------------------------------------------------
// training

struct TrainStats {
  long long pairs = 0;
  long long batches = 0;
  double final_learning_rate = 0.0;
};

namespace detail {

// Sparse per-batch gradient buffer keyed by row.
template <class Scalar>
class RowGrads {
 public:
  RowGrads(std::size_t rows, int dim) : slot_(rows, -1), dim_(dim) {}

  Scalar* row(int r) {
    int& s = slot_[static_cast<std::size_t>(r)];
    if (s < 0) {
      s = static_cast<int>(touched_.size());
      touched_.push_back(r);
      if (data_.size() < touched_.size() * static_cast<std::size_t>(dim_)) {
        data_.resize(touched_.size() * static_cast<std::size_t>(dim_));
      }
      std::fill_n(data_.begin() + static_cast<std::ptrdiff_t>(s) * dim_, dim_, Scalar(0));
    }
    return data_.data() + static_cast<std::size_t>(s) * static_cast<std::size_t>(dim_);
  }

  // Applies w -= lr * g to every touched row (in first-touch order), then
  // resets. Returns false if any updated weight is non-finite.
  template <class Apply>
  bool flush(Apply&& apply) {
    bool finite = true;
    for (std::size_t k = 0; k < touched_.size(); ++k) {
      const int r = touched_[k];
      finite = apply(r, data_.data() + k * static_cast<std::size_t>(dim_)) && finite;
      slot_[static_cast<std::size_t>(r)] = -1;
    }
    touched_.clear();
    return finite;
  }

  bool empty() const { return touched_.empty(); }

 private:
  std::vector<int> slot_;
  std::vector<int> touched_;
  std::vector<Scalar> data_;
  int dim_;
};

template <class Scalar, bool Shared>
Scalar load(const Scalar& x) {
  if constexpr (Shared) {
    return std::atomic_ref<Scalar>(const_cast<Scalar&>(x)).load(std::memory_order_relaxed);
  } else {
    return x;
  }
}

template <class Scalar, bool Shared>
void add_to(Scalar& x, Scalar delta) {
  if constexpr (Shared) {
    std::atomic_ref<Scalar>(x).fetch_add(delta, std::memory_order_relaxed);
  } else {
    x += delta;
  }
}

// Trains over sentences [begin, end) of `ids`. `progress` counts center
// tokens processed across all workers and drives the linear decay.
template <class Scalar, bool Shared>
void train_shard(EmbeddingModel<Scalar>& m, const std::vector<std::vector<int>>& ids, std::size_t begin,
                 std::size_t end, const W2VHyper& h, const UnigramSampler& sampler,
                 const std::vector<double>& keep, Rng& rng, std::atomic<long long>& progress,
                 long long total_progress, int epoch, TrainStats& stats) {
  const int dim = m.dim;
  const std::size_t V = m.vocab.size();
  RowGrads<Scalar> gin(V, dim);
  RowGrads<Scalar> gout(V, dim);
  std::vector<Scalar> vc(static_cast<std::size_t>(dim));
  std::vector<Scalar> u(static_cast<std::size_t>(dim));
  int in_batch = 0;
  double lr = h.learning_rate;
  auto current_lr = [&] {
    const double p = std::min(1.0, static_cast<double>(progress.load(std::memory_order_relaxed)) /
                                       static_cast<double>(std::max<long long>(1, total_progress)));
    return h.learning_rate * (1.0 - p * (1.0 - kFinalLearningRateFraction));
  };
  auto apply = [&](std::vector<Scalar>& matrix) {
    return [&, lr_local = static_cast<Scalar>(lr)](int r, const Scalar* g) {
      Scalar* w = matrix.data() + static_cast<std::size_t>(r) * static_cast<std::size_t>(dim);
      bool finite = true;
      for (int i = 0; i < dim; ++i) {
        add_to<Scalar, Shared>(w[i], -lr_local * g[i]);
        if (!std::isfinite(load<Scalar, Shared>(w[i]))) finite = false;
      }
      return finite;
    };
  };
  auto flush = [&] {
    lr = current_lr();
    const bool ok_in = gin.flush(apply(m.input));
    const bool ok_out = gout.flush(apply(m.output));
    ++stats.batches;
    in_batch = 0;
    if (!ok_in || !ok_out) {
      throw NumericError("non-finite weight after update at epoch " + std::to_string(epoch) + ", step " +
                         std::to_string(stats.batches));
    }
  };

  std::vector<int> kept;
  for (std::size_t si = begin; si < end; ++si) {
    const auto& sent = ids[si];
    kept.clear();
    for (int w : sent) {
      if (keep[static_cast<std::size_t>(w)] >= 1.0 || rng.uniform() < keep[static_cast<std::size_t>(w)]) {
        kept.push_back(w);
      }
    }
    for_each_pair(kept, h.window, [&](int c, int o) {
      const Scalar* vin = m.input.data() + static_cast<std::size_t>(c) * static_cast<std::size_t>(dim);
      for (int i = 0; i < dim; ++i) vc[static_cast<std::size_t>(i)] = load<Scalar, Shared>(vin[i]);
      Scalar* gc = gin.row(c);
      auto term = [&](int t, Scalar label) {
        const Scalar* uo = m.output.data() + static_cast<std::size_t>(t) * static_cast<std::size_t>(dim);
        for (int i = 0; i < dim; ++i) u[static_cast<std::size_t>(i)] = load<Scalar, Shared>(uo[i]);
        const Scalar g = sigmoid(dot(u.data(), vc.data(), dim)) - label;
        Scalar* gu = gout.row(t);
        for (int i = 0; i < dim; ++i) {
          gc[i] += g * u[static_cast<std::size_t>(i)];
          gu[i] += g * vc[static_cast<std::size_t>(i)];
        }
      };
      term(o, Scalar(1));
      // Negatives equal to the positive context are redrawn.
      if (sampler.size() >= 2) {
        for (int k = 0; k < h.negatives; ++k) {
          int n = sampler.sample(rng);
          while (n == o) n = sampler.sample(rng);
          term(n, Scalar(0));
        }
      }
      ++stats.pairs;
      if (++in_batch == h.batch_size) flush();
    });
    progress.fetch_add(static_cast<long long>(sent.size()), std::memory_order_relaxed);
  }
  if (in_batch > 0) flush();
  stats.final_learning_rate = lr;
}

}  // namespace detail

// Reference mode (workers == 1) is deterministic for a fixed seed.
template <class Scalar = float>
EmbeddingModel<Scalar> train_skipgram(const Corpus& corpus, const WordVocab& vocab, const W2VHyper& h,
                                      TrainStats* stats_out = nullptr) {
  h.validate();
  auto m = init_model<Scalar>(vocab, h.dim, h.seed);
  const auto ids = to_ids(corpus, vocab);
  long long total_tokens = 0;
  for (const auto& s : ids) total_tokens += static_cast<long long>(s.size());
  if (total_tokens == 0) throw Error("corpus has no in-vocabulary tokens");
  const long long vocab_total = std::accumulate(vocab.counts.begin(), vocab.counts.end(), 0LL);
  std::vector<double> keep(vocab.size());
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    keep[i] = keep_probability(vocab.counts[i], vocab_total, h.subsample_threshold);
  }
  const UnigramSampler sampler(vocab.counts);
  std::atomic<long long> progress{0};
  const long long total_progress = total_tokens * h.epochs;
  TrainStats stats;
  for (int epoch = 0; epoch < h.epochs; ++epoch) {
    if (h.workers == 1) {
      Rng rng(derive_seed(h.seed, "w2v.train.epoch" + std::to_string(epoch)));
      detail::train_shard<Scalar, false>(m, ids, 0, ids.size(), h, sampler, keep, rng, progress, total_progress,
                                         epoch, stats);
    } else {
      const auto w = static_cast<std::size_t>(h.workers);
      const std::size_t chunk = (ids.size() + w - 1) / w;
      std::vector<TrainStats> shard_stats(w);
      std::vector<std::thread> pool;
      std::vector<std::exception_ptr> errors(w);
      for (std::size_t k = 0; k < w; ++k) {
        const std::size_t b = k * chunk;
        const std::size_t e = std::min(ids.size(), b + chunk);
        if (b >= e) continue;
        pool.emplace_back([&, k, b, e] {
          try {
            Rng rng(derive_seed(h.seed, "w2v.train.epoch" + std::to_string(epoch) + ".shard" + std::to_string(k)));
            detail::train_shard<Scalar, true>(m, ids, b, e, h, sampler, keep, rng, progress, total_progress, epoch,
                                              shard_stats[k]);
          } catch (...) {
            errors[k] = std::current_exception();
          }
        });
      }
      for (auto& t : pool) t.join();
      for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
      for (auto& s : shard_stats) {
        stats.pairs += s.pairs;
        stats.batches += s.batches;
        stats.final_learning_rate = s.final_learning_rate;
      }
    }
  }
  if (stats_out != nullptr) *stats_out = stats;
  return m;
}

// ---------------------------------------------------------------------------
// queries

struct NormalizeResult {
  std::size_t zero_rows = 0;
};

// Unit-length input rows; zero rows stay zero and are counted.
template <class Scalar>
NormalizeResult normalize(EmbeddingModel<Scalar>& m) {
  NormalizeResult r;
  for (std::size_t i = 0; i < m.vocab.size(); ++i) {
    auto row = m.row(static_cast<int>(i));
    double n2 = 0.0;
    for (auto x : row) n2 += static_cast<double>(x) * static_cast<double>(x);
    if (n2 == 0.0) {
      ++r.zero_rows;
      continue;
    }
    const double inv = 1.0 / std::sqrt(n2);
    for (auto& x : row) x = static_cast<Scalar>(static_cast<double>(x) * inv);
  }
  m.normalized = true;
  return r;
}

template <class Scalar>
double norm(std::span<const Scalar> a) {
  double s = 0.0;
  for (auto x : a) s += static_cast<double>(x) * static_cast<double>(x);
  return std::sqrt(s);
}

template <class Scalar>
double cosine(std::span<const Scalar> a, std::span<const Scalar> b) {
  if (a.size() != b.size()) throw Error("cosine: dimension mismatch");
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) throw Error("cosine: zero vector");
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return std::clamp(d / (na * nb), -1.0, 1.0);
}

struct Neighbor {
  int rank;  // 1-based position in the full ordering
  std::string word;
  double score;
};

namespace detail {

template <class Scalar>
std::vector<double> row_norms(const EmbeddingModel<Scalar>& m) {
  std::vector<double> n(m.vocab.size());
  for (std::size_t i = 0; i < n.size(); ++i) n[i] = norm(m.row(static_cast<int>(i)));
  return n;
}

// Cosine of every row against `q`; zero rows score -inf so they sort last.
template <class Scalar>
std::vector<double> scores_against(const EmbeddingModel<Scalar>& m, const std::vector<double>& q) {
  const auto norms = row_norms(m);
  double qn = 0.0;
  for (double x : q) qn += x * x;
  qn = std::sqrt(qn);
  std::vector<double> s(m.vocab.size(), -std::numeric_limits<double>::infinity());
  if (qn == 0.0) return s;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (norms[i] == 0.0) continue;
    const auto r = m.row(static_cast<int>(i));
    double d = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) d += static_cast<double>(r[k]) * q[k];
    s[i] = d / (norms[i] * qn);
  }
  return s;
}

inline std::vector<int> rank_order(const std::vector<double>& scores, const std::vector<char>& excluded) {
  std::vector<int> order;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!excluded[i]) order.push_back(static_cast<int>(i));
  }
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return scores[static_cast<std::size_t>(a)] > scores[static_cast<std::size_t>(b)];
  });
  return order;
}

template <class Scalar>
std::vector<double> unit_copy(std::span<const Scalar> r) {
  const double n = norm(r);
  std::vector<double> out(r.size(), 0.0);
  if (n == 0.0) return out;
  for (std::size_t i = 0; i < r.size(); ++i) out[i] = static_cast<double>(r[i]) / n;
  return out;
}

}  // namespace detail

// Top-k by cosine, query excluded, ties by ascending id.
template <class Scalar>
std::vector<Neighbor> most_similar(const EmbeddingModel<Scalar>& m, const std::string& word, std::size_t k) {
  const int q = m.vocab.require(word);
  if (k == 0) return {};
  const auto r = m.row(q);
  const std::vector<double> qv(r.begin(), r.end());
  const auto scores = detail::scores_against(m, qv);
  std::vector<char> excluded(m.vocab.size(), 0);
  excluded[static_cast<std::size_t>(q)] = 1;
  const auto order = detail::rank_order(scores, excluded);
  std::vector<Neighbor> out;
  for (std::size_t i = 0; i < order.size() && i < k; ++i) {
    const int id = order[i];
    out.push_back({static_cast<int>(i) + 1, m.vocab.words[static_cast<std::size_t>(id)],
                   scores[static_cast<std::size_t>(id)]});
  }
  return out;
}

// 3CosAdd over unit vectors: argmax cos(v, b - a + c), excluding a, b, c.
template <class Scalar>
std::string analogy(const EmbeddingModel<Scalar>& m, const std::string& a, const std::string& b,
                    const std::string& c) {
  const int ia = m.vocab.require(a);
  const int ib = m.vocab.require(b);
  const int ic = m.vocab.require(c);
  const auto va = detail::unit_copy(m.row(ia));
  const auto vb = detail::unit_copy(m.row(ib));
  const auto vc = detail::unit_copy(m.row(ic));
  std::vector<double> target(va.size());
  for (std::size_t i = 0; i < target.size(); ++i) target[i] = vb[i] - va[i] + vc[i];
  const auto scores = detail::scores_against(m, target);
  std::vector<char> excluded(m.vocab.size(), 0);
  excluded[static_cast<std::size_t>(ia)] = excluded[static_cast<std::size_t>(ib)] =
      excluded[static_cast<std::size_t>(ic)] = 1;
  const auto order = detail::rank_order(scores, excluded);
  if (order.empty()) throw Error("analogy: vocabulary too small");
  return m.vocab.words[static_cast<std::size_t>(order.front())];
}

struct AnalogyQuad {
  std::string a, b, c, d;
};

struct AnalogyResult {
  std::size_t correct = 0;
  std::size_t evaluated = 0;
  std::size_t skipped = 0;  // quadruples with an out-of-vocabulary word
  double score() const { return evaluated == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(evaluated); }
};

// Lenient form used during tuning: out-of-vocabulary quadruples are skipped.
template <class Scalar>
AnalogyResult evaluate_analogies(const EmbeddingModel<Scalar>& m, const std::vector<AnalogyQuad>& quads) {
  AnalogyResult r;
  for (const auto& q : quads) {
    if (!m.vocab.contains(q.a) || !m.vocab.contains(q.b) || !m.vocab.contains(q.c) || !m.vocab.contains(q.d)) {
      ++r.skipped;
      continue;
    }
    ++r.evaluated;
    if (analogy(m, q.a, q.b, q.c) == q.d) ++r.correct;
  }
  return r;
}

// Strict form: every word must be in the vocabulary.
template <class Scalar>
double analogy_score(const EmbeddingModel<Scalar>& m, const std::vector<AnalogyQuad>& quads) {
  if (quads.empty()) throw Error("analogy_score: empty quadruple list");
  std::size_t correct = 0;
  for (const auto& q : quads) {
    m.vocab.require(q.d);
    if (analogy(m, q.a, q.b, q.c) == q.d) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(quads.size());
}

// Whitespace-separated quadruples, one per line; '#' starts a comment.
inline std::vector<AnalogyQuad> load_analogies(const std::string& path) {
  std::vector<AnalogyQuad> out;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto t = trim(lines[i]);
    if (t.empty() || t.front() == '#') continue;
    const auto f = split_whitespace(t);
    if (f.size() != 4) throw ParseError(path + ":" + std::to_string(i + 1) + ": expected 4 words");
    out.push_back({f[0], f[1], f[2], f[3]});
  }
  return out;
}

// ---------------------------------------------------------------------------
// CEMB file

inline constexpr std::uint32_t kEmbeddingFormatVersion = 1;

template <class Scalar>
void save_embeddings(const EmbeddingModel<Scalar>& m, const std::string& path) {
  auto os = open_output(path, true);
  write_bytes(os, "CEMB");
  write_u32(os, kEmbeddingFormatVersion);
  write_u32(os, static_cast<std::uint32_t>(m.vocab.size()));
  write_u32(os, static_cast<std::uint32_t>(m.dim));
  for (const auto& w : m.vocab.words) write_lp_string(os, w);
  for (auto x : m.input) write_f32(os, static_cast<float>(x));
  write_bytes(os, m.normalized ? "NORM" : "RAW ");
  if (!os) throw IoError("write failed: " + path);
}

// Counts are not stored; loaded vocabularies carry count 1 per word.
inline EmbeddingModel<float> load_embeddings(const std::string& path) {
  auto is = open_input(path, true);
  if (read_bytes(is, 4, path + " magic") != "CEMB") throw ParseError(path + ": bad magic");
  const auto version = read_u32(is, path + " version");
  if (version != kEmbeddingFormatVersion) throw ParseError(path + ": unsupported version " + std::to_string(version));
  const auto V = read_u32(is, path + " vocab size");
  const auto d = read_u32(is, path + " dim");
  EmbeddingModel<float> m;
  m.dim = static_cast<int>(d);
  for (std::uint32_t i = 0; i < V; ++i) {
    m.vocab.words.push_back(read_lp_string(is, path + " word"));
    m.vocab.counts.push_back(1);
  }
  m.vocab.rebuild_index();
  m.input.resize(static_cast<std::size_t>(V) * d);
  for (auto& x : m.input) x = read_f32(is, path + " vectors");
  const auto flag = read_bytes(is, 4, path + " flag");
  if (flag != "NORM" && flag != "RAW ") throw ParseError(path + ": bad normalization flag");
  m.normalized = flag == "NORM";
  return m;
}

}  // namespace chromsearch::embed
