#pragma once

// Training loop (Adam over masked-token loss), held-out perplexity and
// mask filling.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "chromsearch/chemtok/tokenizer.hpp"
#include "chromsearch/common.hpp"
#include "chromsearch/mlm/config.hpp"
#include "chromsearch/mlm/encoder.hpp"
#include "chromsearch/mlm/masking.hpp"
#include "chromsearch/mlm/ops.hpp"
#include "chromsearch/mlm/params.hpp"
#include "chromsearch/subword.hpp"

namespace chromsearch::mlm {

// Bias-corrected Adam, no weight decay.
template <class S>
class Adam {
 public:
  Adam(const EncoderParams<S>& p, const TrainHyper& h)
      : m_(p.zeros_like()), v_(p.zeros_like()), h_(h) {}

  void step(EncoderParams<S>& p, const EncoderParams<S>& g) {
    ++t_;
    const double c1 = 1.0 - std::pow(h_.beta1, t_);
    const double c2 = 1.0 - std::pow(h_.beta2, t_);
    std::vector<Tensor<S>*> ps, ms, vs;
    std::vector<const Tensor<S>*> gs;
    p.visit([&](const std::string&, Tensor<S>& t) { ps.push_back(&t); });
    m_.visit([&](const std::string&, Tensor<S>& t) { ms.push_back(&t); });
    v_.visit([&](const std::string&, Tensor<S>& t) { vs.push_back(&t); });
    g.visit([&](const std::string&, const Tensor<S>& t) { gs.push_back(&t); });
    const S b1 = static_cast<S>(h_.beta1);
    const S b2 = static_cast<S>(h_.beta2);
    for (std::size_t k = 0; k < ps.size(); ++k) {
      auto& w = ps[k]->data;
      auto& m = ms[k]->data;
      auto& v = vs[k]->data;
      const auto& gr = gs[k]->data;
      for (std::size_t i = 0; i < w.size(); ++i) {
        m[i] = b1 * m[i] + (S(1) - b1) * gr[i];
        v[i] = b2 * v[i] + (S(1) - b2) * gr[i] * gr[i];
        const double mhat = static_cast<double>(m[i]) / c1;
        const double vhat = static_cast<double>(v[i]) / c2;
        w[i] -= static_cast<S>(h_.learning_rate * mhat / (std::sqrt(vhat) + h_.adam_eps));
      }
    }
  }

  int steps() const { return t_; }

 private:
  EncoderParams<S> m_, v_;
  TrainHyper h_;
  int t_ = 0;
};

inline EncoderInput to_input(const MaskedExample& ex) { return {ex.input_ids, ex.type_ids, ex.attention_mask}; }

// Trailing padding removed: padded keys get zero attention weight, so the
// real positions are unaffected and the work shrinks.
inline MaskedExample trim_padding(MaskedExample ex) {
  std::size_t n = ex.attention_mask.size();
  while (n > 0 && ex.attention_mask[n - 1] == 0) --n;
  ex.input_ids.resize(n);
  ex.type_ids.resize(n);
  ex.attention_mask.resize(n);
  ex.labels.resize(n);
  return ex;
}

// Fixed-seed masking of a held-out set, reused by every evaluation.
inline std::vector<MaskedExample> mask_heldout(const std::vector<subword::EncodedSequence>& seqs,
                                               const EncoderConfig& c, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "mlm.heldout"));
  auto out = mask_batch(seqs, c, rng).examples;
  for (auto& e : out) e = trim_padding(std::move(e));
  return out;
}

struct HeldoutEval {
  double mean_nll = 0.0;  // nats per evaluated position
  double perplexity = 0.0;
  std::size_t positions = 0;
};

template <class S>
HeldoutEval evaluate_heldout(const EncoderConfig& c, const EncoderParams<S>& p,
                             const std::vector<MaskedExample>& heldout) {
  std::vector<double> log2p;
  double nll = 0.0;
  for (const auto& ex : heldout) {
    if (ex.masked_count() == 0) continue;
    auto fc = encode_hidden(c, p, to_input(ex));
    std::vector<S> logits(static_cast<std::size_t>(c.vocab_size));
    for (std::size_t t = 0; t < ex.labels.size(); ++t) {
      if (ex.labels[t] == kIgnoreLabel) continue;
      head_logits(c, p, fc.hidden.row(t), logits.data());
      const double lp = log_prob(std::span<const S>(logits), ex.labels[t]);
      nll -= lp;
      log2p.push_back(lp / std::log(2.0));
    }
  }
  HeldoutEval e;
  e.positions = log2p.size();
  e.perplexity = perplexity_from_log2(log2p);
  e.mean_nll = nll / static_cast<double>(e.positions);
  return e;
}

struct EpochLog {
  int epoch;
  long long step;
  double loss;
  double heldout_perplexity;
};

inline void write_training_log(const std::vector<EpochLog>& rows, const std::string& path) {
  auto os = open_output(path, true);
  os << "epoch,step,loss,heldout_perplexity\n";
  for (const auto& r : rows) {
    os << r.epoch << ',' << r.step << ',' << format_fixed(r.loss, 6) << ',' << format_fixed(r.heldout_perplexity, 6)
       << '\n';
  }
  if (!os) throw IoError("write failed: " + path);
}

class TrainingDiverged : public NumericError {
 public:
  TrainingDiverged(const std::string& what, EncoderParams<float> last_good, int epoch, long long step)
      : NumericError(what), last_good(std::move(last_good)), epoch(epoch), step(step) {}
  EncoderParams<float> last_good;
  int epoch;
  long long step;
};

struct TrainResult {
  EncoderParams<float> params;
  std::vector<EpochLog> log;
};

// Row 0 of the log is the starting point (held-out loss and perplexity of
// the initial or warm-start params). Each later row is one epoch: mean
// training loss, cumulative optimizer steps and held-out perplexity.
inline TrainResult train_mlm(const std::vector<subword::EncodedSequence>& train,
                             const std::vector<subword::EncodedSequence>& heldout, const EncoderConfig& c,
                             const TrainHyper& h, const EncoderParams<float>* warm_start = nullptr) {
  c.validate();
  h.validate();
  TrainResult r;
  r.params = warm_start != nullptr ? *warm_start : init_params<float>(c, h.seed);
  check_params(c, r.params);
  const auto held = mask_heldout(heldout, c, h.seed);
  auto eval = [&](const EncoderParams<float>& p) -> std::optional<HeldoutEval> {
    if (held.empty()) return std::nullopt;
    return evaluate_heldout(c, p, held);
  };
  {
    const auto e0 = eval(r.params);
    r.log.push_back({0, 0, e0 ? e0->mean_nll : 0.0, e0 ? e0->perplexity : 0.0});
  }
  if (h.epochs == 0 || train.empty()) return r;

  Adam<float> opt(r.params, h);
  auto grads = r.params.zeros_like();
  long long step = 0;
  std::vector<std::size_t> order(train.size());
  for (int epoch = 1; epoch <= h.epochs; ++epoch) {
    Rng shuffle_rng(derive_seed(h.seed, "mlm.shuffle.epoch" + std::to_string(epoch)));
    Rng mask_rng(derive_seed(h.seed, "mlm.mask.epoch" + std::to_string(epoch)));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t epoch_positions = 0;
    for (std::size_t b = 0; b < order.size(); b += static_cast<std::size_t>(h.batch_size)) {
      std::vector<subword::EncodedSequence> batch;
      for (std::size_t k = b; k < std::min(order.size(), b + static_cast<std::size_t>(h.batch_size)); ++k) {
        batch.push_back(train[order[k]]);
      }
      auto masked = mask_batch(batch, c, mask_rng).examples;
      std::size_t positions = 0;
      for (auto& ex : masked) {
        ex = trim_padding(std::move(ex));
        positions += ex.masked_count();
      }
      if (positions == 0) continue;
      grads.visit([](const std::string&, Tensor<float>& t) { t.zero(); });
      double batch_loss = 0.0;
      const double scale = 1.0 / static_cast<double>(positions);
      for (const auto& ex : masked) {
        if (ex.masked_count() == 0) continue;
        batch_loss += example_loss_and_grad(c, r.params, to_input(ex), ex.labels, scale, &grads);
      }
      if (!std::isfinite(batch_loss) || !grads.all_finite()) {
        throw TrainingDiverged("loss diverged at epoch " + std::to_string(epoch) + ", step " + std::to_string(step + 1),
                               r.params, epoch, step);
      }
      EncoderParams<float> before;
      before = r.params;
      opt.step(r.params, grads);
      ++step;
      if (!r.params.all_finite()) {
        throw TrainingDiverged("non-finite parameters at epoch " + std::to_string(epoch) + ", step " +
                                   std::to_string(step),
                               std::move(before), epoch, step - 1);
      }
      epoch_loss += batch_loss;
      epoch_positions += positions;
    }
    const auto e = eval(r.params);
    r.log.push_back({epoch, step, epoch_positions ? epoch_loss / static_cast<double>(epoch_positions) : 0.0,
                     e ? e->perplexity : 0.0});
  }
  return r;
}

// ---------------------------------------------------------------------------
// mask filling

struct Prediction {
  int token_id;
  std::string piece;
  double probability;
  int rank;  // 1-based over the full vocabulary
};

inline constexpr std::string_view kMaskLiteral = "[MASK]";

// Template text with exactly one "[MASK]"; both sides go through the word
// pipeline (placeholders off) and the subword encoder.
inline EncoderInput encode_template(const std::string& tmpl, const subword::WordPieceVocab& vocab,
                                    const chemtok::Lexicons& lex, std::size_t max_seq, std::size_t* mask_pos) {
  const auto first = tmpl.find(kMaskLiteral);
  if (first == std::string::npos) throw ConfigError("template has no [MASK]: " + tmpl);
  if (tmpl.find(kMaskLiteral, first + 1) != std::string::npos) {
    throw ConfigError("template has more than one [MASK]: " + tmpl);
  }
  const auto left = chemtok::normalized_tokens(tmpl.substr(0, first), chemtok::PlaceholderPolicy::Off, lex);
  const auto right =
      chemtok::normalized_tokens(tmpl.substr(first + kMaskLiteral.size()), chemtok::PlaceholderPolicy::Off, lex);
  EncoderInput in;
  in.ids.push_back(subword::kClsId);
  for (int id : subword::encode_words(vocab, left)) in.ids.push_back(id);
  *mask_pos = in.ids.size();
  in.ids.push_back(subword::kMaskId);
  for (int id : subword::encode_words(vocab, right)) in.ids.push_back(id);
  in.ids.push_back(subword::kSepId);
  if (in.ids.size() > max_seq) throw ConfigError("template longer than max_seq");
  in.type_ids.assign(in.ids.size(), 0);
  in.attention_mask.assign(in.ids.size(), 1);
  return in;
}

// Full ranked distribution at one position; ties by ascending id.
inline std::vector<Prediction> rank_predictions(const std::vector<double>& probs, const subword::WordPieceVocab& vocab,
                                                std::size_t k) {
  std::vector<int> order(probs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return probs[static_cast<std::size_t>(a)] > probs[static_cast<std::size_t>(b)];
  });
  std::vector<Prediction> out;
  for (std::size_t i = 0; i < order.size() && i < k; ++i) {
    const int id = order[i];
    out.push_back({id, id < static_cast<int>(vocab.size()) ? vocab.piece(id) : std::string("?"),
                   probs[static_cast<std::size_t>(id)], static_cast<int>(i) + 1});
  }
  return out;
}

template <class S>
std::vector<double> mask_distribution(const EncoderConfig& c, const EncoderParams<S>& p, const EncoderInput& in,
                                      std::size_t mask_pos) {
  auto fc = encode_hidden(c, p, in);
  std::vector<S> logits(static_cast<std::size_t>(c.vocab_size));
  head_logits(c, p, fc.hidden.row(mask_pos), logits.data());
  return softmax(std::span<const S>(logits));
}

template <class S>
std::vector<Prediction> fill_mask(const EncoderConfig& c, const EncoderParams<S>& p,
                                  const subword::WordPieceVocab& vocab, const std::string& tmpl, std::size_t k,
                                  const chemtok::Lexicons& lex = chemtok::Lexicons::builtin()) {
  std::size_t mask_pos = 0;
  const auto in = encode_template(tmpl, vocab, lex, static_cast<std::size_t>(c.max_seq), &mask_pos);
  return rank_predictions(mask_distribution(c, p, in, mask_pos), vocab, k);
}

}  // namespace chromsearch::mlm
