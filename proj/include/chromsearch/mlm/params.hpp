#pragma once

// Encoder weights as named dense tensors, their initialization and the
// checkpoint container.

#include <functional>
#include <string>
#include <vector>

#include "chromsearch/common.hpp"
#include "chromsearch/mlm/config.hpp"

namespace chromsearch::mlm {

template <class S>
struct Tensor {
  std::size_t rows = 0;
  std::size_t cols = 0;  // 1-D tensors have rows == 1
  std::vector<S> data;

  Tensor() = default;
  Tensor(std::size_t r, std::size_t c, S fill = S(0)) : rows(r), cols(c), data(r * c, fill) {}

  S* row(std::size_t r) { return data.data() + r * cols; }
  const S* row(std::size_t r) const { return data.data() + r * cols; }
  S& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  const S& at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::size_t size() const { return data.size(); }
  bool empty() const { return data.empty(); }
  void zero() { std::fill(data.begin(), data.end(), S(0)); }

  template <class T>
  Tensor<T> cast() const {
    Tensor<T> t;
    t.rows = rows;
    t.cols = cols;
    t.data.assign(data.begin(), data.end());
    return t;
  }
};

template <class S>
struct LayerParams {
  Tensor<S> wq, bq, wk, bk, wv, bv, wo, bo;
  Tensor<S> ln1_g, ln1_b;
  Tensor<S> w1, b1, w2, b2;
  Tensor<S> ln2_g, ln2_b;
};

template <class S>
struct EncoderParams {
  Tensor<S> tok, pos, seg;
  std::vector<LayerParams<S>> layers;
  Tensor<S> head_w;  // hidden x vocab; empty when tied to tok
  Tensor<S> head_b;

  // Visits every tensor in a fixed order with its stable name.
  template <class F>
  void visit(F&& f) {
    f(std::string("embeddings.token"), tok);
    f(std::string("embeddings.position"), pos);
    f(std::string("embeddings.segment"), seg);
    for (std::size_t l = 0; l < layers.size(); ++l) {
      auto& L = layers[l];
      const std::string p = "layer." + std::to_string(l) + ".";
      f(p + "attn.q.weight", L.wq);
      f(p + "attn.q.bias", L.bq);
      f(p + "attn.k.weight", L.wk);
      f(p + "attn.k.bias", L.bk);
      f(p + "attn.v.weight", L.wv);
      f(p + "attn.v.bias", L.bv);
      f(p + "attn.out.weight", L.wo);
      f(p + "attn.out.bias", L.bo);
      f(p + "ln1.gain", L.ln1_g);
      f(p + "ln1.bias", L.ln1_b);
      f(p + "ffn.in.weight", L.w1);
      f(p + "ffn.in.bias", L.b1);
      f(p + "ffn.out.weight", L.w2);
      f(p + "ffn.out.bias", L.b2);
      f(p + "ln2.gain", L.ln2_g);
      f(p + "ln2.bias", L.ln2_b);
    }
    if (!head_w.empty()) f(std::string("head.weight"), head_w);
    f(std::string("head.bias"), head_b);
  }
  template <class F>
  void visit(F&& f) const {
    const_cast<EncoderParams*>(this)->visit([&](const std::string& n, Tensor<S>& t) { f(n, static_cast<const Tensor<S>&>(t)); });
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    visit([&](const std::string&, const Tensor<S>& t) { n += t.size(); });
    return n;
  }

  template <class T>
  EncoderParams<T> cast() const {
    EncoderParams<T> out = zeros_like<T>();
    std::vector<const Tensor<S>*> src;
    visit([&](const std::string&, const Tensor<S>& t) { src.push_back(&t); });
    std::size_t i = 0;
    out.visit([&](const std::string&, Tensor<T>& t) { t = src[i++]->template cast<T>(); });
    return out;
  }

  template <class T = S>
  EncoderParams<T> zeros_like() const {
    EncoderParams<T> z;
    z.tok = Tensor<T>(tok.rows, tok.cols);
    z.pos = Tensor<T>(pos.rows, pos.cols);
    z.seg = Tensor<T>(seg.rows, seg.cols);
    z.layers.resize(layers.size());
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const auto& a = layers[l];
      auto& b = z.layers[l];
      auto like = [](const Tensor<S>& t) { return Tensor<T>(t.rows, t.cols); };
      b.wq = like(a.wq); b.bq = like(a.bq); b.wk = like(a.wk); b.bk = like(a.bk);
      b.wv = like(a.wv); b.bv = like(a.bv); b.wo = like(a.wo); b.bo = like(a.bo);
      b.ln1_g = like(a.ln1_g); b.ln1_b = like(a.ln1_b);
      b.w1 = like(a.w1); b.b1 = like(a.b1); b.w2 = like(a.w2); b.b2 = like(a.b2);
      b.ln2_g = like(a.ln2_g); b.ln2_b = like(a.ln2_b);
    }
    z.head_w = Tensor<T>(head_w.rows, head_w.cols);
    z.head_b = Tensor<T>(head_b.rows, head_b.cols);
    return z;
  }

  bool all_finite() const {
    bool ok = true;
    visit([&](const std::string&, const Tensor<S>& t) {
      for (auto x : t.data) {
        if (!std::isfinite(x)) {
          ok = false;
          return;
        }
      }
    });
    return ok;
  }
};

// Normal truncated at two standard deviations (resampled outside).
inline double truncated_normal(Rng& rng, double std) {
  for (;;) {
    const double x = rng.normal();
    if (x >= -2.0 && x <= 2.0) return x * std;
  }
}

// Shapes only, everything zero (gains included).
template <class S>
EncoderParams<S> allocate_params(const EncoderConfig& c) {
  c.validate();
  const auto H = static_cast<std::size_t>(c.hidden);
  const auto I = static_cast<std::size_t>(c.intermediate);
  const auto V = static_cast<std::size_t>(c.vocab_size);
  EncoderParams<S> p;
  p.tok = Tensor<S>(V, H);
  p.pos = Tensor<S>(static_cast<std::size_t>(c.max_seq), H);
  p.seg = Tensor<S>(2, H);
  p.layers.resize(static_cast<std::size_t>(c.layers));
  for (auto& L : p.layers) {
    L.wq = Tensor<S>(H, H); L.bq = Tensor<S>(1, H);
    L.wk = Tensor<S>(H, H); L.bk = Tensor<S>(1, H);
    L.wv = Tensor<S>(H, H); L.bv = Tensor<S>(1, H);
    L.wo = Tensor<S>(H, H); L.bo = Tensor<S>(1, H);
    L.ln1_g = Tensor<S>(1, H); L.ln1_b = Tensor<S>(1, H);
    L.w1 = Tensor<S>(H, I); L.b1 = Tensor<S>(1, I);
    L.w2 = Tensor<S>(I, H); L.b2 = Tensor<S>(1, H);
    L.ln2_g = Tensor<S>(1, H); L.ln2_b = Tensor<S>(1, H);
  }
  if (!c.tie_embeddings) p.head_w = Tensor<S>(H, V);
  p.head_b = Tensor<S>(1, V);
  return p;
}

// Weight matrices and embeddings ~ truncated normal(0, 0.02); biases 0;
// layer-norm gains 1.
template <class S>
EncoderParams<S> init_params(const EncoderConfig& c, std::uint64_t seed) {
  auto p = allocate_params<S>(c);
  Rng rng(derive_seed(seed, "mlm.init"));
  p.visit([&](const std::string& name, Tensor<S>& t) {
    if (name.ends_with(".gain")) {
      std::fill(t.data.begin(), t.data.end(), S(1));
    } else if (name.ends_with(".weight") || name.starts_with("embeddings.")) {
      for (auto& x : t.data) x = static_cast<S>(truncated_normal(rng, kInitStd));
    }
  });
  return p;
}

// ---------------------------------------------------------------------------
// checkpoint: "CMLM", version, config, then named tensors

inline constexpr std::uint32_t kCheckpointVersion = 1;

template <class S>
void save_checkpoint(const EncoderConfig& c, const EncoderParams<S>& p, const std::string& path) {
  auto os = open_output(path, true);
  write_bytes(os, "CMLM");
  write_u32(os, kCheckpointVersion);
  for (int v : {c.layers, c.hidden, c.heads, c.intermediate, c.max_seq, c.vocab_size}) {
    write_u32(os, static_cast<std::uint32_t>(v));
  }
  write_u32(os, c.tie_embeddings ? 1u : 0u);
  write_f32(os, static_cast<float>(c.mask_rate));
  write_f32(os, static_cast<float>(c.mask_token_fraction));
  write_f32(os, static_cast<float>(c.random_token_fraction));
  std::uint32_t count = 0;
  p.visit([&](const std::string&, const Tensor<S>&) { ++count; });
  write_u32(os, count);
  p.visit([&](const std::string& name, const Tensor<S>& t) {
    write_lp_string(os, name);
    write_u32(os, 2);
    write_u32(os, static_cast<std::uint32_t>(t.rows));
    write_u32(os, static_cast<std::uint32_t>(t.cols));
    for (auto x : t.data) write_f32(os, static_cast<float>(x));
  });
  if (!os) throw IoError("write failed: " + path);
}

struct Checkpoint {
  EncoderConfig config;
  EncoderParams<float> params;
};

inline Checkpoint load_checkpoint(const std::string& path) {
  auto is = open_input(path, true);
  if (read_bytes(is, 4, path + " magic") != "CMLM") throw ParseError(path + ": bad magic");
  const auto version = read_u32(is, path + " version");
  if (version != kCheckpointVersion) throw ParseError(path + ": unsupported version " + std::to_string(version));
  Checkpoint ck;
  auto& c = ck.config;
  for (int* v : {&c.layers, &c.hidden, &c.heads, &c.intermediate, &c.max_seq, &c.vocab_size}) {
    *v = static_cast<int>(read_u32(is, path + " config"));
  }
  c.tie_embeddings = read_u32(is, path + " config") != 0;
  c.mask_rate = read_f32(is, path + " config");
  c.mask_token_fraction = read_f32(is, path + " config");
  c.random_token_fraction = read_f32(is, path + " config");
  ck.params = allocate_params<float>(c);
  const auto count = read_u32(is, path + " tensor count");
  std::uint32_t expected = 0;
  ck.params.visit([&](const std::string&, Tensor<float>&) { ++expected; });
  if (count != expected) throw ParseError(path + ": tensor count mismatch");
  ck.params.visit([&](const std::string& name, Tensor<float>& t) {
    const auto got = read_lp_string(is, path + " tensor name");
    if (got != name) throw ParseError(path + ": expected tensor " + name + ", found " + got);
    if (read_u32(is, path + " rank") != 2) throw ParseError(path + ": bad rank for " + name);
    const auto r = read_u32(is, path + " shape");
    const auto k = read_u32(is, path + " shape");
    if (r != t.rows || k != t.cols) throw ParseError(path + ": shape mismatch for " + name);
    for (auto& x : t.data) x = read_f32(is, path + " " + name);
  });
  return ck;
}

}  // namespace chromsearch::mlm
