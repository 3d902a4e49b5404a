#pragma once

// Post-LN transformer encoder with an MLM head. Forward keeps the
// activations needed by the hand-written backward pass.

#include <cmath>
#include <string>
#include <vector>

#include "chromsearch/common.hpp"
#include "chromsearch/mlm/config.hpp"
#include "chromsearch/mlm/params.hpp"

namespace chromsearch::mlm {

// ---------------------------------------------------------------------------
// dense kernels (row-major)

namespace kernel {

// C[m x n] = A[m x k] * B[k x n] (+ bias row)
template <class S>
void matmul(const S* A, const S* B, S* C, std::size_t m, std::size_t k, std::size_t n, const S* bias = nullptr) {
  for (std::size_t i = 0; i < m; ++i) {
    S* c = C + i * n;
    if (bias != nullptr) {
      for (std::size_t j = 0; j < n; ++j) c[j] = bias[j];
    } else {
      for (std::size_t j = 0; j < n; ++j) c[j] = S(0);
    }
    const S* a = A + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const S av = a[p];
      const S* b = B + p * n;
      for (std::size_t j = 0; j < n; ++j) c[j] += av * b[j];
    }
  }
}

// dA[m x k] += dC[m x n] * B^T
template <class S>
void matmul_grad_a(const S* dC, const S* B, S* dA, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const S* dc = dC + i * n;
    S* da = dA + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const S* b = B + p * n;
      S s = 0;
      for (std::size_t j = 0; j < n; ++j) s += dc[j] * b[j];
      da[p] += s;
    }
  }
}

// dB[k x n] += A^T * dC, db[n] += column sums of dC
template <class S>
void matmul_grad_b(const S* A, const S* dC, S* dB, S* db, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const S* a = A + i * k;
    const S* dc = dC + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const S av = a[p];
      S* d = dB + p * n;
      for (std::size_t j = 0; j < n; ++j) d[j] += av * dc[j];
    }
    if (db != nullptr) {
      for (std::size_t j = 0; j < n; ++j) db[j] += dc[j];
    }
  }
}

template <class S>
S gelu(S x) {
  return S(0.5) * x * (S(1) + std::erf(x / std::sqrt(S(2))));
}

template <class S>
S gelu_grad(S x) {
  constexpr double kInvSqrt2Pi = 0.39894228040143267794;
  return S(0.5) * (S(1) + std::erf(x / std::sqrt(S(2)))) + x * static_cast<S>(kInvSqrt2Pi) * std::exp(-S(0.5) * x * x);
}

// y = g * (x - mean) * rstd + b per row; stores xhat and rstd for backward.
template <class S>
void layer_norm(const S* x, const S* g, const S* b, S* y, S* xhat, S* rstd, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    const S* xr = x + r * cols;
    S mean = 0;
    for (std::size_t j = 0; j < cols; ++j) mean += xr[j];
    mean /= static_cast<S>(cols);
    S var = 0;
    for (std::size_t j = 0; j < cols; ++j) var += (xr[j] - mean) * (xr[j] - mean);
    var /= static_cast<S>(cols);
    const S rs = S(1) / std::sqrt(var + static_cast<S>(kLayerNormEps));
    rstd[r] = rs;
    for (std::size_t j = 0; j < cols; ++j) {
      const S h = (xr[j] - mean) * rs;
      xhat[r * cols + j] = h;
      y[r * cols + j] = g[j] * h + b[j];
    }
  }
}

// Given dy, accumulates dg, db and writes dx.
template <class S>
void layer_norm_grad(const S* dy, const S* xhat, const S* rstd, const S* g, S* dx, S* dg, S* db, std::size_t rows,
                     std::size_t cols) {
  std::vector<S> dxhat(cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const S* dyr = dy + r * cols;
    const S* hr = xhat + r * cols;
    S mean_d = 0;
    S mean_dh = 0;
    for (std::size_t j = 0; j < cols; ++j) {
      dg[j] += dyr[j] * hr[j];
      db[j] += dyr[j];
      dxhat[j] = dyr[j] * g[j];
      mean_d += dxhat[j];
      mean_dh += dxhat[j] * hr[j];
    }
    mean_d /= static_cast<S>(cols);
    mean_dh /= static_cast<S>(cols);
    for (std::size_t j = 0; j < cols; ++j) dx[r * cols + j] = rstd[r] * (dxhat[j] - mean_d - hr[j] * mean_dh);
  }
}

}  // namespace kernel

// ---------------------------------------------------------------------------
// forward

struct EncoderInput {
  std::vector<int> ids;
  std::vector<int> type_ids;
  std::vector<int> attention_mask;
};

template <class S>
struct LayerCache {
  Tensor<S> x;           // T x H input
  Tensor<S> q, k, v;     // T x H
  std::vector<Tensor<S>> probs;  // per head T x T attention weights
  Tensor<S> ctx;         // T x H
  Tensor<S> ln1_xhat, ln1_rstd, y1;
  Tensor<S> ffn_pre, ffn_act;  // T x I
  Tensor<S> ln2_xhat, ln2_rstd;
};

template <class S>
struct ForwardCache {
  EncoderInput input;
  std::vector<LayerCache<S>> layers;
  Tensor<S> hidden;  // T x H final hidden states
};

inline void check_input(const EncoderConfig& c, const EncoderInput& in) {
  const auto T = in.ids.size();
  if (T == 0) throw Error("input_ids: empty sequence");
  if (in.type_ids.size() != T || in.attention_mask.size() != T) {
    throw Error("input_ids/type_ids/attention_mask: length mismatch");
  }
  if (T > static_cast<std::size_t>(c.max_seq)) {
    throw Error("input_ids: length " + std::to_string(T) + " exceeds max_seq " + std::to_string(c.max_seq));
  }
  for (std::size_t i = 0; i < T; ++i) {
    if (in.ids[i] < 0 || in.ids[i] >= c.vocab_size) throw Error("input_ids: id out of range at " + std::to_string(i));
    if (in.type_ids[i] != 0 && in.type_ids[i] != 1) throw Error("type_ids: value must be 0 or 1");
  }
}

template <class S>
void check_params(const EncoderConfig& c, const EncoderParams<S>& p) {
  auto expect = [](const Tensor<S>& t, std::size_t r, std::size_t k, const std::string& name) {
    if (t.rows != r || t.cols != k) {
      throw Error(name + ": shape " + std::to_string(t.rows) + "x" + std::to_string(t.cols) + ", expected " +
                  std::to_string(r) + "x" + std::to_string(k));
    }
  };
  const auto H = static_cast<std::size_t>(c.hidden);
  const auto V = static_cast<std::size_t>(c.vocab_size);
  expect(p.tok, V, H, "embeddings.token");
  expect(p.pos, static_cast<std::size_t>(c.max_seq), H, "embeddings.position");
  expect(p.seg, 2, H, "embeddings.segment");
  if (p.layers.size() != static_cast<std::size_t>(c.layers)) throw Error("layers: count mismatch");
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const auto& L = p.layers[l];
    const auto I = static_cast<std::size_t>(c.intermediate);
    const std::string n = "layer." + std::to_string(l);
    expect(L.wq, H, H, n + ".attn.q.weight");
    expect(L.wk, H, H, n + ".attn.k.weight");
    expect(L.wv, H, H, n + ".attn.v.weight");
    expect(L.wo, H, H, n + ".attn.out.weight");
    expect(L.w1, H, I, n + ".ffn.in.weight");
    expect(L.w2, I, H, n + ".ffn.out.weight");
  }
  if (c.tie_embeddings != p.head_w.empty()) throw Error("head.weight: presence does not match tie_embeddings");
  if (!c.tie_embeddings) expect(p.head_w, H, V, "head.weight");
  expect(p.head_b, 1, V, "head.bias");
}

// Runs the encoder body and returns the cache (final hidden states included).
template <class S>
ForwardCache<S> encode_hidden(const EncoderConfig& c, const EncoderParams<S>& p, const EncoderInput& in) {
  check_input(c, in);
  const std::size_t T = in.ids.size();
  const auto H = static_cast<std::size_t>(c.hidden);
  const auto I = static_cast<std::size_t>(c.intermediate);
  const auto A = static_cast<std::size_t>(c.heads);
  const std::size_t dh = H / A;
  const S scale = S(1) / std::sqrt(static_cast<S>(dh));

  ForwardCache<S> fc;
  fc.input = in;
  Tensor<S> x(T, H);
  for (std::size_t t = 0; t < T; ++t) {
    const S* te = p.tok.row(static_cast<std::size_t>(in.ids[t]));
    const S* pe = p.pos.row(t);
    const S* se = p.seg.row(static_cast<std::size_t>(in.type_ids[t]));
    for (std::size_t j = 0; j < H; ++j) x.at(t, j) = te[j] + pe[j] + se[j];
  }

  fc.layers.resize(p.layers.size());
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const auto& L = p.layers[l];
    auto& lc = fc.layers[l];
    lc.x = x;
    lc.q = Tensor<S>(T, H);
    lc.k = Tensor<S>(T, H);
    lc.v = Tensor<S>(T, H);
    kernel::matmul(x.data.data(), L.wq.data.data(), lc.q.data.data(), T, H, H, L.bq.data.data());
    kernel::matmul(x.data.data(), L.wk.data.data(), lc.k.data.data(), T, H, H, L.bk.data.data());
    kernel::matmul(x.data.data(), L.wv.data.data(), lc.v.data.data(), T, H, H, L.bv.data.data());

    lc.ctx = Tensor<S>(T, H);
    lc.probs.assign(A, Tensor<S>(T, T));
    for (std::size_t h = 0; h < A; ++h) {
      auto& P = lc.probs[h];
      const std::size_t off = h * dh;
      for (std::size_t i = 0; i < T; ++i) {
        S mx = -std::numeric_limits<S>::infinity();
        for (std::size_t j = 0; j < T; ++j) {
          if (in.attention_mask[j] == 0) continue;
          S s = 0;
          for (std::size_t d = 0; d < dh; ++d) s += lc.q.at(i, off + d) * lc.k.at(j, off + d);
          s *= scale;
          P.at(i, j) = s;
          mx = std::max(mx, s);
        }
        S sum = 0;
        for (std::size_t j = 0; j < T; ++j) {
          if (in.attention_mask[j] == 0) {
            P.at(i, j) = 0;
            continue;
          }
          P.at(i, j) = std::exp(P.at(i, j) - mx);
          sum += P.at(i, j);
        }
        for (std::size_t j = 0; j < T; ++j) P.at(i, j) /= sum;
        for (std::size_t j = 0; j < T; ++j) {
          const S w = P.at(i, j);
          if (w == S(0)) continue;
          for (std::size_t d = 0; d < dh; ++d) lc.ctx.at(i, off + d) += w * lc.v.at(j, off + d);
        }
      }
    }
    Tensor<S> attn(T, H);
    kernel::matmul(lc.ctx.data.data(), L.wo.data.data(), attn.data.data(), T, H, H, L.bo.data.data());
    for (std::size_t i = 0; i < attn.size(); ++i) attn.data[i] += x.data[i];
    lc.ln1_xhat = Tensor<S>(T, H);
    lc.ln1_rstd = Tensor<S>(T, 1);
    lc.y1 = Tensor<S>(T, H);
    kernel::layer_norm(attn.data.data(), L.ln1_g.data.data(), L.ln1_b.data.data(), lc.y1.data.data(),
                       lc.ln1_xhat.data.data(), lc.ln1_rstd.data.data(), T, H);

    lc.ffn_pre = Tensor<S>(T, I);
    kernel::matmul(lc.y1.data.data(), L.w1.data.data(), lc.ffn_pre.data.data(), T, H, I, L.b1.data.data());
    lc.ffn_act = Tensor<S>(T, I);
    for (std::size_t i = 0; i < lc.ffn_pre.size(); ++i) lc.ffn_act.data[i] = kernel::gelu(lc.ffn_pre.data[i]);
    Tensor<S> ffn(T, H);
    kernel::matmul(lc.ffn_act.data.data(), L.w2.data.data(), ffn.data.data(), T, I, H, L.b2.data.data());
    for (std::size_t i = 0; i < ffn.size(); ++i) ffn.data[i] += lc.y1.data[i];
    lc.ln2_xhat = Tensor<S>(T, H);
    lc.ln2_rstd = Tensor<S>(T, 1);
    Tensor<S> out(T, H);
    kernel::layer_norm(ffn.data.data(), L.ln2_g.data.data(), L.ln2_b.data.data(), out.data.data(),
                       lc.ln2_xhat.data.data(), lc.ln2_rstd.data.data(), T, H);
    x = std::move(out);
  }
  fc.hidden = std::move(x);
  return fc;
}

// Logits for one hidden row.
template <class S>
void head_logits(const EncoderConfig& c, const EncoderParams<S>& p, const S* h, S* out) {
  const auto H = static_cast<std::size_t>(c.hidden);
  const auto V = static_cast<std::size_t>(c.vocab_size);
  if (c.tie_embeddings) {
    for (std::size_t v = 0; v < V; ++v) {
      const S* e = p.tok.row(v);
      S s = p.head_b.data[v];
      for (std::size_t j = 0; j < H; ++j) s += h[j] * e[j];
      out[v] = s;
    }
  } else {
    kernel::matmul(h, p.head_w.data.data(), out, 1, H, V, p.head_b.data.data());
  }
}

// Full forward: seq_len x vocab logits.
template <class S>
Tensor<S> encoder_forward(const EncoderConfig& c, const EncoderParams<S>& p, const EncoderInput& in,
                          ForwardCache<S>* cache_out = nullptr) {
  check_params(c, p);
  auto fc = encode_hidden(c, p, in);
  const std::size_t T = in.ids.size();
  Tensor<S> logits(T, static_cast<std::size_t>(c.vocab_size));
  for (std::size_t t = 0; t < T; ++t) head_logits(c, p, fc.hidden.row(t), logits.row(t));
  if (cache_out != nullptr) *cache_out = std::move(fc);
  return logits;
}

// ---------------------------------------------------------------------------
// backward

// `dlogits` holds one gradient row per entry of `positions`. Gradients are
// accumulated into `g` (same layout as the params).
template <class S>
void encoder_backward(const EncoderConfig& c, const EncoderParams<S>& p, const ForwardCache<S>& fc,
                      const std::vector<std::size_t>& positions, const std::vector<std::vector<S>>& dlogits,
                      EncoderParams<S>& g) {
  const std::size_t T = fc.input.ids.size();
  const auto H = static_cast<std::size_t>(c.hidden);
  const auto I = static_cast<std::size_t>(c.intermediate);
  const auto V = static_cast<std::size_t>(c.vocab_size);
  const auto A = static_cast<std::size_t>(c.heads);
  const std::size_t dh = H / A;
  const S scale = S(1) / std::sqrt(static_cast<S>(dh));

  Tensor<S> dx(T, H);
  for (std::size_t k = 0; k < positions.size(); ++k) {
    const std::size_t t = positions[k];
    const S* h = fc.hidden.row(t);
    const S* dl = dlogits[k].data();
    S* dh_row = dx.row(t);
    for (std::size_t v = 0; v < V; ++v) g.head_b.data[v] += dl[v];
    if (c.tie_embeddings) {
      for (std::size_t v = 0; v < V; ++v) {
        const S d = dl[v];
        if (d == S(0)) continue;
        const S* e = p.tok.row(v);
        S* ge = g.tok.row(v);
        for (std::size_t j = 0; j < H; ++j) {
          dh_row[j] += d * e[j];
          ge[j] += d * h[j];
        }
      }
    } else {
      kernel::matmul_grad_a(dl, p.head_w.data.data(), dh_row, 1, H, V);
      kernel::matmul_grad_b(h, dl, g.head_w.data.data(), static_cast<S*>(nullptr), 1, H, V);
    }
  }

  for (std::size_t li = p.layers.size(); li-- > 0;) {
    const auto& L = p.layers[li];
    auto& G = g.layers[li];
    const auto& lc = fc.layers[li];

    // out = LN2(y1 + ffn)
    Tensor<S> dr2(T, H);
    kernel::layer_norm_grad(dx.data.data(), lc.ln2_xhat.data.data(), lc.ln2_rstd.data.data(), L.ln2_g.data.data(),
                            dr2.data.data(), G.ln2_g.data.data(), G.ln2_b.data.data(), T, H);
    Tensor<S> dact(T, I);
    kernel::matmul_grad_a(dr2.data.data(), L.w2.data.data(), dact.data.data(), T, I, H);
    kernel::matmul_grad_b(lc.ffn_act.data.data(), dr2.data.data(), G.w2.data.data(), G.b2.data.data(), T, I, H);
    for (std::size_t i = 0; i < dact.size(); ++i) dact.data[i] *= kernel::gelu_grad(lc.ffn_pre.data[i]);
    Tensor<S> dy1 = dr2;  // residual branch
    kernel::matmul_grad_a(dact.data.data(), L.w1.data.data(), dy1.data.data(), T, H, I);
    kernel::matmul_grad_b(lc.y1.data.data(), dact.data.data(), G.w1.data.data(), G.b1.data.data(), T, H, I);

    // y1 = LN1(x + attn)
    Tensor<S> dr1(T, H);
    kernel::layer_norm_grad(dy1.data.data(), lc.ln1_xhat.data.data(), lc.ln1_rstd.data.data(), L.ln1_g.data.data(),
                            dr1.data.data(), G.ln1_g.data.data(), G.ln1_b.data.data(), T, H);
    Tensor<S> dctx(T, H);
    kernel::matmul_grad_a(dr1.data.data(), L.wo.data.data(), dctx.data.data(), T, H, H);
    kernel::matmul_grad_b(lc.ctx.data.data(), dr1.data.data(), G.wo.data.data(), G.bo.data.data(), T, H, H);

    Tensor<S> dq(T, H), dk(T, H), dv(T, H);
    std::vector<S> dP(T);
    for (std::size_t h = 0; h < A; ++h) {
      const auto& P = lc.probs[h];
      const std::size_t off = h * dh;
      for (std::size_t i = 0; i < T; ++i) {
        S dot_pd = 0;
        for (std::size_t j = 0; j < T; ++j) {
          S s = 0;
          for (std::size_t d = 0; d < dh; ++d) s += dctx.at(i, off + d) * lc.v.at(j, off + d);
          dP[j] = s;
          dot_pd += P.at(i, j) * s;
          const S w = P.at(i, j);
          if (w != S(0)) {
            for (std::size_t d = 0; d < dh; ++d) dv.at(j, off + d) += w * dctx.at(i, off + d);
          }
        }
        for (std::size_t j = 0; j < T; ++j) {
          const S ds = P.at(i, j) * (dP[j] - dot_pd) * scale;
          if (ds == S(0)) continue;
          for (std::size_t d = 0; d < dh; ++d) {
            dq.at(i, off + d) += ds * lc.k.at(j, off + d);
            dk.at(j, off + d) += ds * lc.q.at(i, off + d);
          }
        }
      }
    }
    Tensor<S> dxin = dr1;  // residual branch
    kernel::matmul_grad_a(dq.data.data(), L.wq.data.data(), dxin.data.data(), T, H, H);
    kernel::matmul_grad_b(lc.x.data.data(), dq.data.data(), G.wq.data.data(), G.bq.data.data(), T, H, H);
    kernel::matmul_grad_a(dk.data.data(), L.wk.data.data(), dxin.data.data(), T, H, H);
    kernel::matmul_grad_b(lc.x.data.data(), dk.data.data(), G.wk.data.data(), G.bk.data.data(), T, H, H);
    kernel::matmul_grad_a(dv.data.data(), L.wv.data.data(), dxin.data.data(), T, H, H);
    kernel::matmul_grad_b(lc.x.data.data(), dv.data.data(), G.wv.data.data(), G.bv.data.data(), T, H, H);
    dx = std::move(dxin);
  }

  for (std::size_t t = 0; t < T; ++t) {
    S* gt = g.tok.row(static_cast<std::size_t>(fc.input.ids[t]));
    S* gp = g.pos.row(t);
    S* gs = g.seg.row(static_cast<std::size_t>(fc.input.type_ids[t]));
    const S* d = dx.row(t);
    for (std::size_t j = 0; j < H; ++j) {
      gt[j] += d[j];
      gp[j] += d[j];
      gs[j] += d[j];
    }
  }
}

// Sum over labelled positions of -log p(label), with gradients of
// `loss_scale * sum` accumulated into `g` when non-null.
template <class S>
double example_loss_and_grad(const EncoderConfig& c, const EncoderParams<S>& p, const EncoderInput& in,
                             const std::vector<int>& labels, double loss_scale, EncoderParams<S>* g) {
  auto fc = encode_hidden(c, p, in);
  const auto V = static_cast<std::size_t>(c.vocab_size);
  std::vector<std::size_t> positions;
  std::vector<std::vector<S>> dlogits;
  std::vector<S> logits(V);
  double total = 0.0;
  for (std::size_t t = 0; t < labels.size(); ++t) {
    if (labels[t] == kIgnoreLabel) continue;
    head_logits(c, p, fc.hidden.row(t), logits.data());
    double mx = -std::numeric_limits<double>::infinity();
    for (auto z : logits) mx = std::max(mx, static_cast<double>(z));
    double sum = 0.0;
    for (auto z : logits) sum += std::exp(static_cast<double>(z) - mx);
    const double lse = mx + std::log(sum);
    total += lse - static_cast<double>(logits[static_cast<std::size_t>(labels[t])]);
    if (g != nullptr) {
      std::vector<S> d(V);
      for (std::size_t v = 0; v < V; ++v) {
        d[v] = static_cast<S>(std::exp(static_cast<double>(logits[v]) - lse) * loss_scale);
      }
      d[static_cast<std::size_t>(labels[t])] -= static_cast<S>(loss_scale);
      positions.push_back(t);
      dlogits.push_back(std::move(d));
    }
  }
  if (g != nullptr && !positions.empty()) encoder_backward(c, p, fc, positions, dlogits, *g);
  return total;
}

}  // namespace chromsearch::mlm
