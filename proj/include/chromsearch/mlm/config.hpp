#pragma once

#include <cstdint>
#include <string>

#include "chromsearch/common.hpp"

namespace chromsearch::mlm {

inline constexpr double kLayerNormEps = 1e-12;
inline constexpr double kInitStd = 0.02;
inline constexpr double kDefaultMaskRate = 0.15;
inline constexpr int kIgnoreLabel = -100;

struct EncoderConfig {
  int layers = 2;
  int hidden = 64;
  int heads = 4;
  int intermediate = 256;
  int max_seq = 128;
  int vocab_size = 2000;
  double mask_rate = kDefaultMaskRate;
  // Share the token embedding matrix with the output head.
  bool tie_embeddings = false;
  // Corruption split of chosen positions: [MASK] / random id / unchanged.
  double mask_token_fraction = 0.8;
  double random_token_fraction = 0.1;

  int head_dim() const { return hidden / heads; }

  void validate() const {
    if (layers < 0) throw ConfigError("layers must be >= 0");
    if (hidden < 1 || heads < 1) throw ConfigError("hidden and heads must be >= 1");
    if (hidden % heads != 0) throw ConfigError("hidden must be divisible by heads");
    if (intermediate < 1) throw ConfigError("intermediate must be >= 1");
    if (max_seq < 3) throw ConfigError("max_seq must be >= 3");
    if (vocab_size < 6) throw ConfigError("vocab_size must cover the special tokens and at least one piece");
    if (!(mask_rate > 0.0 && mask_rate < 1.0)) throw ConfigError("mask_rate must be in (0,1)");
    if (mask_token_fraction < 0.0 || random_token_fraction < 0.0 ||
        mask_token_fraction + random_token_fraction > 1.0) {
      throw ConfigError("corruption fractions must be non-negative and sum to at most 1");
    }
  }

  static EncoderConfig desk(int vocab_size = 2000) {
    EncoderConfig c;
    c.vocab_size = vocab_size;
    return c;
  }

  // Reference base-size shape; constructible but far beyond desk training.
  static EncoderConfig base(int vocab_size = 30000) {
    EncoderConfig c;
    c.layers = 12;
    c.hidden = 768;
    c.heads = 12;
    c.intermediate = 3072;
    c.max_seq = 512;
    c.vocab_size = vocab_size;
    return c;
  }
};

struct TrainHyper {
  int epochs = 10;
  int batch_size = 32;
  double learning_rate = 1e-4;
  std::uint64_t seed = 42;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;

  void validate() const {
    if (epochs < 0) throw ConfigError("epochs must be >= 0");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  }
};

}  // namespace chromsearch::mlm
