#pragma once

// Run configuration: one key = value file, flag overrides on top, and a
// stable hash of the effective settings.

#include <map>
#include <string>
#include <vector>

#include "chromsearch/common.hpp"
#include "chromsearch/embed.hpp"
#include "chromsearch/mlm/config.hpp"
#include "chromsearch/subword.hpp"
#include "chromsearch/tune.hpp"

namespace chromsearch {

class RunConfig {
 public:
  RunConfig() : values_(defaults()) {}

  static const std::map<std::string, std::string>& defaults() {
    static const std::map<std::string, std::string> d = {
        {"seed", "42"},
        {"workers", "1"},
        {"reference_mode", "1"},
        {"paths.corpus", "out/corpus.jsonl"},
        {"paths.models", "out/models"},
        {"paths.lexicons", "data/lexicons"},
        {"paths.output", "out"},
        {"paths.benchmark", "data/benchmark/benchmark_lexicon.csv"},
        {"paths.analogies", "data/analogy/formula_analogies.txt"},
        {"paths.curated", "data/fixtures/curated_relevant.txt"},
        {"paths.templates", "data/templates/replacement_queries.tsv"},
        {"w2v.dim", "300"},
        {"w2v.learning_rate", "0.001"},
        {"w2v.batch_size", "128"},
        {"w2v.epochs", "30"},
        {"w2v.window", "8"},
        {"w2v.negatives", "5"},
        {"w2v.subsample_threshold", "1e-4"},
        {"w2v.min_count", "1"},
        {"w2v.placeholders", "1"},
        {"wordpiece.target_size", "2000"},
        {"mlm.layers", "2"},
        {"mlm.hidden", "64"},
        {"mlm.heads", "4"},
        {"mlm.intermediate", "256"},
        {"mlm.max_seq", "128"},
        {"mlm.mask_rate", "0.15"},
        {"mlm.tie_embeddings", "0"},
        {"mlm.mask_token_fraction", "0.8"},
        {"mlm.random_token_fraction", "0.1"},
        {"train.epochs", "10"},
        {"train.batch_size", "32"},
        {"train.learning_rate", "1e-4"},
        {"train.heldout_fraction", "0.1"},
        {"tune.dev_fraction", "0.1"},
        {"tune.w2v_grid", "epochs=10,20,30;learning_rate=0.001,0.01"},
        {"tune.mlm_grid", "epochs=10,20,30;batch_size=16,32;learning_rate=1e-5,1e-4,1e-3"},
        {"evaluate.overlap", "w2v"},
        {"evaluate.top_k", "1000"},
    };
    return d;
  }

  static RunConfig load(const std::string& path) {
    RunConfig c;
    const auto lines = read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      auto t = trim(lines[i]);
      if (t.empty() || t.front() == '#') continue;
      const auto eq = t.find('=');
      const std::string where = path + ":" + std::to_string(i + 1);
      if (eq == std::string_view::npos) throw ConfigError(where + ": expected key = value");
      try {
        c.set(std::string(trim(t.substr(0, eq))), std::string(trim(t.substr(eq + 1))));
      } catch (const ConfigError& e) {
        throw ConfigError(where + ": " + e.what());
      }
    }
    return c;
  }

  void set(const std::string& key, const std::string& value) {
    if (!values_.count(key)) throw ConfigError("unknown config key: " + key);
    values_[key] = value;
  }

  // "key=value"
  void set_assignment(std::string_view kv) {
    const auto eq = kv.find('=');
    if (eq == std::string_view::npos) throw ConfigError("expected key=value: " + std::string(kv));
    set(std::string(trim(kv.substr(0, eq))), std::string(trim(kv.substr(eq + 1))));
  }

  const std::string& get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown config key: " + key);
    return it->second;
  }
  long long get_int(const std::string& key) const { return parse_int(get(key), key); }
  double get_double(const std::string& key) const { return parse_double(get(key), key); }
  bool get_bool(const std::string& key) const {
    const auto v = to_lower(get(key));
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw ConfigError(key + ": expected a boolean, got '" + get(key) + "'");
  }

  std::uint64_t seed() const {
    const auto s = get_int("seed");
    if (s < 0) throw ConfigError("seed must be non-negative");
    return static_cast<std::uint64_t>(s);
  }
  int workers() const { return static_cast<int>(get_int("workers")); }

  embed::W2VHyper w2v() const {
    embed::W2VHyper h;
    h.dim = static_cast<int>(get_int("w2v.dim"));
    h.learning_rate = get_double("w2v.learning_rate");
    h.batch_size = static_cast<int>(get_int("w2v.batch_size"));
    h.epochs = static_cast<int>(get_int("w2v.epochs"));
    h.window = static_cast<int>(get_int("w2v.window"));
    h.negatives = static_cast<int>(get_int("w2v.negatives"));
    h.subsample_threshold = get_double("w2v.subsample_threshold");
    h.seed = seed();
    h.workers = get_bool("reference_mode") ? 1 : workers();
    h.validate();
    return h;
  }

  mlm::EncoderConfig encoder(int vocab_size) const {
    mlm::EncoderConfig c;
    c.layers = static_cast<int>(get_int("mlm.layers"));
    c.hidden = static_cast<int>(get_int("mlm.hidden"));
    c.heads = static_cast<int>(get_int("mlm.heads"));
    c.intermediate = static_cast<int>(get_int("mlm.intermediate"));
    c.max_seq = static_cast<int>(get_int("mlm.max_seq"));
    c.vocab_size = vocab_size;
    c.mask_rate = get_double("mlm.mask_rate");
    c.tie_embeddings = get_bool("mlm.tie_embeddings");
    c.mask_token_fraction = get_double("mlm.mask_token_fraction");
    c.random_token_fraction = get_double("mlm.random_token_fraction");
    c.validate();
    return c;
  }

  mlm::TrainHyper train() const {
    mlm::TrainHyper h;
    h.epochs = static_cast<int>(get_int("train.epochs"));
    h.batch_size = static_cast<int>(get_int("train.batch_size"));
    h.learning_rate = get_double("train.learning_rate");
    h.seed = seed();
    h.validate();
    return h;
  }

  void validate() const {
    seed();
    if (workers() < 1) throw ConfigError("workers must be >= 1");
    get_bool("reference_mode");
    w2v();
    encoder(subword::kNumSpecials + 1);
    train();
    tune::parse_grid(get("tune.w2v_grid"));
    tune::parse_grid(get("tune.mlm_grid"));
    if (get_int("wordpiece.target_size") < subword::kNumSpecials) throw ConfigError("wordpiece.target_size too small");
    get_bool("w2v.placeholders");
    if (get_int("w2v.min_count") < 1) throw ConfigError("w2v.min_count must be >= 1");
    const auto ov = get("evaluate.overlap");
    if (ov != "w2v" && ov != "union") throw ConfigError("evaluate.overlap must be 'w2v' or 'union'");
  }

  // Canonical "key=value\n" listing in key order.
  std::string canonical() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
    return out;
  }
  std::string hash() const { return hex64(fnv1a64(canonical())); }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace chromsearch
