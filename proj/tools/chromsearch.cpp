// chromsearch command-line entry point.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "chromsearch/config.hpp"
#include "chromsearch/corpus.hpp"
#include "chromsearch/corpus_fetch.hpp"
#include "chromsearch/embed.hpp"
#include "chromsearch/evalrank.hpp"
#include "chromsearch/mlm/train.hpp"
#include "chromsearch/pipeline.hpp"
#include "chromsearch/subword.hpp"
#include "chromsearch/tune.hpp"

namespace fs = std::filesystem;
using namespace chromsearch;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitMissing = 2;
constexpr int kExitConfig = 3;

struct Options {
  std::string config_path;
  std::vector<std::string> assignments;
  std::vector<std::pair<std::string, std::string>> flag_overrides;

  std::string out;
  std::string in;

  // ingest
  std::string source = "fixture";
  std::string fixture_dir = "data/fixtures/records";
  std::string base_url;
  std::string query = "TITLE-ABS-KEY(chromate AND (replace* OR substitute))";
  int pages = 10;

  // queries
  std::string model;
  std::string vocab;
  std::string word;
  std::optional<std::size_t> k;
  std::string tmpl;
  std::string preset;
  std::string candidates_out;
  std::string label;
  std::vector<std::string> terms;

  // evaluation
  std::vector<std::string> candidate_files;
  std::string relevance = "curated";
};

std::string one_line(std::string s) {
  for (auto& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

fs::path models_dir(const RunConfig& cfg) { return cfg.get("paths.models"); }
fs::path output_dir(const RunConfig& cfg) { return cfg.get("paths.output"); }

std::string or_default(const std::string& v, const fs::path& fallback) { return v.empty() ? fallback.string() : v; }

void ensure_parent(const std::string& path) {
  const auto parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

chemtok::Lexicons lexicons(const RunConfig& cfg) {
  const fs::path dir = cfg.get("paths.lexicons");
  return fs::is_directory(dir) ? chemtok::Lexicons::load(dir) : chemtok::Lexicons::builtin();
}

void write_manifest(const std::string& artifact, const std::string& command, const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["artifact"] = fs::path(artifact).filename().string();
  j["command"] = command;
  j["seed"] = cfg.seed();
  j["config_hash"] = cfg.hash();
  j["version"] = std::string(kArtifactVersion);
  auto os = open_output(artifact + ".manifest.json", true);
  os << j.dump(2) << '\n';
}

void write_candidates(const evalrank::CandidateList& list, const std::string& path) {
  ensure_parent(path);
  auto os = open_output(path, true);
  os << "model_label,rank,term\n";
  evalrank::write_candidate_list(list, os);
}

// ---------------------------------------------------------------------------
// commands

int cmd_ingest(const RunConfig& cfg, const Options& o) {
  corpus::SourceConfig sc;
  if (o.source == "fixture") {
    sc.mode = corpus::SourceMode::Fixture;
    sc.fixture_dir = o.fixture_dir;
  } else if (o.source == "live") {
    sc.mode = corpus::SourceMode::Live;
    if (o.base_url.empty()) throw ConfigError("live mode needs --base-url");
    sc.base_url = o.base_url;
  } else {
    throw ConfigError("--source must be 'fixture' or 'live'");
  }
  const auto records = corpus::fetch_records(sc, o.query, o.pages);
  const auto out = or_default(o.out, output_dir(cfg) / "raw" / "records.jsonl");
  ensure_parent(out);
  auto os = open_output(out, true);
  for (const auto& r : records) os << corpus::dump_line(corpus::record_to_json(r)) << '\n';
  if (!os) throw IoError("write failed: " + out);
  std::cerr << "ingested " << records.size() << " records -> " << out << '\n';
  return 0;
}

int cmd_preprocess(const RunConfig& cfg, const Options& o) {
  const auto in = or_default(o.in, output_dir(cfg) / "raw");
  const auto lex = lexicons(cfg);
  auto raw = corpus::read_fixture_dir(in);
  std::vector<corpus::DocumentRecord> cleaned;
  cleaned.reserve(raw.size());
  for (auto& r : raw) cleaned.push_back(corpus::clean_record(std::move(r)));
  const auto kept = corpus::filter_records(cleaned, corpus::FilterSpec::chromate_default(), lex,
                                           static_cast<unsigned>(cfg.workers()));
  std::vector<corpus::CorpusRecord> recs;
  for (const auto& r : kept) recs.push_back(corpus::to_corpus_record(r));
  const auto out = or_default(o.out, cfg.get("paths.corpus"));
  ensure_parent(out);
  const auto res = corpus::write_corpus(recs, out);
  std::cerr << "kept " << kept.size() << " of " << cleaned.size() << " records, wrote " << res.written << " ("
            << res.duplicates << " duplicate ids dropped) -> " << out << '\n';
  return 0;
}

std::vector<corpus::CorpusRecord> load_corpus(const RunConfig& cfg, const Options& o) {
  return corpus::read_corpus(or_default(o.in, cfg.get("paths.corpus")));
}

chemtok::PlaceholderPolicy w2v_policy(const RunConfig& cfg) {
  return cfg.get_bool("w2v.placeholders") ? chemtok::PlaceholderPolicy::On : chemtok::PlaceholderPolicy::Off;
}

int cmd_train_w2v(const RunConfig& cfg, const Options& o) {
  const auto h = cfg.w2v();
  const auto recs = load_corpus(cfg, o);
  const auto sents = pipeline::sentences(recs, w2v_policy(cfg), lexicons(cfg));
  const auto vocab = embed::build_vocab(sents, cfg.get_int("w2v.min_count"));
  embed::TrainStats stats;
  auto m = embed::train_skipgram<float>(sents, vocab, h, &stats);
  embed::normalize(m);
  const auto out = or_default(o.out, models_dir(cfg) / "w2v.cemb");
  ensure_parent(out);
  embed::save_embeddings(m, out);
  write_manifest(out, "train-w2v", cfg);
  std::cerr << "vocabulary " << vocab.size() << ", pairs " << stats.pairs << " -> " << out << '\n';
  return 0;
}

int cmd_train_wordpiece(const RunConfig& cfg, const Options& o) {
  const auto recs = load_corpus(cfg, o);
  const auto words = pipeline::words(recs, lexicons(cfg));
  const auto vocab =
      subword::train_wordpiece(words, static_cast<std::size_t>(cfg.get_int("wordpiece.target_size")));
  const auto out = or_default(o.out, models_dir(cfg) / "wordpiece.txt");
  ensure_parent(out);
  vocab.save(out);
  write_manifest(out, "train-wordpiece", cfg);
  std::cerr << "vocabulary " << vocab.size() << " pieces -> " << out << '\n';
  return 0;
}

struct SplitSequences {
  std::vector<subword::EncodedSequence> train;
  std::vector<subword::EncodedSequence> heldout;
};

SplitSequences split_sequences(const std::vector<corpus::CorpusRecord>& recs, const subword::WordPieceVocab& vocab,
                               const mlm::EncoderConfig& c, const chemtok::Lexicons& lex, double fraction,
                               std::uint64_t seed) {
  SplitSequences s;
  for (const auto& r : recs) {
    const auto sents = pipeline::sentences({r}, chemtok::PlaceholderPolicy::Off, lex);
    auto seqs = pipeline::encode_sentences(sents, vocab, static_cast<std::size_t>(c.max_seq));
    auto& target = tune::in_dev(r.id, fraction, seed) ? s.heldout : s.train;
    target.insert(target.end(), seqs.begin(), seqs.end());
  }
  return s;
}

int cmd_train_mlm(const RunConfig& cfg, const Options& o) {
  const auto vocab_path = or_default(o.vocab, models_dir(cfg) / "wordpiece.txt");
  if (!fs::exists(vocab_path)) throw MissingArtifact("wordpiece vocabulary not found: " + vocab_path);
  const auto vocab = subword::WordPieceVocab::load(vocab_path);
  const auto c = cfg.encoder(static_cast<int>(vocab.size()));
  const auto h = cfg.train();
  const auto recs = load_corpus(cfg, o);
  const auto split =
      split_sequences(recs, vocab, c, lexicons(cfg), cfg.get_double("train.heldout_fraction"), cfg.seed());
  if (split.train.empty()) throw ConfigError("no training sequences after the held-out split");
  const auto res = mlm::train_mlm(split.train, split.heldout, c, h);
  const auto out = or_default(o.out, models_dir(cfg) / "mlm.ckpt");
  ensure_parent(out);
  mlm::save_checkpoint(c, res.params, out);
  write_manifest(out, "train-mlm", cfg);
  const auto log_path = fs::path(out).replace_extension(".log.csv").string();
  mlm::write_training_log(res.log, log_path);
  std::cerr << "sequences " << split.train.size() << " train / " << split.heldout.size() << " held-out; "
            << "held-out perplexity " << format_fixed(res.log.front().heldout_perplexity, 3) << " -> "
            << format_fixed(res.log.back().heldout_perplexity, 3) << " -> " << out << '\n';
  return 0;
}

void apply_axis(RunConfig& c, const std::string& prefix, const std::map<std::string, double>& params) {
  for (const auto& [k, v] : params) c.set(prefix + k, format_number(v));
}

void print_best(const tune::SearchResult& res, tune::ObjectiveKind kind) {
  std::cout << "objective\t" << tune::to_string(kind) << '\n';
  std::cout << "best_trial\t" << res.best.index << '\n';
  for (const auto& [k, v] : res.best.params) std::cout << k << '\t' << format_number(v) << '\n';
  std::cout << "best_objective\t" << format_number(res.best.objective) << '\n';
}

int cmd_tune_w2v(const RunConfig& cfg, const Options& o) {
  const auto grid = tune::parse_grid(cfg.get("tune.w2v_grid"));
  const auto recs = load_corpus(cfg, o);
  const auto split = tune::make_dev_split(recs, cfg.get_double("tune.dev_fraction"), cfg.seed(),
                                          [](const corpus::CorpusRecord& r) { return r.id; });
  const auto lex = lexicons(cfg);
  const auto sents = pipeline::sentences(split.second, w2v_policy(cfg), lex);
  const auto vocab = embed::build_vocab(sents, cfg.get_int("w2v.min_count"));
  const auto quads = embed::load_analogies(cfg.get("paths.analogies"));
  const auto res = tune::grid_search(
      grid,
      [&](const std::map<std::string, double>& p) {
        RunConfig c = cfg;
        apply_axis(c, "w2v.", p);
        auto m = embed::train_skipgram<float>(sents, vocab, c.w2v());
        embed::normalize(m);
        return m;
      },
      [&](const embed::EmbeddingModel<float>& m, const std::map<std::string, double>&) {
        const auto r = embed::evaluate_analogies(m, quads);
        if (r.evaluated == 0) throw Error("no analogy quadruple is fully in vocabulary");
        return r.score();
      },
      tune::Direction::Maximize, 1);
  const auto out = or_default(o.out, output_dir(cfg) / "tune_w2v.csv");
  ensure_parent(out);
  tune::write_sweep_log(grid, res, out, !cfg.get_bool("reference_mode"));
  print_best(res, tune::ObjectiveKind::AnalogyScoreMax);
  return 0;
}

int cmd_tune_mlm(const RunConfig& cfg, const Options& o) {
  const auto grid = tune::parse_grid(cfg.get("tune.mlm_grid"));
  const auto vocab_path = or_default(o.vocab, models_dir(cfg) / "wordpiece.txt");
  if (!fs::exists(vocab_path)) throw MissingArtifact("wordpiece vocabulary not found: " + vocab_path);
  const auto vocab = subword::WordPieceVocab::load(vocab_path);
  const auto c = cfg.encoder(static_cast<int>(vocab.size()));
  const auto recs = load_corpus(cfg, o);
  // Dev membership uses the same per-id hash as make_dev_split.
  const auto split = split_sequences(recs, vocab, c, lexicons(cfg), cfg.get_double("tune.dev_fraction"), cfg.seed());
  if (split.heldout.empty() || split.train.empty()) throw ConfigError("dev split left one side empty");
  const auto res = tune::grid_search(
      grid,
      [&](const std::map<std::string, double>& p) {
        RunConfig rc = cfg;
        apply_axis(rc, "train.", p);
        return mlm::train_mlm(split.train, split.heldout, c, rc.train());
      },
      [&](const mlm::TrainResult& r, const std::map<std::string, double>&) { return r.log.back().heldout_perplexity; },
      tune::Direction::Minimize, 1);
  const auto out = or_default(o.out, output_dir(cfg) / "tune_mlm.csv");
  ensure_parent(out);
  tune::write_sweep_log(grid, res, out, !cfg.get_bool("reference_mode"));
  bool has_lr = false, has_bs = false;
  for (const auto& a : grid.axes) {
    has_lr |= a.name == "learning_rate";
    has_bs |= a.name == "batch_size";
  }
  if (has_lr && has_bs) {
    tune::write_heatmap_csv(grid, res, "learning_rate", "batch_size",
                            fs::path(out).replace_extension(".heatmap.csv").string());
  }
  print_best(res, tune::ObjectiveKind::PerplexityMin);
  return 0;
}

int cmd_similar(const RunConfig& cfg, const Options& o) {
  if (o.word.empty()) throw ConfigError("--word is required");
  const auto m = embed::load_embeddings(or_default(o.model, models_dir(cfg) / "w2v.cemb"));
  const std::size_t k = o.k.value_or(static_cast<std::size_t>(cfg.get_int("evaluate.top_k")));
  const auto hits = embed::most_similar(m, o.word, k);
  evalrank::CandidateList list{o.label.empty() ? std::string(evalrank::kWordModelLabel) : o.label, {}};
  for (const auto& n : hits) {
    std::cout << n.rank << '\t' << n.word << '\t' << format_fixed(n.score, 6) << '\n';
    list.entries.push_back({n.rank, n.word});
  }
  if (!o.candidates_out.empty()) write_candidates(list, o.candidates_out);
  return 0;
}

std::vector<std::pair<std::string, std::string>> load_templates(const std::string& path) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& line : read_lines(path)) {
    if (trim(line).empty() || trim(line).front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(path + ": expected label<TAB>template");
    out.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  return out;
}

int cmd_fill_mask(const RunConfig& cfg, const Options& o) {
  std::vector<std::pair<std::string, std::string>> templates;
  if (!o.preset.empty()) {
    if (o.preset != "table1") throw ConfigError("unknown preset: " + o.preset);
    templates = load_templates(cfg.get("paths.templates"));
  } else if (!o.tmpl.empty()) {
    templates.emplace_back(o.label.empty() ? "template" : o.label, o.tmpl);
  } else {
    throw ConfigError("either --template or --preset is required");
  }
  const auto ck = mlm::load_checkpoint(or_default(o.model, models_dir(cfg) / "mlm.ckpt"));
  const auto vocab = subword::WordPieceVocab::load(or_default(o.vocab, models_dir(cfg) / "wordpiece.txt"));
  if (static_cast<int>(vocab.size()) != ck.config.vocab_size) {
    throw ConfigError("vocabulary size " + std::to_string(vocab.size()) + " does not match checkpoint " +
                      std::to_string(ck.config.vocab_size));
  }
  const auto lex = lexicons(cfg);
  const std::size_t k = o.k.value_or(10);
  const bool many = templates.size() > 1;
  std::vector<evalrank::CandidateList> lists;
  for (const auto& [label, t] : templates) {
    const auto preds = mlm::fill_mask(ck.config, ck.params, vocab, t, k, lex);
    evalrank::CandidateList list{label, {}};
    for (const auto& p : preds) {
      if (many) std::cout << label << '\t';
      std::cout << p.rank << '\t' << p.piece << '\t' << format_fixed(p.probability, 6) << '\n';
      list.entries.push_back({p.rank, p.piece});
    }
    lists.push_back(std::move(list));
  }
  if (!o.candidates_out.empty()) {
    ensure_parent(o.candidates_out);
    auto os = open_output(o.candidates_out, true);
    os << "model_label,rank,term\n";
    for (const auto& l : lists) evalrank::write_candidate_list(l, os);
  }
  return 0;
}

int cmd_frequency(const RunConfig& cfg, const Options& o) {
  if (o.terms.empty()) throw ConfigError("at least one --term is required");
  const auto recs = load_corpus(cfg, o);
  std::vector<std::string> texts;
  for (const auto& r : recs) texts.push_back(r.text);
  const auto counter = evalrank::TermCounter::from_texts(texts, lexicons(cfg));
  for (const auto& t : o.terms) {
    const auto n = counter.frequency(t);
    std::cout << t << '\t' << n << (n == 0 ? "\tout-of-corpus" : "") << '\n';
  }
  return 0;
}

evalrank::EvalReport build_report(const RunConfig& cfg, const Options& o) {
  if (o.candidate_files.empty()) throw ConfigError("at least one --candidates file is required");
  std::vector<evalrank::CandidateList> lists;
  for (const auto& f : o.candidate_files) {
    auto l = evalrank::load_candidate_lists(f);
    lists.insert(lists.end(), l.begin(), l.end());
  }
  const auto k = static_cast<std::size_t>(cfg.get_int("evaluate.top_k"));
  for (auto& l : lists) l = evalrank::take_top_k(l, k);
  const auto bench = evalrank::BenchmarkLexicon::load(cfg.get("paths.benchmark"));
  evalrank::ReportOptions ro;
  ro.overlap = cfg.get("evaluate.overlap") == "union" ? evalrank::OverlapDefinition::OverUnion
                                                      : evalrank::OverlapDefinition::OverWordModel;
  ro.frequency_terms = o.terms;
  std::optional<evalrank::TermCounter> counter;
  if (!o.terms.empty()) {
    std::vector<std::string> texts;
    for (const auto& r : load_corpus(cfg, o)) texts.push_back(r.text);
    counter = evalrank::TermCounter::from_texts(texts, lexicons(cfg));
  }
  const evalrank::TermCounter* cp = counter ? &*counter : nullptr;
  if (o.relevance == "curated") {
    return evalrank::compute_report(lists, evalrank::CuratedRelevance::load(cfg.get("paths.curated")), bench, cp, ro);
  }
  if (o.relevance == "heuristic") {
    const fs::path dir = cfg.get("paths.lexicons");
    const auto rel = evalrank::RelevanceLexicons::load((dir / "relevance_allow.txt").string(),
                                                       (dir / "relevance_stop.txt").string(), lexicons(cfg));
    return evalrank::compute_report(lists, rel, bench, cp, ro);
  }
  throw ConfigError("--relevance must be 'curated' or 'heuristic'");
}

int cmd_evaluate(const RunConfig& cfg, const Options& o) {
  const auto rep = build_report(cfg, o);
  for (const auto& m : rep.models) {
    std::cout << "model\t" << m.label << "\trelevant\t" << m.relevant << "\tbenchmark\t" << m.benchmark << "\trate\t"
              << format_fixed(m.rate, 3) << '\n';
  }
  std::cout << "bert_union_relevant\t" << rep.bert_union_relevant << '\n';
  std::cout << "bert_categories_covered\t" << rep.bert_categories_covered() << '\n';
  std::cout << "w2v_categories_missed\t";
  const auto missed = rep.categories_missed_by_w2v();
  for (std::size_t i = 0; i < missed.size(); ++i) std::cout << (i ? "," : "") << missed[i];
  std::cout << '\n';
  std::cout << "overlap\t" << rep.overlap_count << '/' << rep.overlap_denominator << '\t'
            << format_fixed(rep.overlap_rate, 3) << '\n';
  std::cout << "overlap_definition\t" << evalrank::describe(rep.overlap_definition) << '\n';
  for (const auto& f : rep.frequencies) {
    std::cout << "frequency\t" << f.term << '\t' << f.count << (f.out_of_corpus ? "\tout-of-corpus" : "") << '\n';
  }
  return 0;
}

int cmd_report(const RunConfig& cfg, const Options& o) {
  const auto rep = build_report(cfg, o);
  const auto out = or_default(o.out, output_dir(cfg) / "report");
  evalrank::export_report(rep, out);
  std::cerr << "report -> " << out << '\n';
  return 0;
}

int run_guarded(const std::function<int()>& f) {
  try {
    return f();
  } catch (const MissingArtifact& e) {
    std::cerr << "error\tmissing_artifact\t" << one_line(e.what()) << '\n';
    return kExitMissing;
  } catch (const ConfigError& e) {
    std::cerr << "error\tconfig\t" << one_line(e.what()) << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error\truntime\t" << one_line(e.what()) << '\n';
    return kExitRuntime;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chromate-replacement literature search toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("chromsearch ") + std::string(kArtifactVersion) +
                                        " (embeddings format " + std::to_string(embed::kEmbeddingFormatVersion) +
                                        ", checkpoint format " + std::to_string(mlm::kCheckpointVersion) + ")");
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "Key = value config file");
    sub->add_option("--set", o.assignments, "Config override key=value (repeatable)");
    auto key = [&o, sub](const std::string& flag, const std::string& k, const std::string& desc) {
      sub->add_option_function<std::string>(
          flag, [&o, k](const std::string& v) { o.flag_overrides.emplace_back(k, v); }, desc);
    };
    key("--seed", "seed", "Global seed");
    key("--workers", "workers", "Worker threads");
    return key;
  };

  auto* ingest = app.add_subcommand("ingest", "Fetch records from fixtures or the live search API");
  common(ingest);
  ingest->add_option("--source", o.source, "fixture or live")->check(CLI::IsMember({"fixture", "live"}));
  ingest->add_option("--fixture-dir", o.fixture_dir, "Directory of JSON-lines record files");
  ingest->add_option("--base-url", o.base_url, "Live API base URL");
  ingest->add_option("--query", o.query, "Search query");
  ingest->add_option("--pages", o.pages, "Page limit (live mode)");
  ingest->add_option("--out", o.out, "Raw records output file");

  auto* pre = app.add_subcommand("preprocess", "Filter and clean raw records into the corpus file");
  common(pre);
  pre->add_option("--in", o.in, "Directory of raw record files");
  pre->add_option("--out", o.out, "Corpus output file");

  auto* tw = app.add_subcommand("train-w2v", "Train skip-gram word embeddings");
  {
    auto key = common(tw);
    tw->add_option("--in", o.in, "Corpus file");
    tw->add_option("--out", o.out, "Embedding output file");
    key("--dim", "w2v.dim", "Embedding dimension");
    key("--epochs", "w2v.epochs", "Epochs");
    key("--learning-rate", "w2v.learning_rate", "Initial learning rate");
    key("--batch-size", "w2v.batch_size", "Pairs per update");
    key("--window", "w2v.window", "Context window");
    key("--negatives", "w2v.negatives", "Negative samples per pair");
    key("--min-count", "w2v.min_count", "Minimum word count");
  }

  auto* twp = app.add_subcommand("train-wordpiece", "Train the subword vocabulary");
  {
    auto key = common(twp);
    twp->add_option("--in", o.in, "Corpus file");
    twp->add_option("--out", o.out, "Vocabulary output file");
    key("--target-size", "wordpiece.target_size", "Target vocabulary size");
  }

  auto* tm = app.add_subcommand("train-mlm", "Train the masked-language-model encoder");
  {
    auto key = common(tm);
    tm->add_option("--in", o.in, "Corpus file");
    tm->add_option("--vocab", o.vocab, "Subword vocabulary file");
    tm->add_option("--out", o.out, "Checkpoint output file");
    key("--epochs", "train.epochs", "Epochs");
    key("--batch-size", "train.batch_size", "Sequences per step");
    key("--learning-rate", "train.learning_rate", "Adam learning rate");
    key("--layers", "mlm.layers", "Encoder layers");
    key("--hidden", "mlm.hidden", "Hidden size");
    key("--heads", "mlm.heads", "Attention heads");
  }

  auto* tuw = app.add_subcommand("tune-w2v", "Grid search for the embedding trainer (analogy score)");
  {
    auto key = common(tuw);
    tuw->add_option("--in", o.in, "Corpus file");
    tuw->add_option("--out", o.out, "Sweep log file");
    key("--grid", "tune.w2v_grid", "Grid, e.g. epochs=10,20;learning_rate=0.001,0.01");
  }

  auto* tum = app.add_subcommand("tune-mlm", "Grid search for the encoder (dev perplexity)");
  {
    auto key = common(tum);
    tum->add_option("--in", o.in, "Corpus file");
    tum->add_option("--vocab", o.vocab, "Subword vocabulary file");
    tum->add_option("--out", o.out, "Sweep log file");
    key("--grid", "tune.mlm_grid", "Grid, e.g. epochs=10,20,30;batch_size=16,32");
  }

  auto* sim = app.add_subcommand("similar", "Nearest neighbours of a word by cosine similarity");
  common(sim);
  sim->add_option("--word", o.word, "Query word")->required();
  sim->add_option("--k", o.k, "Number of neighbours");
  sim->add_option("--model", o.model, "Embedding file");
  sim->add_option("--label", o.label, "Model label for --candidates");
  sim->add_option("--candidates", o.candidates_out, "Also write a candidate-list CSV");

  auto* fm = app.add_subcommand("fill-mask", "Rank fillers for a [MASK] template");
  common(fm);
  fm->add_option("--template", o.tmpl, "Template with exactly one [MASK]");
  fm->add_option("--preset", o.preset, "Named template set (table1)");
  fm->add_option("--k", o.k, "Number of predictions");
  fm->add_option("--model", o.model, "Checkpoint file");
  fm->add_option("--vocab", o.vocab, "Subword vocabulary file");
  fm->add_option("--label", o.label, "Model label for --candidates");
  fm->add_option("--candidates", o.candidates_out, "Also write a candidate-list CSV");

  auto* fq = app.add_subcommand("frequency", "Corpus frequency of terms");
  common(fq);
  fq->add_option("--in", o.in, "Corpus file");
  fq->add_option("--term", o.terms, "Term (repeatable)")->required();

  auto add_eval = [&](CLI::App* sub) {
    auto key = common(sub);
    sub->add_option("--candidates", o.candidate_files, "Candidate-list CSV (repeatable)")->required();
    sub->add_option("--relevance", o.relevance, "curated or heuristic")
        ->check(CLI::IsMember({"curated", "heuristic"}));
    sub->add_option("--term", o.terms, "Report corpus frequency for this term (repeatable)");
    sub->add_option("--in", o.in, "Corpus file for --term");
    key("--overlap", "evaluate.overlap", "Overlap denominator: w2v or union");
    key("--top-k", "evaluate.top_k", "Entries kept per list");
  };
  auto* ev = app.add_subcommand("evaluate", "Relevance, benchmark and overlap metrics");
  add_eval(ev);
  auto* rp = app.add_subcommand("report", "Write figure CSVs for the evaluation");
  add_eval(rp);
  rp->add_option("--out", o.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error\tconfig\t" << one_line(e.what()) << '\n';
    return kExitConfig;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();

  RunConfig cfg;
  const int rc = run_guarded([&] {
    cfg = o.config_path.empty() ? RunConfig() : RunConfig::load(o.config_path);
    for (const auto& a : o.assignments) cfg.set_assignment(a);
    for (const auto& [k, v] : o.flag_overrides) cfg.set(k, v);
    cfg.validate();
    return 0;
  });
  if (rc != 0) return rc;
  std::cerr << "command=" << name << " seed=" << cfg.seed() << " config_hash=" << cfg.hash() << '\n';

  static const std::map<std::string, int (*)(const RunConfig&, const Options&)> commands = {
      {"ingest", cmd_ingest},       {"preprocess", cmd_preprocess}, {"train-w2v", cmd_train_w2v},
      {"train-wordpiece", cmd_train_wordpiece}, {"train-mlm", cmd_train_mlm}, {"tune-w2v", cmd_tune_w2v},
      {"tune-mlm", cmd_tune_mlm},   {"similar", cmd_similar},       {"fill-mask", cmd_fill_mask},
      {"frequency", cmd_frequency}, {"evaluate", cmd_evaluate},     {"report", cmd_report},
  };
  return run_guarded([&] { return commands.at(name)(cfg, o); });
}
