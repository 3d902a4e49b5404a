#pragma once

// Grid search over named hyperparameter axes and the hash-based dev split.

#include <chrono>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "chromsearch/common.hpp"

namespace chromsearch::tune {

// ---------------------------------------------------------------------------
// dev split

// Record i goes to dev iff a seeded hash of its id falls below `fraction`,
// so membership does not depend on corpus order.
inline bool in_dev(std::string_view id, double fraction, std::uint64_t seed) {
  const std::uint64_t h = splitmix64(fnv1a64(id, derive_seed(seed, "split")));
  return static_cast<double>(h >> 11) * 0x1.0p-53 < fraction;
}

template <class Record, class IdOf>
std::pair<std::vector<Record>, std::vector<Record>> make_dev_split(const std::vector<Record>& records, double fraction,
                                                                   std::uint64_t seed, IdOf&& id_of) {
  if (records.empty()) throw ConfigError("cannot split an empty corpus");
  if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("dev fraction must be in (0,1)");
  std::pair<std::vector<Record>, std::vector<Record>> out;
  for (const auto& r : records) {
    (in_dev(id_of(r), fraction, seed) ? out.first : out.second).push_back(r);
  }
  return out;
}

// ---------------------------------------------------------------------------
// grid

struct Axis {
  std::string name;
  std::vector<double> values;
};

struct GridSpec {
  std::vector<Axis> axes;

  void validate() const {
    if (axes.empty()) throw ConfigError("grid has no axes");
    for (const auto& a : axes) {
      if (a.name.empty()) throw ConfigError("grid axis without a name");
      if (a.values.empty()) throw ConfigError("grid axis '" + a.name + "' is empty");
    }
  }

  std::size_t trial_count() const {
    std::size_t n = 1;
    for (const auto& a : axes) n *= a.values.size();
    return n;
  }

  // Lexicographic order: the first axis varies slowest.
  std::map<std::string, double> cell(std::size_t index) const {
    std::map<std::string, double> p;
    for (std::size_t k = axes.size(); k-- > 0;) {
      const auto& a = axes[k];
      p[a.name] = a.values[index % a.values.size()];
      index /= a.values.size();
    }
    return p;
  }

  // epochs {10,20,30} x batch_size {16,32} x learning_rate {1e-5,1e-4,1e-3}
  static GridSpec reference_mlm() {
    return {{{"epochs", {10, 20, 30}}, {"batch_size", {16, 32}}, {"learning_rate", {1e-5, 1e-4, 1e-3}}}};
  }
};

// "epochs=10,20,30;batch_size=16,32"
inline GridSpec parse_grid(std::string_view text) {
  GridSpec g;
  for (const auto& part : split_char(text, ';')) {
    const auto t = trim(part);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) throw ConfigError("grid axis needs name=values: " + std::string(t));
    Axis a{std::string(trim(t.substr(0, eq))), {}};
    for (const auto& v : split_char(t.substr(eq + 1), ',')) a.values.push_back(parse_double(v, a.name));
    g.axes.push_back(std::move(a));
  }
  g.validate();
  return g;
}

enum class Direction { Minimize, Maximize };
enum class ObjectiveKind { AnalogyScoreMax, PerplexityMin };

inline std::string_view to_string(ObjectiveKind k) {
  return k == ObjectiveKind::AnalogyScoreMax ? "analogy_score_max" : "perplexity_min";
}

struct TrialResult {
  std::size_t index = 0;
  std::map<std::string, double> params;
  double objective = 0.0;
  bool ok = false;
  std::string error;
  double wall_time_seconds = 0.0;
};

struct SearchResult {
  TrialResult best;
  std::vector<TrialResult> trials;  // in trial-index order
};

// Runs every cell exactly once. Failed trials (exception or non-finite
// objective) are logged and skipped; ties keep the earlier trial.
template <class TrainFn, class EvalFn>
SearchResult grid_search(const GridSpec& grid, TrainFn&& train_fn, EvalFn&& eval_fn, Direction dir,
                         unsigned workers = 1) {
  grid.validate();
  const std::size_t n = grid.trial_count();
  std::vector<TrialResult> trials(n);
  auto run = [&](std::size_t i) {
    auto& tr = trials[i];
    tr.index = i;
    tr.params = grid.cell(i);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      auto model = train_fn(tr.params);
      tr.objective = static_cast<double>(eval_fn(model, tr.params));
      tr.ok = std::isfinite(tr.objective);
      if (!tr.ok) tr.error = "objective not finite";
    } catch (const std::exception& e) {
      tr.ok = false;
      tr.error = e.what();
    }
    tr.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  workers = std::max(1u, workers);
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) run(i);
  } else {
    std::mutex mu;
    std::size_t next = 0;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          std::size_t i;
          {
            std::lock_guard lock(mu);
            if (next >= n) return;
            i = next++;
          }
          run(i);
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  SearchResult res;
  res.trials = std::move(trials);
  const TrialResult* best = nullptr;
  for (const auto& t : res.trials) {
    if (!t.ok) continue;
    if (best == nullptr || (dir == Direction::Minimize ? t.objective < best->objective : t.objective > best->objective)) {
      best = &t;
    }
  }
  if (best == nullptr) throw Error("grid search: every trial failed");
  res.best = *best;
  return res;
}

inline std::string csv_escape(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// trial_index, one column per axis, objective, status, wall_time_seconds
inline void write_sweep_log(const GridSpec& grid, const SearchResult& res, const std::string& path,
                            bool include_wall_time = true) {
  auto os = open_output(path, true);
  os << "trial_index";
  for (const auto& a : grid.axes) os << ',' << a.name;
  os << ",objective,status,wall_time_seconds\n";
  for (const auto& t : res.trials) {
    os << t.index;
    for (const auto& a : grid.axes) os << ',' << format_number(t.params.at(a.name));
    os << ',' << (t.ok ? format_number(t.objective) : std::string()) << ','
       << (t.ok ? std::string("ok") : csv_escape("failed: " + t.error)) << ','
       << (include_wall_time ? format_fixed(t.wall_time_seconds, 3) : std::string("0")) << '\n';
  }
  if (!os) throw IoError("write failed: " + path);
}

// One row per (row_axis, col_axis) cell; other axes become a "slice" label
// so each slice can be drawn as its own panel.
inline void write_heatmap_csv(const GridSpec& grid, const SearchResult& res, const std::string& row_axis,
                              const std::string& col_axis, const std::string& path) {
  auto os = open_output(path, true);
  os << "slice," << row_axis << ',' << col_axis << ",objective\n";
  for (const auto& t : res.trials) {
    std::string slice;
    for (const auto& a : grid.axes) {
      if (a.name == row_axis || a.name == col_axis) continue;
      if (!slice.empty()) slice += ';';
      slice += a.name + "=" + format_number(t.params.at(a.name));
    }
    os << csv_escape(slice) << ',' << format_number(t.params.at(row_axis)) << ','
       << format_number(t.params.at(col_axis)) << ',' << (t.ok ? format_number(t.objective) : std::string()) << '\n';
  }
  if (!os) throw IoError("write failed: " + path);
}

}  // namespace chromsearch::tune
