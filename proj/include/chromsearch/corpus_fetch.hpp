#pragma once

// Record acquisition. Fixture mode reads a directory of record files; live
// mode pages through a search endpoint over HTTP with a requests-per-second
// cap and bounded exponential backoff on transient failures.

#include <chrono>
#include <cstdlib>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "chromsearch/common.hpp"
#include "chromsearch/corpus.hpp"

namespace chromsearch::corpus {

enum class SourceMode { Live, Fixture };

struct SourceConfig {
  SourceMode mode = SourceMode::Fixture;
  std::string fixture_dir;

  std::string base_url;             // scheme://host[:port]
  std::string search_path = "/content/search/scopus";
  std::string api_key_env = "SCOPUS_API_KEY";
  std::string api_key_header = "X-ELS-APIKey";
  double requests_per_second = 2.0;
  int page_size = 25;
  int max_retries = 4;
  std::chrono::milliseconds backoff_initial{500};
  std::chrono::milliseconds backoff_max{8000};
  std::chrono::seconds timeout{30};

  // Injected so tests can observe waits without sleeping.
  std::function<void(std::chrono::milliseconds)> sleep = [](std::chrono::milliseconds d) {
    std::this_thread::sleep_for(d);
  };
};

namespace detail {

inline std::string json_string(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) return {};
  const auto& v = j[key];
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array() && !v.empty() && v[0].is_object() && v[0].contains("$")) return v[0]["$"].get<std::string>();
  return {};
}

inline DocumentRecord record_from_entry(const nlohmann::json& e) {
  DocumentRecord r;
  r.source = RecordSource::LiveApi;
  r.id = json_string(e, "dc:identifier");
  if (r.id.empty()) r.id = json_string(e, "eid");
  r.title = json_string(e, "dc:title");
  r.abstract = json_string(e, "dc:description");
  const auto kw = json_string(e, "authkeywords");
  for (auto& k : split_char(kw, '|')) {
    auto t = trim(k);
    if (!t.empty()) r.keywords.emplace_back(t);
  }
  const auto lang = json_string(e, "language");
  r.language = lang.empty() ? "unknown" : lang;
  r.content_type = parse_content_type(json_string(e, "subtypeDescription"));
  return r;
}

inline bool is_transient(int status) { return status == 429 || status == 408 || status >= 500; }

}  // namespace detail

class LiveClient {
 public:
  explicit LiveClient(SourceConfig cfg) : cfg_(std::move(cfg)) {
    const char* key = std::getenv(cfg_.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
      throw ConfigError("live mode needs a credential in environment variable " + cfg_.api_key_env);
    }
    key_ = key;
    if (cfg_.base_url.empty()) throw ConfigError("live mode needs base_url");
    if (cfg_.requests_per_second <= 0.0) throw ConfigError("requests_per_second must be > 0");
    if (cfg_.page_size <= 0) throw ConfigError("page_size must be > 0");
  }

  // Calls `sink` for every record on up to `page_limit` pages.
  void fetch(const std::string& query, int page_limit, const std::function<void(DocumentRecord)>& sink) {
    std::string cursor = "*";
    for (int page = 0; page < page_limit; ++page) {
      const auto body = get_page(query, cursor);
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(body);
      } catch (const nlohmann::json::exception& e) {
        throw ParseError("page " + std::to_string(page) + ": " + e.what());
      }
      const auto& results = j.contains("search-results") ? j["search-results"] : j;
      if (!results.contains("entry") || !results["entry"].is_array() || results["entry"].empty()) return;
      for (const auto& e : results["entry"]) {
        auto r = detail::record_from_entry(e);
        if (!r.id.empty()) sink(std::move(r));
      }
      std::string next;
      if (results.contains("cursor") && results["cursor"].contains("@next")) {
        next = results["cursor"]["@next"].get<std::string>();
      }
      if (next.empty() || next == cursor) return;
      cursor = next;
    }
  }

  int requests_made() const { return requests_; }

 private:
  std::string get_page(const std::string& query, const std::string& cursor) {
    httplib::Client cli(cfg_.base_url);
    cli.set_connection_timeout(cfg_.timeout);
    cli.set_read_timeout(cfg_.timeout);
    const httplib::Params params{{"query", query},
                                 {"count", std::to_string(cfg_.page_size)},
                                 {"cursor", cursor},
                                 {"view", "COMPLETE"}};
    const httplib::Headers headers{{cfg_.api_key_header, key_}, {"Accept", "application/json"}};
    auto backoff = cfg_.backoff_initial;
    for (int attempt = 0;; ++attempt) {
      throttle();
      auto res = cli.Get(cfg_.search_path, params, headers);
      ++requests_;
      if (res && res->status == 200) return res->body;
      const bool transient = !res || detail::is_transient(res->status);
      if (!transient || attempt >= cfg_.max_retries) {
        const std::string why = res ? "HTTP " + std::to_string(res->status) : httplib::to_string(res.error());
        throw Error("fetch failed after " + std::to_string(attempt + 1) + " attempt(s): " + why);
      }
      cfg_.sleep(backoff);
      backoff = std::min(cfg_.backoff_max, backoff * 2);
    }
  }

  void throttle() {
    using clock = std::chrono::steady_clock;
    const auto gap = std::chrono::duration_cast<clock::duration>(
        std::chrono::duration<double>(1.0 / cfg_.requests_per_second));
    const auto now = clock::now();
    if (last_ && now - *last_ < gap) {
      cfg_.sleep(std::chrono::ceil<std::chrono::milliseconds>(gap - (now - *last_)));
    }
    last_ = clock::now();
  }

  SourceConfig cfg_;
  std::string key_;
  std::optional<std::chrono::steady_clock::time_point> last_;
  int requests_ = 0;
};

inline std::vector<DocumentRecord> fetch_records(const SourceConfig& cfg, const std::string& query,
                                                 int page_limit) {
  if (cfg.mode == SourceMode::Fixture) return read_fixture_dir(cfg.fixture_dir);
  std::vector<DocumentRecord> out;
  LiveClient client(cfg);
  client.fetch(query, page_limit, [&](DocumentRecord r) { out.push_back(std::move(r)); });
  return out;
}

}  // namespace chromsearch::corpus
