#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <thread>

#include "chromsearch/corpus.hpp"
#include "chromsearch/corpus_fetch.hpp"
#include "test_util.hpp"

using namespace chromsearch;
using namespace chromsearch::corpus;

namespace {

std::string long_text(const std::string& head) {
  return head +
         " The coatings were tested on aluminium alloy panels in neutral salt spray and by impedance spectroscopy, "
         "and the results of this study show that the replacement gives comparable protection to the chromate "
         "reference for the substrates considered here.";
}

DocumentRecord good_record(const std::string& id) {
  DocumentRecord r;
  r.id = id;
  r.title = "Chromate replacement coatings";
  r.abstract = long_text("A cerium conversion layer was studied.");
  r.language = "en";
  r.content_type = ContentType::Article;
  return r;
}

}  // namespace

TEST(CleanText, Examples) {
  EXPECT_EQ(clean_text("<p>Abstract We study coatings.</p>"), "We study coatings.");
  EXPECT_EQ(clean_text("plain text stays"), "plain text stays");
  EXPECT_EQ(clean_text("&quot;chromate&quot;"), "\"chromate\"");
  EXPECT_EQ(clean_text("a &amp; b &lt;x&gt; &apos;q&apos;"), "a & b 'q'");
  EXPECT_EQ(clean_text("1 &lt; 2"), "1 < 2");
  EXPECT_EQ(clean_text("a<br/>b"), "a b");
  EXPECT_EQ(clean_text("Abstract: Results"), "Results");
  EXPECT_EQ(clean_text("  many \n\t spaces  "), "many spaces");
  EXPECT_EQ(clean_text("&#67;e and &#x5A;n"), "Ce and Zn");
  EXPECT_EQ(clean_text("H<inf>2</inf>O and Cr<sup>6+</sup>"), "H2O and Cr6+");
  EXPECT_EQ(clean_text("text <unclosed tag"), "text");
}

TEST(CleanText, Idempotent) {
  const std::vector<std::string> samples = {
      "<p>Abstract &lt;b&gt;bold&lt;/b&gt; &amp;amp; more</p>", "Abstract Abstract twice", "&amp;quot;x&amp;quot;",
      "  <a href='x'>link</a>  text ", "a < b and c > d", "Abstract. - Dash"};
  for (const auto& s : samples) {
    const auto once = clean_text(s);
    EXPECT_EQ(clean_text(once), once) << s;
  }
}

TEST(Filter, Examples) {
  const auto spec = FilterSpec::chromate_default();
  const auto lex = chemtok::Lexicons::builtin();
  EXPECT_TRUE(passes_filter(good_record("1"), spec, lex));

  auto german = good_record("2");
  german.language = "de";
  EXPECT_FALSE(passes_filter(german, spec, lex));

  auto no_substrate = good_record("3");
  no_substrate.abstract =
      "Chromate replacement was examined for a polymer film on glass, with attention to long term durability of "
      "the film under ultraviolet exposure and humidity cycling in a climate chamber over several months of "
      "testing and repeated measurement of gloss and colour.";
  EXPECT_FALSE(passes_filter(no_substrate, spec, lex));

  auto short_abs = good_record("4");
  short_abs.abstract = "Chromate replaced on zinc.";
  EXPECT_FALSE(passes_filter(short_abs, spec, lex));

  auto blocked = good_record("5");
  blocked.abstract = long_text("Copyright 2020 the publisher.");
  EXPECT_FALSE(passes_filter(blocked, spec, lex));

  auto erratum = good_record("6");
  erratum.content_type = ContentType::Other;
  EXPECT_FALSE(passes_filter(erratum, spec, lex));

  auto tagged = good_record("7");
  tagged.language = "en-GB";
  EXPECT_TRUE(passes_filter(tagged, spec, lex));

  auto unknown = good_record("8");
  unknown.language = "unknown";
  EXPECT_TRUE(passes_filter(unknown, spec, lex));
}

TEST(Filter, WildcardRules) {
  EXPECT_TRUE(pattern_matches("chrom*", match_tokens("Chromium-free")));
  EXPECT_FALSE(pattern_matches("chrom*", match_tokens("achromatic")));
  EXPECT_TRUE(pattern_matches("zinc", match_tokens("ZINC coated")));
  EXPECT_FALSE(pattern_matches("zinc", match_tokens("zincate")));
  FilterSpec bad = FilterSpec::chromate_default();
  bad.substrate_terms.push_back("*oy");
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Filter, MonotoneAndOrderPreserving) {
  const auto lex = chemtok::Lexicons::builtin();
  auto recs = read_fixture_dir(testutil::data("fixtures/records"));
  std::vector<DocumentRecord> cleaned;
  for (auto r : recs) cleaned.push_back(clean_record(r));
  const auto spec = FilterSpec::chromate_default();
  const auto base = filter_records(cleaned, spec, lex, 1);
  EXPECT_LT(base.size(), cleaned.size());
  for (unsigned w : {2u, 3u, 8u}) {
    const auto par = filter_records(cleaned, spec, lex, w);
    ASSERT_EQ(par.size(), base.size());
    for (std::size_t i = 0; i < par.size(); ++i) EXPECT_EQ(par[i].id, base[i].id);
  }
  auto extended = cleaned;
  extended.insert(extended.begin() + 3, good_record("extra"));
  const auto more = filter_records(extended, spec, lex, 1);
  for (const auto& r : base) {
    EXPECT_TRUE(std::any_of(more.begin(), more.end(), [&](const auto& m) { return m.id == r.id; }));
  }
}

TEST(Fixtures, LexicographicOrderAndErrors) {
  testutil::TempDir d;
  auto line = [](const std::string& id) { return R"({"id":")" + id + R"(","abstract":"x"})" "\n"; };
  testutil::write_file(d.file("b.jsonl"), line("B"));
  testutil::write_file(d.file("a.jsonl"), line("A"));
  testutil::write_file(d.file("c.jsonl"), line("C"));
  SourceConfig src;
  src.fixture_dir = d.path().string();
  const auto recs = fetch_records(src, "q", 1);
  ASSERT_EQ(recs.size(), 3u);
  EXPECT_EQ(recs[0].id, "A");
  EXPECT_EQ(recs[1].id, "B");
  EXPECT_EQ(recs[2].id, "C");

  testutil::write_file(d.file("d.jsonl"), line("D") + R"({"id":"E","title":"no abstract"})" "\n");
  try {
    read_fixture_dir(d.path());
    FAIL();
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("d.jsonl:2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("abstract"), std::string::npos) << msg;
  }
  testutil::write_file(d.file("d.jsonl"), "{not json\n");
  EXPECT_THROW(read_fixture_dir(d.path()), ParseError);
  EXPECT_THROW(read_fixture_dir(d.file("missing")), MissingArtifact);
}

TEST(CorpusFile, DedupAndRoundTrip) {
  testutil::TempDir d;
  const auto res = write_corpus({{"x", "first"}, {"x", "second"}}, d.file("c.jsonl"));
  EXPECT_EQ(res.written, 1u);
  EXPECT_EQ(res.duplicates, 1u);
  const auto back = read_corpus(d.file("c.jsonl"));
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].text, "first");

  EXPECT_EQ(write_corpus({}, d.file("empty.jsonl")).written, 0u);
  EXPECT_TRUE(read_corpus(d.file("empty.jsonl")).empty());

  Rng rng(5);
  std::vector<CorpusRecord> recs;
  for (int i = 0; i < 100; ++i) {
    std::string text;
    for (int k = 0; k < 20; ++k) text += static_cast<char>(' ' + rng.below(95));
    text += " \"quoted\" \\ ü ₃";
    recs.push_back({"id" + std::to_string(i), text});
  }
  write_corpus(recs, d.file("a.jsonl"));
  write_corpus(recs, d.file("b.jsonl"));
  EXPECT_EQ(testutil::read_file(d.file("a.jsonl")), testutil::read_file(d.file("b.jsonl")));
  const auto rt = read_corpus(d.file("a.jsonl"));
  ASSERT_EQ(rt.size(), recs.size());
  for (std::size_t i = 0; i < rt.size(); ++i) {
    EXPECT_EQ(rt[i].id, recs[i].id);
    EXPECT_EQ(rt[i].text, recs[i].text);
  }
  EXPECT_EQ(testutil::read_file(d.file("a.jsonl")).substr(0, 7), "{\"id\":\"");
}

TEST(LiveClient, MissingCredentialIsConfigError) {
  SourceConfig cfg;
  cfg.mode = SourceMode::Live;
  cfg.base_url = "http://127.0.0.1:1";
  cfg.api_key_env = "CHROMSEARCH_TEST_UNSET_KEY";
  ::unsetenv("CHROMSEARCH_TEST_UNSET_KEY");
  EXPECT_THROW(fetch_records(cfg, "q", 1), ConfigError);
}

TEST(LiveClient, PagingRetriesAndRateCap) {
  httplib::Server server;
  std::atomic<int> hits{0};
  std::string seen_key;
  server.Get("/content/search/scopus", [&](const httplib::Request& req, httplib::Response& res) {
    const int n = hits++;
    seen_key = req.get_header_value("X-ELS-APIKey");
    if (n == 0) {
      res.status = 503;
      return;
    }
    const auto cursor = req.get_param_value("cursor");
    nlohmann::json body;
    if (cursor == "*") {
      body["search-results"]["entry"] = {{{"dc:identifier", "SCOPUS_ID:1"},
                                          {"dc:title", "T1"},
                                          {"dc:description", "A1"},
                                          {"authkeywords", "chromate | zinc"},
                                          {"language", "eng"},
                                          {"subtypeDescription", "Article"}},
                                         {{"eid", "2-s2.0-2"}, {"dc:title", "T2"}, {"dc:description", "A2"}}};
      body["search-results"]["cursor"]["@next"] = "page2";
    } else if (cursor == "page2") {
      body["search-results"]["entry"] = {{{"dc:identifier", "SCOPUS_ID:3"}, {"dc:description", "A3"}}};
      body["search-results"]["cursor"]["@next"] = "page3";
    } else {
      body["search-results"]["entry"] = nlohmann::json::array();
    }
    res.set_content(body.dump(), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  ::setenv("CHROMSEARCH_TEST_KEY", "secret", 1);
  SourceConfig cfg;
  cfg.mode = SourceMode::Live;
  cfg.base_url = "http://127.0.0.1:" + std::to_string(port);
  cfg.api_key_env = "CHROMSEARCH_TEST_KEY";
  cfg.requests_per_second = 1000.0;
  std::vector<std::chrono::milliseconds> sleeps;
  cfg.sleep = [&](std::chrono::milliseconds d) { sleeps.push_back(d); };
  const auto recs = fetch_records(cfg, "TITLE-ABS-KEY(chromate)", 10);
  server.stop();
  th.join();

  ASSERT_EQ(recs.size(), 3u);
  EXPECT_EQ(recs[0].id, "SCOPUS_ID:1");
  EXPECT_EQ(recs[0].keywords, (std::vector<std::string>{"chromate", "zinc"}));
  EXPECT_EQ(recs[1].id, "2-s2.0-2");
  EXPECT_EQ(recs[1].language, "unknown");
  EXPECT_EQ(recs[2].id, "SCOPUS_ID:3");
  EXPECT_EQ(seen_key, "secret");
  EXPECT_EQ(hits.load(), 4);  // one 503, three pages (the last empty)
  ASSERT_FALSE(sleeps.empty());
  EXPECT_EQ(std::count(sleeps.begin(), sleeps.end(), std::chrono::milliseconds(500)), 1);
}

TEST(LiveClient, GivesUpAfterBoundedRetries) {
  httplib::Server server;
  std::atomic<int> hits{0};
  server.Get("/content/search/scopus", [&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    res.status = 429;
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  ::setenv("CHROMSEARCH_TEST_KEY", "secret", 1);
  SourceConfig cfg;
  cfg.mode = SourceMode::Live;
  cfg.base_url = "http://127.0.0.1:" + std::to_string(port);
  cfg.api_key_env = "CHROMSEARCH_TEST_KEY";
  cfg.requests_per_second = 1000.0;
  cfg.max_retries = 5;
  std::vector<long long> backoffs;
  cfg.sleep = [&](std::chrono::milliseconds d) {
    if (d.count() >= 500) backoffs.push_back(d.count());
  };
  EXPECT_THROW(fetch_records(cfg, "q", 1), Error);
  server.stop();
  th.join();
  EXPECT_EQ(hits.load(), 6);
  EXPECT_EQ(backoffs, (std::vector<long long>{500, 1000, 2000, 4000, 8000}));
}
