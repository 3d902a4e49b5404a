#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "chromsearch/tune.hpp"
#include "test_util.hpp"

using namespace chromsearch;
using namespace chromsearch::tune;

namespace {

std::vector<std::string> ids(std::size_t n) {
  std::vector<std::string> v;
  for (std::size_t i = 0; i < n; ++i) v.push_back("2-s2.0-" + std::to_string(85000000000ULL + i * 7919));
  return v;
}

auto self = [](const std::string& s) -> const std::string& { return s; };

}  // namespace

TEST(DevSplit, PartitionWithExpectedSize) {
  const auto all = ids(5000);
  const auto [dev, train] = make_dev_split(all, 0.1, 42, self);
  EXPECT_EQ(dev.size() + train.size(), all.size());
  std::set<std::string> d(dev.begin(), dev.end());
  for (const auto& t : train) EXPECT_FALSE(d.count(t));
  EXPECT_NEAR(static_cast<double>(dev.size()) / all.size(), 0.1, 0.015);
}

TEST(DevSplit, IndependentOfOrder) {
  auto all = ids(1000);
  const auto [dev1, train1] = make_dev_split(all, 0.2, 7, self);
  std::reverse(all.begin(), all.end());
  const auto [dev2, train2] = make_dev_split(all, 0.2, 7, self);
  EXPECT_EQ(std::set<std::string>(dev1.begin(), dev1.end()), std::set<std::string>(dev2.begin(), dev2.end()));
  // Adding records does not move existing ones.
  auto more = ids(1200);
  const auto [dev3, train3] = make_dev_split(more, 0.2, 7, self);
  std::set<std::string> d3(dev3.begin(), dev3.end());
  for (const auto& x : dev1) EXPECT_TRUE(d3.count(x));
}

TEST(DevSplit, SeedChangesMembership) {
  const auto all = ids(500);
  EXPECT_NE(make_dev_split(all, 0.5, 1, self).first, make_dev_split(all, 0.5, 2, self).first);
}

TEST(DevSplit, Errors) {
  EXPECT_THROW(make_dev_split(std::vector<std::string>{}, 0.1, 1, self), ConfigError);
  EXPECT_THROW(make_dev_split(ids(3), 0.0, 1, self), ConfigError);
  EXPECT_THROW(make_dev_split(ids(3), 1.0, 1, self), ConfigError);
}

TEST(Grid, ReferenceOrderFirstAxisSlowest) {
  const auto g = GridSpec::reference_mlm();
  ASSERT_EQ(g.trial_count(), 18u);
  EXPECT_EQ(g.cell(0), (std::map<std::string, double>{{"epochs", 10}, {"batch_size", 16}, {"learning_rate", 1e-5}}));
  EXPECT_EQ(g.cell(1), (std::map<std::string, double>{{"epochs", 10}, {"batch_size", 16}, {"learning_rate", 1e-4}}));
  EXPECT_EQ(g.cell(3), (std::map<std::string, double>{{"epochs", 10}, {"batch_size", 32}, {"learning_rate", 1e-5}}));
  EXPECT_EQ(g.cell(17), (std::map<std::string, double>{{"epochs", 30}, {"batch_size", 32}, {"learning_rate", 1e-3}}));
  std::set<std::map<std::string, double>> cells;
  for (std::size_t i = 0; i < 18; ++i) cells.insert(g.cell(i));
  EXPECT_EQ(cells.size(), 18u);
}

TEST(Grid, Parse) {
  const auto g = parse_grid("epochs=10,20,30;batch_size=16,32;learning_rate=1e-5,1e-4,1e-3");
  const auto ref = GridSpec::reference_mlm();
  ASSERT_EQ(g.axes.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(g.axes[i].name, ref.axes[i].name);
    EXPECT_EQ(g.axes[i].values, ref.axes[i].values);
  }
  EXPECT_THROW(parse_grid(""), ConfigError);
  EXPECT_THROW(parse_grid("epochs"), ConfigError);
  EXPECT_THROW(parse_grid("epochs="), Error);
  EXPECT_THROW(parse_grid("epochs=ten"), Error);
}

TEST(Search, FindsRiggedOptimumAndRunsEachCellOnce) {
  const auto g = GridSpec::reference_mlm();
  std::multiset<std::map<std::string, double>> seen;
  auto train = [&](const std::map<std::string, double>& p) {
    seen.insert(p);
    return p;
  };
  // minimum at epochs 20, batch 32, lr 1e-4
  auto eval = [](const std::map<std::string, double>& m, const std::map<std::string, double>&) {
    return std::abs(m.at("epochs") - 20) + std::abs(m.at("batch_size") - 32) +
           std::abs(std::log10(m.at("learning_rate")) + 4);
  };
  const auto r = grid_search(g, train, eval, Direction::Minimize);
  EXPECT_EQ(seen.size(), 18u);
  for (std::size_t i = 0; i < 18; ++i) EXPECT_EQ(seen.count(g.cell(i)), 1u);
  EXPECT_EQ(r.best.params.at("epochs"), 20);
  EXPECT_EQ(r.best.params.at("batch_size"), 32);
  EXPECT_EQ(r.best.params.at("learning_rate"), 1e-4);
  ASSERT_EQ(r.trials.size(), 18u);
  for (std::size_t i = 0; i < 18; ++i) EXPECT_EQ(r.trials[i].index, i);

  const auto par = grid_search(g, [](const auto& p) { return p; }, eval, Direction::Minimize, 4);
  EXPECT_EQ(par.best.index, r.best.index);
}

TEST(Search, MaximizeAndTiesKeepEarlier) {
  const GridSpec g{{{"x", {1, 2, 3, 4}}}};
  auto train = [](const auto& p) { return p.at("x"); };
  const auto r = grid_search(g, train, [](double x, const auto&) { return x >= 3 ? 10.0 : x; }, Direction::Maximize);
  EXPECT_EQ(r.best.index, 2u);
}

TEST(Search, FailedTrialsAreSkipped) {
  const GridSpec g{{{"x", {1, 2, 3}}}};
  auto train = [](const auto& p) {
    if (p.at("x") == 1) throw NumericError("diverged");
    return p.at("x");
  };
  auto eval = [](double x, const auto&) { return x == 2 ? std::nan("") : x; };
  const auto r = grid_search(g, train, eval, Direction::Minimize);
  EXPECT_FALSE(r.trials[0].ok);
  EXPECT_EQ(r.trials[0].error, "diverged");
  EXPECT_FALSE(r.trials[1].ok);
  EXPECT_EQ(r.best.index, 2u);
  EXPECT_THROW(grid_search(g, [](const auto&) -> double { throw Error("x"); }, eval, Direction::Minimize), Error);

  testutil::TempDir dir;
  write_sweep_log(g, r, dir.file("s.csv"), false);
  EXPECT_EQ(testutil::read_file(dir.file("s.csv")),
            "trial_index,x,objective,status,wall_time_seconds\n"
            "0,1,,failed: diverged,0\n"
            "1,2,,failed: objective not finite,0\n"
            "2,3,3,ok,0\n");
}

TEST(Search, HeatmapSlices) {
  const auto g = GridSpec::reference_mlm();
  const auto r = grid_search(g, [](const auto& p) { return p; },
                             [](const auto& p, const auto&) { return p.at("epochs") + p.at("batch_size"); },
                             Direction::Minimize);
  testutil::TempDir dir;
  write_heatmap_csv(g, r, "batch_size", "learning_rate", dir.file("h.csv"));
  const auto text = testutil::read_file(dir.file("h.csv"));
  const auto lines = split_char(text, '\n');
  EXPECT_EQ(lines[0], "slice,batch_size,learning_rate,objective");
  EXPECT_EQ(lines[1], "epochs=10,16,1e-05,26");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 19);
}
