#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "spinmarket/market.hpp"

using namespace spinmarket;

namespace {

std::vector<Spin> random_spins(std::mt19937_64& gen, std::size_t n) {
  std::uniform_int_distribution<int> d(-1, 1);
  std::vector<Spin> s(n);
  for (auto& v : s) v = static_cast<Spin>(d(gen));
  return s;
}

}  // namespace

TEST(ExcessDemand, Examples) {
  const std::vector<Spin> a{1, 0, -1, 0};
  EXPECT_EQ(excess_demand(a, a), 0);
  EXPECT_EQ(trading_volume(a, a), 0);

  const std::vector<Spin> b{1, 0, 1, 0};
  EXPECT_EQ(excess_demand(a, b), 2);

  // M from 0.25 to 0.5 on four agents.
  const std::vector<Spin> m25{1, 0, 0, 0};
  const std::vector<Spin> m50{1, 1, 0, 0};
  EXPECT_EQ(excess_demand(m25, m50), 1);

  const std::vector<Spin> three{1, 0, 0};
  EXPECT_THROW(excess_demand(a, three), std::invalid_argument);
  EXPECT_THROW(trading_volume(a, three), std::invalid_argument);
  EXPECT_THROW(compare_snapshots(a, three), std::invalid_argument);
}

TEST(TradingVolume, OpposingTradesCancelInDemandButNotVolume) {
  const std::vector<Spin> prev{-1, 1, 0};
  const std::vector<Spin> next{1, -1, 0};
  EXPECT_EQ(excess_demand(prev, next), 0);
  EXPECT_EQ(trading_volume(prev, next), 4);
}

TEST(CompareSnapshots, InvariantsOnRandomSnapshots) {
  std::mt19937_64 gen(11);
  for (int k = 0; k < 2000; ++k) {
    const auto prev = random_spins(gen, 64);
    const auto next = random_spins(gen, 64);
    const SnapshotDelta d = compare_snapshots(prev, next);
    std::int64_t sum_prev = 0;
    std::int64_t sum_next = 0;
    for (auto s : prev) sum_prev += s;
    for (auto s : next) sum_next += s;
    ASSERT_EQ(d.excess_demand, sum_next - sum_prev);
    ASSERT_EQ(d.excess_demand, excess_demand(prev, next));
    ASSERT_EQ(d.volume, trading_volume(prev, next));
    ASSERT_GE(d.volume, std::abs(d.excess_demand));
    ASSERT_EQ((d.volume - d.excess_demand) % 2, 0);
    ASSERT_EQ(d.crafty_violations, 0);
  }
}

TEST(StepLogPrice, Examples) {
  EXPECT_DOUBLE_EQ(step_log_price(0.7, 0, 1024), 0.7);
  EXPECT_DOUBLE_EQ(step_log_price(0.0, 2 * 1024, 1024), 2.0);
  EXPECT_DOUBLE_EQ(step_log_price(1.0, -512, 1024), 0.5);
  EXPECT_THROW(step_log_price(0.0, 1, 0), std::invalid_argument);
  EXPECT_THROW(step_log_price(0.0, 1, -3), std::invalid_argument);
}

TEST(StepLogPrice, TelescopesToMagnetizationChange) {
  std::mt19937_64 gen(5);
  constexpr std::int64_t n = 1024;
  std::uniform_int_distribution<std::int64_t> sums(-n, n);
  std::int64_t s0 = sums(gen);
  std::int64_t s = s0;
  double lp = 0.0;
  for (int t = 0; t < 10000; ++t) {
    const std::int64_t next = sums(gen);
    lp = step_log_price(lp, next - s, n);
    s = next;
  }
  const double expected = static_cast<double>(s - s0) / static_cast<double>(n);
  EXPECT_NEAR(lp, expected, 1e-9);
}

TEST(SHLogPrice, IsMagnetization) {
  EXPECT_EQ(sh_log_price(0.25), 0.25);
  EXPECT_EQ(sh_log_price(-1.0), -1.0);
  static_assert(sh_log_price(0.5) == 0.5);
}

TEST(PriceMode, ParseAndPrint) {
  EXPECT_EQ(parse_price_mode("sh"), PriceMode::SHBaseline);
  EXPECT_EQ(parse_price_mode("sh_baseline"), PriceMode::SHBaseline);
  EXPECT_EQ(parse_price_mode("reinterpreted"), PriceMode::Reinterpreted);
  EXPECT_EQ(parse_price_mode(to_string(PriceMode::SHBaseline)), PriceMode::SHBaseline);
  EXPECT_EQ(parse_price_mode(to_string(PriceMode::Reinterpreted)), PriceMode::Reinterpreted);
  EXPECT_THROW(parse_price_mode("linear"), std::invalid_argument);
}

TEST(Returns, ConstantPriceGivesZeroReturns) {
  const std::vector<double> lp(10, 0.3);
  const std::vector<std::int32_t> seg(10, 0);
  for (int tau : {1, 3, 9}) {
    const auto r = returns(lp, seg, tau);
    ASSERT_EQ(r.size(), 10u - tau);
    for (double v : r) EXPECT_EQ(v, 0.0);
  }
}

TEST(Returns, TauRange) {
  const std::vector<double> lp(5, 0.0);
  const std::vector<std::int32_t> seg(5, 0);
  EXPECT_THROW(returns(lp, seg, 0), std::invalid_argument);
  EXPECT_THROW(returns(lp, seg, -1), std::invalid_argument);
  EXPECT_THROW(returns(lp, seg, 5), std::invalid_argument);
  EXPECT_NO_THROW(returns(lp, seg, 4));
  const std::vector<std::int32_t> short_seg(4, 0);
  EXPECT_THROW(returns(lp, short_seg, 1), std::invalid_argument);
}

TEST(Returns, SkipsWindowsSpanningAReset) {
  const std::vector<double> lp{0.0, 0.1, 0.3, 5.0, 5.2, 5.1};
  const std::vector<std::int32_t> seg{0, 0, 0, 1, 1, 1};
  const auto r1 = returns(lp, seg, 1);
  ASSERT_EQ(r1.size(), 4u);
  EXPECT_NEAR(r1[0], 0.1, 1e-15);
  EXPECT_NEAR(r1[1], 0.2, 1e-15);
  EXPECT_NEAR(r1[2], 0.2, 1e-15);
  EXPECT_NEAR(r1[3], -0.1, 1e-15);
  const auto r2 = returns(lp, seg, 2);
  ASSERT_EQ(r2.size(), 2u);
  EXPECT_NEAR(r2[0], 0.3, 1e-15);
  EXPECT_NEAR(r2[1], 0.1, 1e-15);
  EXPECT_TRUE(returns(lp, seg, 3).empty());
}

TEST(Returns, UnitReturnsAreExcessDemandOverN) {
  MarketSeries s;
  s.n_agents = 4;
  const std::vector<std::int64_t> sums{0, 2, 1, 1, -3};
  double lp = 0.0;
  for (std::size_t t = 0; t < sums.size(); ++t) {
    const std::int64_t ed = t == 0 ? 0 : sums[t] - sums[t - 1];
    lp = step_log_price(lp, ed, 4);
    s.segment_id.push_back(0);
    s.magnetization.push_back(static_cast<double>(sums[t]) / 4.0);
    s.log_price.push_back(lp);
    s.excess_demand.push_back(ed);
    s.volume.push_back(std::abs(ed) + 2);
    s.gross_volume.push_back(0);
    s.spin_sum_begin.push_back(t == 0 ? 0 : sums[t - 1]);
    s.spin_sum_end.push_back(sums[t]);
  }
  const auto r = returns(s, 1);
  ASSERT_EQ(r.size(), 4u);
  for (std::size_t k = 0; k < r.size(); ++k) {
    EXPECT_DOUBLE_EQ(r[k], static_cast<double>(s.excess_demand[k + 1]) / 4.0);
  }
  const AlignedReturns aligned = unit_returns_with_volume(s);
  ASSERT_EQ(aligned.returns.size(), 4u);
  EXPECT_EQ(aligned.volume.front(), s.volume[1]);
  EXPECT_EQ(aligned.volume.back(), s.volume[4]);
}

TEST(SeriesCsv, RoundTrip) {
  MarketSeries s;
  s.n_agents = 9;
  for (int t = 0; t < 20; ++t) {
    s.segment_id.push_back(t < 12 ? 0 : 1);
    s.magnetization.push_back((t % 7 - 3) / 9.0);
    s.log_price.push_back(0.1 * t + 1.0 / 3.0);
    s.excess_demand.push_back(t % 5 - 2);
    s.volume.push_back(t % 5 + 3);
    s.gross_volume.push_back(0);
    s.spin_sum_begin.push_back(0);
    s.spin_sum_end.push_back(0);
  }
  std::stringstream buffer;
  write_series_csv(buffer, s, "seed=1 config_hash=abc n_agents=9");
  const std::string text = buffer.str();
  EXPECT_EQ(text.rfind("# seed=1 config_hash=abc", 0), 0u);
  EXPECT_NE(text.find("t,segment_id,M,log_price,ED,volume"), std::string::npos);

  const MarketSeries back = read_series_csv(buffer);
  EXPECT_EQ(back.n_agents, 9);
  EXPECT_EQ(back.segment_id, s.segment_id);
  EXPECT_EQ(back.magnetization, s.magnetization);
  EXPECT_EQ(back.log_price, s.log_price);
  EXPECT_EQ(back.excess_demand, s.excess_demand);
  EXPECT_EQ(back.volume, s.volume);
}

TEST(SeriesCsv, MalformedInputNamesTheLine) {
  std::istringstream in("t,segment_id,M,log_price,ED,volume\n0,0,0.1,0.1,0,0\n1,0,zzz,0.2,1,1\n");
  try {
    read_series_csv(in);
    FAIL() << "expected an error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  std::istringstream empty("");
  EXPECT_THROW(read_series_csv(empty), std::runtime_error);
}
