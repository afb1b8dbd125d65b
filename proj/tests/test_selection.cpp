#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <vector>

#include "rankdrift/rng.hpp"
#include "rankdrift/selection.hpp"
#include "rankdrift/stats.hpp"

using namespace rankdrift;
using Catch::Approx;

TEST_CASE("min plus uniform stores the flat pair table") {
  const SelectionModel m = SelectionModel::min_plus_uniform(10);
  CHECK(m.k_replace() == 2);
  REQUIRE(m.gamma_table().size() == 9);
  for (const auto& entry : m.gamma_table()) {
    REQUIRE(entry.ranks.size() == 2);
    CHECK(entry.ranks[0] == 1);
    CHECK(entry.weight == Approx(1.0 / 9.0).epsilon(1e-14));
  }
  CHECK(m.marginal_g()[1] == Approx(0.5).margin(1e-14));
  for (int i = 2; i <= 10; ++i)
    CHECK(m.marginal_g()[std::size_t(i)] ==
          Approx(1.0 / 18.0).epsilon(1e-12));
}

TEST_CASE("replace kth is a point mass on rank k") {
  const SelectionModel m1 = SelectionModel::replace_kth(5, 1);
  CHECK(m1.marginal_g()[1] == 1.0);
  CHECK(*m1.threshold() == 1.0);

  const SelectionModel m3 = SelectionModel::replace_kth(5, 3);
  for (int i = 1; i <= 5; ++i)
    CHECK(m3.marginal_g()[std::size_t(i)] == (i == 3 ? 1.0 : 0.0));
  CHECK(*m3.kth_rank() == 3);
}

TEST_CASE("min plus max splits mass between the extremes") {
  const SelectionModel m = SelectionModel::min_plus_max(4);
  CHECK(m.marginal_g()[1] == Approx(0.5).margin(1e-15));
  CHECK(m.marginal_g()[4] == Approx(0.5).margin(1e-15));
  CHECK(m.marginal_g()[2] == 0.0);
  CHECK(m.cdf_g(2) == Approx(0.5).margin(1e-15));
  CHECK(*m.threshold() == 0.5);
  CHECK(!m.tail_slope().has_value());
}

TEST_CASE("custom two-replacement table marginals by enumeration") {
  std::vector<RankTupleEntry> table = {{{1, 2}, 0.5}, {{1, 3}, 0.5}};
  const SelectionModel m = SelectionModel::custom_ranked(3, 2, table);
  CHECK(m.marginal_g()[1] == Approx(0.5).margin(1e-15));
  CHECK(m.marginal_g()[2] == Approx(0.25).margin(1e-15));
  CHECK(m.marginal_g()[3] == Approx(0.25).margin(1e-15));

  // Independent route: spread each ranked pair over its two orderings with
  // half the weight each and read off the first-component marginal.
  std::map<int, double> first_marginal;
  for (const auto& entry : table) {
    first_marginal[entry.ranks[0]] += entry.weight / 2.0;
    first_marginal[entry.ranks[1]] += entry.weight / 2.0;
  }
  for (int i = 1; i <= 3; ++i)
    CHECK(m.marginal_g()[std::size_t(i)] ==
          Approx(first_marginal[i]).margin(1e-15));
}

TEST_CASE("pair-table marginals equal ordered-pair marginalization") {
  for (int n = 2; n <= 8; ++n) {
    // An uneven but valid ranked table over all pairs.
    std::vector<RankTupleEntry> table;
    double total = 0.0;
    int c = 1;
    for (int i = 1; i <= n; ++i)
      for (int j = i + 1; j <= n; ++j) {
        table.push_back({{i, j}, double(c)});
        total += double(c);
        c = c % 5 + 1;
      }
    for (auto& entry : table) entry.weight /= total;

    const SelectionModel m = SelectionModel::custom_ranked(n, 2, table);
    std::vector<double> brute(std::size_t(n) + 1, 0.0);
    for (const auto& entry : table) {
      brute[std::size_t(entry.ranks[0])] += entry.weight / 2.0;
      brute[std::size_t(entry.ranks[1])] += entry.weight / 2.0;
    }
    for (int i = 1; i <= n; ++i)
      REQUIRE(m.marginal_g()[std::size_t(i)] ==
              Approx(brute[std::size_t(i)]).margin(1e-12));
  }
}

TEST_CASE("cumulative rank distribution") {
  const SelectionModel m = SelectionModel::min_plus_uniform(11);
  CHECK(m.cdf_g(0) == 0.0);
  CHECK(m.cdf_g(3) == Approx(0.6).epsilon(1e-12));
  CHECK(m.cdf_g(11) == 1.0);
  for (int n = 1; n <= 11; ++n) CHECK(m.cdf_g(n) >= m.cdf_g(n - 1));
  CHECK_THROWS_AS(m.cdf_g(-1), RankOutOfRange);
  CHECK_THROWS_AS(m.cdf_g(12), RankOutOfRange);
}

TEST_CASE("min plus others marginals and threshold") {
  // K=2 with explicit weights on the other rank.
  const std::vector<double> f = {0.5, 0.3, 0.2};
  const SelectionModel m = SelectionModel::min_plus_others(4, f, 0.0);
  CHECK(m.marginal_g()[1] == Approx(0.5).margin(1e-15));
  CHECK(m.marginal_g()[2] == Approx(0.25).margin(1e-15));
  CHECK(m.marginal_g()[3] == Approx(0.15).margin(1e-15));
  CHECK(m.marginal_g()[4] == Approx(0.10).margin(1e-15));
  CHECK(*m.threshold() == Approx(0.5).margin(1e-15));
  CHECK(*m.tail_slope() == 0.0);

  // K=3: minimum plus two others uniform over pairs from {2..5}.
  std::vector<RankTupleEntry> pairs;
  for (int i = 2; i <= 5; ++i)
    for (int j = i + 1; j <= 5; ++j) pairs.push_back({{i, j}, 1.0 / 6.0});
  const SelectionModel m3 = SelectionModel::min_plus_others(5, pairs, 0.0);
  CHECK(m3.k_replace() == 3);
  CHECK(m3.marginal_g()[1] == Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(*m3.threshold() == Approx(1.0 / 3.0).epsilon(1e-12));

  // Without a tail slope the threshold is unknown.
  const SelectionModel m_unknown = SelectionModel::min_plus_others(4, f);
  CHECK(!m_unknown.threshold().has_value());
}

TEST_CASE("eventual uniformity diagnostic") {
  SECTION("uniform-other model deviates by exactly the lattice gap") {
    const SelectionModel m = SelectionModel::min_plus_uniform(100);
    const UniformityCheck check = m.eventual_uniformity(2, 0.01);
    CHECK(check.sup_deviation == Approx(1.0 / 198.0).epsilon(1e-12));
    CHECK(check.holds);
  }
  SECTION("min plus max fails badly") {
    const SelectionModel m = SelectionModel::min_plus_max(100);
    const UniformityCheck check = m.eventual_uniformity(2, 0.05);
    CHECK(check.sup_deviation == Approx(0.5).epsilon(1e-12));
    CHECK(!check.holds);
  }
  SECTION("unknown threshold and bad n0 raise") {
    std::vector<RankTupleEntry> table = {{{1, 2}, 1.0}};
    const SelectionModel m = SelectionModel::custom_ranked(3, 2, table);
    CHECK_THROWS_AS(m.eventual_uniformity(2, 0.01), UnknownThreshold);
    const SelectionModel e2 = SelectionModel::min_plus_uniform(10);
    CHECK_THROWS_AS(e2.eventual_uniformity(1, 0.01), RankOutOfRange);
    CHECK_THROWS_AS(e2.eventual_uniformity(11, 0.01), RankOutOfRange);
  }
}

TEST_CASE("rank sampling follows the declared weights") {
  Rng rng(2025);
  SECTION("point mass") {
    const SelectionModel m = SelectionModel::replace_kth(5, 2);
    for (int i = 0; i < 100; ++i) {
      const std::vector<int>& ranks = m.sample_ranks(rng);
      REQUIRE(ranks == std::vector<int>{2});
    }
  }
  SECTION("minimum always included, partner uniform") {
    const SelectionModel m = SelectionModel::min_plus_uniform(10);
    std::vector<std::uint64_t> partner_hits(11, 0);
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
      const std::vector<int>& ranks = m.sample_ranks(rng);
      REQUIRE(ranks.size() == 2);
      REQUIRE(ranks[0] == 1);
      REQUIRE(ranks[1] >= 2);
      REQUIRE(ranks[1] <= 10);
      ++partner_hits[std::size_t(ranks[1])];
    }
    const std::vector<std::uint64_t> observed(partner_hits.begin() + 2,
                                              partner_hits.end());
    const std::vector<double> flat(9, 1.0 / 9.0);
    CHECK(chi_square_pvalue(chi_square_stat(observed, flat), 8) > 1e-3);
  }
  SECTION("empirical inclusion frequency matches K times the marginal") {
    const SelectionModel m = SelectionModel::min_plus_max(6);
    int hits_1 = 0, hits_6 = 0;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) {
      const std::vector<int>& ranks = m.sample_ranks(rng);
      for (int r : ranks) {
        if (r == 1) ++hits_1;
        if (r == 6) ++hits_6;
      }
    }
    CHECK(hits_1 == draws);
    CHECK(hits_6 == draws);
  }
}

TEST_CASE("invalid tables are rejected") {
  using Table = std::vector<RankTupleEntry>;
  CHECK_THROWS_AS(SelectionModel::custom_ranked(3, 2, Table{{{1, 2}, 0.9}}),
                  InvalidTable);
  CHECK_THROWS_AS(SelectionModel::custom_ranked(3, 2, Table{{{1, 2}, -0.5},
                                                            {{1, 3}, 1.5}}),
                  InvalidTable);
  CHECK_THROWS_AS(SelectionModel::custom_ranked(3, 2, Table{{{2, 2}, 1.0}}),
                  InvalidTable);
  CHECK_THROWS_AS(SelectionModel::custom_ranked(3, 2, Table{{{3, 2}, 1.0}}),
                  InvalidTable);
  CHECK_THROWS_AS(SelectionModel::custom_ranked(3, 2, Table{{{1, 7}, 1.0}}),
                  InvalidTable);
  CHECK_THROWS_AS(SelectionModel::custom_ranked(3, 2, Table{{{1}, 1.0}}),
                  IncompatibleK);
  CHECK_THROWS_AS(SelectionModel::custom_ranked(3, 4, Table{{{1, 2}, 1.0}}),
                  IncompatibleK);
  CHECK_THROWS_AS(SelectionModel::replace_kth(5, 0), RankOutOfRange);
  CHECK_THROWS_AS(SelectionModel::replace_kth(5, 6), RankOutOfRange);
  CHECK_THROWS_AS(
      SelectionModel::min_plus_others(4, std::vector<RankTupleEntry>{
                                             {{1}, 1.0}}),
      InvalidTable);

  // Tiny drift is renormalized instead of rejected.
  const SelectionModel ok = SelectionModel::custom_ranked(
      3, 2, Table{{{1, 2}, 0.5}, {{1, 3}, 0.5 + 5e-10}});
  double sum = 0.0;
  for (int i = 1; i <= 3; ++i) sum += ok.marginal_g()[std::size_t(i)];
  CHECK(sum == Approx(1.0).margin(1e-12));
}

TEST_CASE("models survive a JSON round trip") {
  std::vector<SelectionModel> models;
  models.push_back(SelectionModel::min_plus_uniform(7));
  models.push_back(SelectionModel::replace_kth(5, 3));
  models.push_back(SelectionModel::min_plus_max(6));
  models.push_back(
      SelectionModel::min_plus_others(4, std::vector<double>{0.5, 0.3, 0.2},
                                      0.25));
  models.push_back(SelectionModel::custom_ranked(
      3, 2, {{{1, 2}, 0.5}, {{2, 3}, 0.5}}, 0.7, 0.4));

  for (const SelectionModel& m : models) {
    const SelectionModel back = SelectionModel::from_json(m.to_json());
    CHECK(back.family() == m.family());
    CHECK(back.n_points() == m.n_points());
    CHECK(back.k_replace() == m.k_replace());
    CHECK(back.threshold() == m.threshold());
    CHECK(back.tail_slope() == m.tail_slope());
    REQUIRE(back.marginal_g().size() == m.marginal_g().size());
    for (std::size_t i = 1; i < m.marginal_g().size(); ++i)
      CHECK(back.marginal_g()[i] == Approx(m.marginal_g()[i]).margin(1e-15));
  }
}
