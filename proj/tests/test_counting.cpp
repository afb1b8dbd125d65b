#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "rankdrift/counting.hpp"
#include "rankdrift/errors.hpp"

using namespace rankdrift;
using Catch::Approx;
using Rat = boost::multiprecision::cpp_rational;

namespace {

double tv_distance(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t m = std::max(a.size(), b.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double pa = i < a.size() ? a[i] : 0.0;
    const double pb = i < b.size() ? b[i] : 0.0;
    sum += std::fabs(pa - pb);
  }
  return 0.5 * sum;
}

}  // namespace

TEST_CASE("kernel row templates are exact in rational arithmetic") {
  SECTION("rows are stochastic and match the drift identity") {
    for (int a = 1; a <= 19; ++a) {
      const Rat s(a, 20);
      for (int b = 0; b <= 7; ++b) {
        const Rat f(b, 7);
        const auto row = min_plus_other_row<Rat>(s, f);
        Rat sum = 0, drift = 0;
        for (int j = 0; j < 4; ++j) {
          sum += row[std::size_t(j)];
          drift += Rat(j - 2) * row[std::size_t(j)];
        }
        REQUIRE(sum == Rat(1));
        REQUIRE(drift == Rat(2) * s - Rat(1) - f);
      }
      const auto row0 = min_plus_other_row0<Rat>(s);
      Rat sum = 0, drift = 0;
      for (int j = 0; j < 3; ++j) {
        sum += row0[std::size_t(j)];
        drift += Rat(j) * row0[std::size_t(j)];
      }
      REQUIRE(sum == Rat(1));
      REQUIRE(drift == Rat(2) * s);
    }
  }
  SECTION("the f = 0 row is the bottom row shifted") {
    const Rat s(3, 10);
    const auto row = min_plus_other_row<Rat>(s, Rat(0));
    const auto row0 = min_plus_other_row0<Rat>(s);
    CHECK(row[0] == Rat(0));
    for (int j = 0; j < 3; ++j)
      CHECK(row[std::size_t(j) + 1] == row0[std::size_t(j)]);
  }
}

TEST_CASE("finite count kernel") {
  SECTION("worked row at s = 1/2 with a saturated f entry") {
    const CountingChain chain =
        min_plus_other_kernel(3, 0.5, {0.0, 0.0, 1.0, 1.0});
    CHECK(chain.prob(2, 0) == Approx(0.25).margin(1e-15));
    CHECK(chain.prob(2, 1) == Approx(0.5).margin(1e-15));
    CHECK(chain.prob(2, 2) == Approx(0.25).margin(1e-15));
    CHECK(chain.prob(2, 3) == 0.0);
    CHECK(chain.states() == 4);
    CHECK(chain.band() == 2);
    CHECK(chain.s_level() == 0.5);
  }
  SECTION("row matches direct enumeration of the two draws") {
    const int n_points = 5, n = 2;
    const double s = 0.3;
    const CountingChain chain =
        min_plus_other_kernel(n_points, s, min_plus_uniform_f_table(n_points));
    std::map<int, double> enumerated;
    for (int j = 2; j <= n_points; ++j) {
      const int removed = 1 + (j <= n);
      for (int b1 = 0; b1 <= 1; ++b1)
        for (int b2 = 0; b2 <= 1; ++b2) {
          const double w = (1.0 / (n_points - 1)) *
                           (b1 ? s : 1.0 - s) * (b2 ? s : 1.0 - s);
          enumerated[n - removed + b1 + b2] += w;
        }
    }
    for (int m = 0; m <= n_points; ++m) {
      const auto it = enumerated.find(m);
      const double want = it == enumerated.end() ? 0.0 : it->second;
      CHECK(chain.prob(n, m) == Approx(want).margin(1e-15));
    }
  }
  SECTION("rows sum to one and drift follows the selection cdf") {
    const int n_points = 11;
    const double s = 0.4;
    const CountingChain chain =
        min_plus_other_kernel(n_points, s, min_plus_uniform_f_table(n_points));
    const SelectionModel model = SelectionModel::min_plus_uniform(n_points);
    CHECK(chain.drift(3) == Approx(-0.4).margin(1e-12));
    CHECK(chain.drift(0) == Approx(0.8).margin(1e-12));
    for (int n = 0; n <= n_points; ++n) {
      CHECK(chain.row_sum(n) == Approx(1.0).margin(1e-12));
      CHECK(chain.drift(n) ==
            Approx(2.0 * (s - model.cdf_g(n))).margin(1e-12));
    }
  }
  SECTION("generic model kernel agrees with the specialized builder") {
    const int n_points = 8;
    const double s = 0.35;
    const CountingChain a =
        min_plus_other_kernel(n_points, s, min_plus_uniform_f_table(n_points));
    const CountingChain b =
        kernel_from_model(SelectionModel::min_plus_uniform(n_points), s);
    for (int n = 0; n <= n_points; ++n)
      for (int m = std::max(0, n - 2); m <= std::min(n_points, n + 2); ++m)
        REQUIRE(a.prob(n, m) == Approx(b.prob(n, m)).margin(1e-14));
  }
  SECTION("generic kernel drift matches k (s - G(n)) for other families") {
    const double s = 0.45;
    const SelectionModel kth = SelectionModel::replace_kth(7, 4);
    const CountingChain ck = kernel_from_model(kth, s);
    for (int n = 0; n <= 7; ++n)
      CHECK(ck.drift(n) == Approx(n >= 4 ? s - 1.0 : s).margin(1e-12));
    const SelectionModel mm = SelectionModel::min_plus_max(6);
    const CountingChain cm = kernel_from_model(mm, s);
    for (int n = 0; n <= 6; ++n) {
      CHECK(cm.row_sum(n) == Approx(1.0).margin(1e-12));
      CHECK(cm.drift(n) == Approx(2.0 * (s - mm.cdf_g(n))).margin(1e-12));
    }
  }
  SECTION("state bounds are checked") {
    const CountingChain chain =
        min_plus_other_kernel(4, 0.3, min_plus_uniform_f_table(4));
    CHECK_THROWS_AS(chain.prob(-1, 0), RankOutOfRange);
    CHECK_THROWS_AS(chain.prob(0, 5), RankOutOfRange);
    CHECK_THROWS_AS(chain.drift(5), RankOutOfRange);
  }
  SECTION("invalid configuration is rejected") {
    const auto f = min_plus_uniform_f_table(4);
    CHECK_THROWS_AS(min_plus_other_kernel(4, 0.0, f), ConfigError);
    CHECK_THROWS_AS(min_plus_other_kernel(4, 1.0, f), ConfigError);
  }
}

TEST_CASE("f table validation") {
  SECTION("uniform table has the right shape") {
    const auto f = min_plus_uniform_f_table(5);
    REQUIRE(f.size() == 6);
    CHECK(f[1] == 0.0);
    CHECK(f[3] == Approx(0.5).margin(1e-15));
    CHECK(f[5] == 1.0);
    CHECK_NOTHROW(check_f_table(5, f));
    CHECK_THROWS_AS(min_plus_uniform_f_table(1), BadFTable);
  }
  SECTION("defective tables are rejected") {
    CHECK_THROWS_AS(check_f_table(4, {0.0, 0.0, 0.5, 1.0}), BadFTable);
    CHECK_THROWS_AS(check_f_table(3, {0.1, 0.0, 0.5, 1.0}), BadFTable);
    CHECK_THROWS_AS(check_f_table(3, {0.0, 0.2, 0.5, 1.0}), BadFTable);
    CHECK_THROWS_AS(check_f_table(4, {0.0, 0.0, 0.5, 0.3, 1.0}), BadFTable);
    CHECK_THROWS_AS(check_f_table(3, {0.0, 0.0, 0.5, 0.9}), BadFTable);
  }
}

TEST_CASE("limit kernel") {
  SECTION("interior rows are the nearest neighbor walk") {
    const CountingChain chain = limit_kernel(0.25, 20);
    CHECK(chain.prob(1, 0) == Approx(0.5625).margin(1e-15));
    CHECK(chain.prob(1, 1) == Approx(0.375).margin(1e-15));
    CHECK(chain.prob(1, 2) == Approx(0.0625).margin(1e-15));
    CHECK(chain.prob(0, 0) == Approx(0.5625).margin(1e-15));
    CHECK(chain.prob(0, 1) == Approx(0.375).margin(1e-15));
    CHECK(chain.prob(0, 2) == Approx(0.0625).margin(1e-15));
    for (int n = 1; n < 20; ++n)
      CHECK(chain.drift(n) == Approx(-0.5).margin(1e-15));
  }
  SECTION("overflow at the cap reflects into staying put") {
    const CountingChain chain = limit_kernel(0.3, 10);
    CHECK(chain.prob(10, 9) == Approx(0.49).margin(1e-15));
    CHECK(chain.prob(10, 10) == Approx(0.42 + 0.09).margin(1e-15));
    CHECK(chain.row_sum(10) == Approx(1.0).margin(1e-15));
  }
  SECTION("default cap deepens as s approaches one half") {
    CHECK(default_limit_cap(0.25) == 11);
    CHECK(default_limit_cap(0.49) == 300);
    CHECK(default_limit_cap(0.1) == 8);
    CHECK_THROWS_AS(default_limit_cap(0.5), ConfigError);
  }
  SECTION("bad arguments are rejected") {
    CHECK_THROWS_AS(limit_kernel(0.0), ConfigError);
    CHECK_THROWS_AS(limit_kernel(0.3, 1), ConfigError);
  }
}

TEST_CASE("closed form stationary law") {
  SECTION("values at s = 1/4") {
    const StationaryDist pi = closed_form_pi(0.25);
    CHECK(pi.probs[0] == Approx(0.5).margin(1e-15));
    CHECK(pi.probs[1] == Approx(0.5 - 1.0 / 9.0).margin(1e-15));
    CHECK(pi.probs[2] == Approx(8.0 / 81.0).margin(1e-15));
    CHECK(pi.probs[3] == Approx(8.0 / 729.0).margin(1e-15));
    CHECK(pi.mean == Approx(0.625).margin(1e-15));
    CHECK(pi.s == 0.25);
    CHECK(pi.provenance == Provenance::ClosedForm);
    double total = 0.0;
    for (double p : pi.probs) total += p;
    CHECK(total == Approx(1.0).margin(1e-14));
  }
  SECTION("nearly all mass sits at zero as s vanishes") {
    CHECK(closed_form_pi(1e-6).probs[0] == Approx(1.0).margin(3e-6));
  }
  SECTION("geometric tail ratio") {
    const StationaryDist pi = closed_form_pi(0.3);
    const double r = (0.3 / 0.7) * (0.3 / 0.7);
    for (std::size_t n = 2; n + 1 < pi.probs.size(); ++n)
      CHECK(pi.probs[n + 1] / pi.probs[n] == Approx(r).margin(1e-12));
  }
  SECTION("domain errors") {
    CHECK_THROWS_AS(closed_form_pi(0.0), ConfigError);
    CHECK_THROWS_AS(closed_form_pi(-0.1), ConfigError);
    CHECK_THROWS_AS(closed_form_pi(0.5), Supercritical);
    CHECK_THROWS_AS(closed_form_pi(0.7), Supercritical);
  }
}

TEST_CASE("stationary solver") {
  SECTION("truncated limit chain reproduces the closed form") {
    const StationaryDist sol = solve_stationary(limit_kernel(0.25, 60));
    const StationaryDist cf = closed_form_pi(0.25);
    CHECK(tv_distance(sol.probs, cf.probs) < 1e-8);
    CHECK(sol.mean == Approx(cf.mean).margin(1e-8));
    CHECK(sol.provenance == Provenance::ExactSolve);
    CHECK(sol.s == 0.25);
  }
  SECTION("tail of the solved limit chain is exactly geometric") {
    const StationaryDist sol = solve_stationary(limit_kernel(0.25, 40));
    const double slope =
        (std::log(sol.probs[25]) - std::log(sol.probs[5])) / 20.0;
    CHECK(slope == Approx(2.0 * std::log(0.25 / 0.75)).margin(1e-6));
  }
  SECTION("finite chains drop to the limit law at unit rate in N") {
    const StationaryDist cf = closed_form_pi(0.25);
    double prev = 1.0;
    double last = 1.0;
    for (int n_points : {50, 100, 200, 400}) {
      const StationaryDist sol = solve_stationary(min_plus_other_kernel(
          n_points, 0.25, min_plus_uniform_f_table(n_points)));
      double maxdiff = 0.0;
      for (std::size_t i = 0; i <= 10; ++i)
        maxdiff = std::max(maxdiff, std::fabs(sol.probs[i] - cf.probs[i]));
      CHECK(maxdiff < prev);
      prev = maxdiff;
      last = maxdiff;
    }
    CHECK(last < 0.01);
  }
  SECTION("finite chain mean approaches the closed form mean") {
    const StationaryDist sol = solve_stationary(
        min_plus_other_kernel(200, 0.25, min_plus_uniform_f_table(200)));
    CHECK(sol.mean == Approx(0.625).margin(0.01));
  }
  SECTION("finite N tails decay at least as fast as the limit") {
    const StationaryDist sol = solve_stationary(
        min_plus_other_kernel(100, 0.25, min_plus_uniform_f_table(100)));
    const double slope =
        (std::log(sol.probs[25]) - std::log(sol.probs[5])) / 20.0;
    CHECK(slope <= 2.0 * std::log(0.25 / 0.75) + 0.1);
  }
  SECTION("supercritical mean grows linearly with the expected fraction") {
    double prev = 1.0;
    for (int n_points : {25, 50, 100, 200}) {
      const StationaryDist sol = solve_stationary(
          min_plus_other_kernel(n_points, 0.6, min_plus_uniform_f_table(n_points)));
      const double err = std::fabs(sol.mean / n_points - 0.2);
      CHECK(err < prev);
      prev = err;
    }
    CHECK(prev < 0.01);
  }
  SECTION("stationary mean is increasing in the level") {
    double prev = -1.0;
    for (double s : {0.1, 0.3, 0.45, 0.6, 0.8}) {
      const StationaryDist sol = solve_stationary(
          min_plus_other_kernel(60, s, min_plus_uniform_f_table(60)));
      CHECK(sol.mean > prev);
      prev = sol.mean;
    }
  }
  SECTION("transient states get zero mass") {
    const SelectionModel model = SelectionModel::replace_kth(9, 5);
    const StationaryDist sol =
        solve_stationary(kernel_from_model(model, 0.37));
    REQUIRE(sol.probs.size() == 10);
    CHECK(sol.probs[4] == Approx(0.63).margin(1e-12));
    CHECK(sol.probs[5] == Approx(0.37).margin(1e-12));
    for (std::size_t i = 0; i < sol.probs.size(); ++i)
      if (i != 4 && i != 5) CHECK(sol.probs[i] == 0.0);
    CHECK(sol.mean == Approx(4.37).margin(1e-12));
  }
  SECTION("absorbing state yields a point mass") {
    CountingChain chain(CountingChain::Kind::FiniteN, 3, 1, 0.3);
    chain.add_prob(0, 1, 1.0);
    chain.add_prob(1, 2, 1.0);
    chain.add_prob(2, 2, 1.0);
    const StationaryDist sol = solve_stationary(chain);
    CHECK(sol.probs == std::vector<double>{0.0, 0.0, 1.0});
    CHECK(sol.mean == 2.0);
  }
  SECTION("two closed classes have no unique stationary law") {
    CountingChain chain(CountingChain::Kind::FiniteN, 5, 1, 0.3);
    chain.add_prob(0, 0, 1.0);
    chain.add_prob(1, 0, 0.5);
    chain.add_prob(1, 2, 0.5);
    chain.add_prob(2, 1, 0.5);
    chain.add_prob(2, 3, 0.5);
    chain.add_prob(3, 2, 0.5);
    chain.add_prob(3, 4, 0.5);
    chain.add_prob(4, 4, 1.0);
    CHECK_THROWS_AS(solve_stationary(chain), ReducibleChain);
  }
  SECTION("a closed class with a gap is reported") {
    CountingChain chain(CountingChain::Kind::FiniteN, 3, 2, 0.3);
    chain.add_prob(0, 2, 1.0);
    chain.add_prob(1, 0, 1.0);
    chain.add_prob(2, 0, 1.0);
    CHECK_THROWS_AS(solve_stationary(chain), ReducibleChain);
  }
}

TEST_CASE("merged two state reduction") {
  SECTION("worked values at s = 1/4") {
    const MergedReduction merged = merged_chain_reduction(0.25, 40);
    CHECK(merged.pi[0] == Approx(8.0 / 9.0).margin(1e-12));
    CHECK(merged.pi0 == Approx(0.5).margin(1e-12));
    CHECK(merged.pi1 == Approx(7.0 / 18.0).margin(1e-12));
    CHECK(merged.kernel.prob(0, 0) == Approx(1.0 - 0.0625).margin(1e-15));
    CHECK(merged.kernel.prob(0, 1) == Approx(0.0625).margin(1e-15));
    for (int n = 0; n < merged.kernel.states(); ++n)
      CHECK(merged.kernel.row_sum(n) == Approx(1.0).margin(1e-12));
  }
  SECTION("recovered masses match the closed form") {
    for (double s : {0.1, 0.25, 0.4, 0.45}) {
      const MergedReduction merged = merged_chain_reduction(s);
      const StationaryDist cf = closed_form_pi(s);
      CHECK(merged.pi0 == Approx(cf.probs[0]).margin(1e-10));
      CHECK(merged.pi1 == Approx(cf.probs[1]).margin(1e-10));
    }
  }
  SECTION("detailed balance holds and the solver agrees") {
    const MergedReduction merged = merged_chain_reduction(0.3, 30);
    for (int n = 0; n + 1 < merged.kernel.states(); ++n)
      CHECK(merged.pi[std::size_t(n)] * merged.kernel.prob(n, n + 1) ==
            Approx(merged.pi[std::size_t(n) + 1] *
                   merged.kernel.prob(n + 1, n))
                .margin(1e-15));
    const StationaryDist sol = solve_stationary(merged.kernel);
    for (int n = 0; n < merged.kernel.states(); ++n)
      CHECK(sol.probs[std::size_t(n)] ==
            Approx(merged.pi[std::size_t(n)]).margin(1e-12));
  }
  SECTION("rejected at and above the critical level") {
    CHECK_THROWS_AS(merged_chain_reduction(0.5), Supercritical);
    CHECK_THROWS_AS(merged_chain_reduction(0.75), Supercritical);
    CHECK_THROWS_AS(merged_chain_reduction(0.0), ConfigError);
  }
}

TEST_CASE("return times") {
  SECTION("limit expectation") {
    CHECK(return_time_expectation(0.25) == Approx(2.0).margin(1e-15));
    CHECK(std::isinf(return_time_expectation(0.5)));
    CHECK(std::isinf(return_time_expectation(0.75)));
    for (double s : {0.1, 0.2, 0.3, 0.4})
      CHECK(return_time_expectation(s) ==
            Approx(1.0 / closed_form_pi(s).probs[0]).margin(1e-12));
    CHECK_THROWS_AS(return_time_expectation(0.0), ConfigError);
  }
  SECTION("exact return time diverges with N above the critical level") {
    double prev = 0.0;
    for (int n_points : {30, 50, 80}) {
      const StationaryDist sol = solve_stationary(min_plus_other_kernel(
          n_points, 0.55, min_plus_uniform_f_table(n_points)));
      const double kac = 1.0 / sol.probs[0];
      CHECK(kac > prev);
      prev = kac;
    }
    CHECK(prev > 100.0);
  }
  SECTION("estimator matches the exact finite N value") {
    Rng rng(314);
    const SelectionModel model = SelectionModel::min_plus_uniform(100);
    const ReplacementLaw law = ReplacementLaw::uniform01();
    const ReturnTimeEstimate est =
        estimate_return_time(model, law, 0.25, 4000, 10000000, rng);
    const StationaryDist sol = solve_stationary(
        min_plus_other_kernel(100, 0.25, min_plus_uniform_f_table(100)));
    CHECK(est.excursions == 4000);
    CHECK(est.stderr_batch > 0.0);
    CHECK(std::fabs(est.mean - 1.0 / sol.probs[0]) <
          std::max(4.0 * est.stderr_batch, 0.08));
  }
  SECTION("estimator tracks the longer excursions near criticality") {
    Rng rng(2718);
    const SelectionModel model = SelectionModel::min_plus_uniform(300);
    const ReplacementLaw law = ReplacementLaw::uniform01();
    const ReturnTimeEstimate est =
        estimate_return_time(model, law, 0.45, 1500, 10000000, rng);
    const StationaryDist sol = solve_stationary(
        min_plus_other_kernel(300, 0.45, min_plus_uniform_f_table(300)));
    CHECK(std::fabs(est.mean - 1.0 / sol.probs[0]) <
          std::max(4.0 * est.stderr_batch, 0.5));
  }
  SECTION("step cap aborts an underfunded run") {
    Rng rng(9);
    const SelectionModel model = SelectionModel::min_plus_uniform(50);
    const ReplacementLaw law = ReplacementLaw::uniform01();
    CHECK_THROWS_AS(
        estimate_return_time(model, law, 0.45, 1000000, 5, rng),
        TrialBudgetExceeded);
  }
  SECTION("estimator argument checks") {
    Rng rng(9);
    const SelectionModel model = SelectionModel::min_plus_uniform(50);
    const ReplacementLaw law = ReplacementLaw::uniform01();
    CHECK_THROWS_AS(estimate_return_time(model, law, 1.5, 10, 100, rng),
                    ConfigError);
    CHECK_THROWS_AS(estimate_return_time(model, law, 0.25, 0, 100, rng),
                    ConfigError);
  }
}
