#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rankdrift/errors.hpp"
#include "rankdrift/rng.hpp"

// Selection models: exchangeable distributions over K distinct ranks out of
// {1..N}, stored in ranked form (each tuple sorted ascending, weight = total
// probability of that rank set). The rank marginal g, its running sum G, and
// the limiting replacement threshold s* drive everything downstream.

namespace rankdrift {

enum class Family {
  ReplaceKth,
  MinPlusUniform,
  MinPlusOthers,
  MinPlusMax,
  CustomRanked,
};

inline const char* family_name(Family f) {
  switch (f) {
    case Family::ReplaceKth: return "replace_kth";
    case Family::MinPlusUniform: return "min_plus_uniform";
    case Family::MinPlusOthers: return "min_plus_others";
    case Family::MinPlusMax: return "min_plus_max";
    case Family::CustomRanked: return "custom_ranked";
  }
  return "?";
}

struct RankTupleEntry {
  std::vector<int> ranks;  // ascending, distinct, in 1..N
  double weight = 0.0;
};

// Result of the eventual-uniformity diagnostic: how far the scaled tail of
// G deviates from the flat profile implied by the threshold, at this N.
struct UniformityCheck {
  bool holds = false;
  double sup_deviation = 0.0;
  int n0 = 2;
};

class SelectionModel {
 public:
  static SelectionModel replace_kth(int n_points, int k) {
    require(n_points >= 1, "need at least one point");
    if (k < 1 || k > n_points) throw RankOutOfRange("k outside 1..N");
    SelectionModel m(Family::ReplaceKth, n_points, 1);
    m.table_.push_back({{k}, 1.0});
    m.k_rank_ = k;
    m.s_star_ = 1.0;
    m.finish(false);
    return m;
  }

  static SelectionModel min_plus_uniform(int n_points) {
    require(n_points >= 2, "need at least two points");
    SelectionModel m(Family::MinPlusUniform, n_points, 2);
    const double w = 1.0 / double(n_points - 1);
    for (int j = 2; j <= n_points; ++j) m.table_.push_back({{1, j}, w});
    m.s_star_ = 0.5;
    m.alpha_ = 0.0;
    m.finish(false);
    return m;
  }

  // Minimum plus K-1 "others" drawn from an explicit weight table over
  // ranked tuples in {2..N}. The tail shape parameter (limit slope of the
  // others' rank CDF) cannot be inferred from a single N, so callers that
  // know it pass it in; the threshold follows as (1 + (K-1)*alpha) / K.
  static SelectionModel min_plus_others(
      int n_points, const std::vector<RankTupleEntry>& others,
      std::optional<double> alpha = std::nullopt) {
    require(n_points >= 2, "need at least two points");
    require(!others.empty(), "empty weight table");
    const int k = int(others.front().ranks.size()) + 1;
    SelectionModel m(Family::MinPlusOthers, n_points, k);
    for (const auto& entry : others) {
      if (int(entry.ranks.size()) + 1 != k)
        throw IncompatibleK("tuple size does not match table");
      RankTupleEntry full;
      full.ranks.push_back(1);
      for (int r : entry.ranks) {
        if (r < 2) throw InvalidTable("other ranks must be >= 2");
        full.ranks.push_back(r);
      }
      full.weight = entry.weight;
      m.table_.push_back(std::move(full));
    }
    m.alpha_ = alpha;
    if (alpha) m.s_star_ = (1.0 + (k - 1) * *alpha) / double(k);
    m.finish(true);
    return m;
  }

  // K=2 convenience: weight f(j) on the single other rank j, j in 2..N.
  static SelectionModel min_plus_others(
      int n_points, const std::vector<double>& f_weights,
      std::optional<double> alpha = std::nullopt) {
    require(int(f_weights.size()) == n_points - 1,
            "need one weight per rank 2..N");
    std::vector<RankTupleEntry> others;
    others.reserve(f_weights.size());
    for (int j = 2; j <= n_points; ++j)
      others.push_back({{j}, f_weights[std::size_t(j) - 2]});
    return min_plus_others(n_points, others, alpha);
  }

  static SelectionModel min_plus_max(int n_points) {
    require(n_points >= 2, "need at least two points");
    SelectionModel m(Family::MinPlusMax, n_points, 2);
    m.table_.push_back({{1, n_points}, 1.0});
    m.s_star_ = 0.5;
    m.finish(false);
    return m;
  }

  // Fully custom ranked weight table, limited to small K where explicit
  // enumeration is sane. Weights off by more than 1e-9 from a probability
  // vector are rejected; smaller drift is renormalized away.
  static SelectionModel custom_ranked(
      int n_points, int k, std::vector<RankTupleEntry> table,
      std::optional<double> s_star = std::nullopt,
      std::optional<double> alpha = std::nullopt) {
    require(n_points >= 1, "need at least one point");
    if (k < 1 || k > 3) throw IncompatibleK("custom tables support K in 1..3");
    SelectionModel m(Family::CustomRanked, n_points, k);
    m.table_ = std::move(table);
    m.s_star_ = s_star;
    m.alpha_ = alpha;
    m.finish(true);
    return m;
  }

  Family family() const { return family_; }
  int n_points() const { return n_; }
  int k_replace() const { return k_; }
  std::optional<int> kth_rank() const { return k_rank_; }
  const std::vector<RankTupleEntry>& gamma_table() const { return table_; }

  // Rank marginal g(i), 1-based; index 0 unused. Each ranked tuple of K
  // distinct ranks contributes weight/K to each member rank, so the
  // marginal sums to one whenever the table does.
  const std::vector<double>& marginal_g() const { return g_; }

  // G(n) = sum of g over ranks 1..n; G(0) = 0, G(N) = 1.
  double cdf_g(int n) const {
    if (n < 0 || n > n_) throw RankOutOfRange("rank outside 0..N");
    return big_g_[std::size_t(n)];
  }

  std::optional<double> threshold() const { return s_star_; }
  std::optional<double> tail_slope() const { return alpha_; }

  // Finite-N probe of the eventual-uniformity condition: above n0 the
  // scaled increment N*(G(n) - s*)/(n - n0 + 1) should sit near 1 - s*.
  // Reports the worst deviation over n0..N and whether it clears `tol`.
  UniformityCheck eventual_uniformity(int n0, double tol) const {
    if (!s_star_) throw UnknownThreshold("model has no known threshold");
    if (n0 < 2 || n0 > n_) throw RankOutOfRange("n0 outside 2..N");
    UniformityCheck out;
    out.n0 = n0;
    for (int n = n0; n <= n_; ++n) {
      const double scaled =
          double(n_) * (cdf_g(n) - *s_star_) / double(n - n0 + 1);
      out.sup_deviation =
          std::max(out.sup_deviation, std::abs(scaled - (1.0 - *s_star_)));
    }
    out.holds = out.sup_deviation < tol;
    return out;
  }

  // Draws one ranked tuple by CDF inversion over the table; consumes one
  // uniform from the stream.
  const std::vector<int>& sample_ranks(Rng& rng) const {
    const double u = rng.next_unit();
    std::size_t idx =
        std::size_t(std::upper_bound(cum_.begin(), cum_.end(), u) -
                    cum_.begin());
    if (idx >= table_.size()) idx = table_.size() - 1;
    return table_[idx].ranks;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["family"] = family_name(family_);
    j["N"] = n_;
    j["K"] = k_;
    if (k_rank_) j["k_rank"] = *k_rank_;
    if (alpha_) j["alpha"] = *alpha_;
    if (s_star_) j["s_star"] = *s_star_;
    if (family_ == Family::MinPlusOthers || family_ == Family::CustomRanked) {
      nlohmann::json table = nlohmann::json::array();
      for (const auto& entry : table_)
        table.push_back({{"ranks", entry.ranks}, {"weight", entry.weight}});
      j["table"] = table;
    }
    return j;
  }

  static SelectionModel from_json(const nlohmann::json& j) {
    const std::string family = j.at("family").get<std::string>();
    const int n = j.at("N").get<int>();
    if (family == "replace_kth")
      return replace_kth(n, j.at("k_rank").get<int>());
    if (family == "min_plus_uniform") return min_plus_uniform(n);
    if (family == "min_plus_max") return min_plus_max(n);

    std::vector<RankTupleEntry> table;
    for (const auto& row : j.at("table")) {
      RankTupleEntry entry;
      entry.ranks = row.at("ranks").get<std::vector<int>>();
      entry.weight = row.at("weight").get<double>();
      table.push_back(std::move(entry));
    }
    std::optional<double> s_star, alpha;
    if (j.contains("s_star")) s_star = j.at("s_star").get<double>();
    if (j.contains("alpha")) alpha = j.at("alpha").get<double>();
    if (family == "min_plus_others") {
      std::vector<RankTupleEntry> others;
      for (auto& entry : table) {
        RankTupleEntry rest;
        rest.ranks.assign(entry.ranks.begin() + 1, entry.ranks.end());
        rest.weight = entry.weight;
        others.push_back(std::move(rest));
      }
      return min_plus_others(n, others, alpha);
    }
    if (family == "custom_ranked")
      return custom_ranked(n, j.at("K").get<int>(), std::move(table), s_star,
                           alpha);
    throw InvalidTable("unknown family: " + family);
  }

 private:
  SelectionModel(Family family, int n, int k)
      : family_(family), n_(n), k_(k) {}

  static void require(bool ok, const char* what) {
    if (!ok) throw InvalidTable(what);
  }

  // Validates the table, renormalizes near-unit weight sums, and builds the
  // marginal, its running sum, and the sampling CDF.
  void finish(bool allow_renormalize) {
    require(!table_.empty(), "empty weight table");
    double sum = 0.0;
    for (auto& entry : table_) {
      if (int(entry.ranks.size()) != k_)
        throw IncompatibleK("tuple size does not match K");
      if (!(entry.weight >= 0.0)) throw InvalidTable("negative weight");
      if (!std::is_sorted(entry.ranks.begin(), entry.ranks.end()))
        throw InvalidTable("tuple ranks must be ascending");
      for (std::size_t i = 0; i < entry.ranks.size(); ++i) {
        const int r = entry.ranks[i];
        if (r < 1 || r > n_) throw InvalidTable("rank outside 1..N");
        if (i > 0 && entry.ranks[i - 1] == r)
          throw InvalidTable("duplicate rank in tuple");
      }
      sum += entry.weight;
    }
    if (allow_renormalize) {
      if (std::abs(sum - 1.0) > 1e-9)
        throw InvalidTable("weights must sum to one (within 1e-9)");
      if (sum != 1.0)
        for (auto& entry : table_) entry.weight /= sum;
    }

    g_.assign(std::size_t(n_) + 1, 0.0);
    cum_.clear();
    cum_.reserve(table_.size());
    double acc = 0.0;
    for (const auto& entry : table_) {
      acc += entry.weight;
      cum_.push_back(acc);
      for (int r : entry.ranks) g_[std::size_t(r)] += entry.weight / k_;
    }
    cum_.back() = 1.0;

    big_g_.assign(std::size_t(n_) + 1, 0.0);
    for (int i = 1; i <= n_; ++i)
      big_g_[std::size_t(i)] = big_g_[std::size_t(i) - 1] + g_[std::size_t(i)];
    if (std::abs(big_g_[std::size_t(n_)] - 1.0) > 1e-10)
      throw InvalidTable("rank marginal does not sum to one");
    big_g_[std::size_t(n_)] = 1.0;
    for (auto& v : big_g_) v = std::min(v, 1.0);
  }

  Family family_;
  int n_;
  int k_;
  std::vector<RankTupleEntry> table_;
  std::vector<double> g_;
  std::vector<double> big_g_;
  std::vector<double> cum_;
  std::optional<double> s_star_;
  std::optional<double> alpha_;
  std::optional<int> k_rank_;
};

}  // namespace rankdrift
