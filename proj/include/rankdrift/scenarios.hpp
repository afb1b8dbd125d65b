#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "rankdrift/analytic.hpp"
#include "rankdrift/counting.hpp"
#include "rankdrift/engine.hpp"
#include "rankdrift/errors.hpp"
#include "rankdrift/ranked_multiset.hpp"
#include "rankdrift/selection.hpp"
#include "rankdrift/stats.hpp"

// Named experiment scenarios: parameter defaults, the two planar systems
// (norm-ranked and partial-order), the beauty-contest dynamics, and the
// verify diagnostics each scenario ships with.

namespace rankdrift {

// ---------------------------------------------------------------------------
// Norm of a uniform point of the unit square.

// CDF of sqrt(X^2+Y^2) for (X,Y) uniform on [0,1]^2: a quarter-circle area
// for w <= 1, quarter circle minus the two circular segments outside the
// square for 1 < w <= sqrt(2).
inline double planar_norm_cdf(double w) {
  if (w <= 0.0) return 0.0;
  const double pi = 3.14159265358979323846;
  if (w <= 1.0) return 0.25 * pi * w * w;
  if (w * w >= 2.0) return 1.0;
  return std::sqrt(w * w - 1.0) +
         0.5 * w * w * (std::asin(1.0 / w) - std::acos(1.0 / w));
}

// Inverse CDF: closed form on the quarter-circle part, safeguarded Newton
// above it (the density there is w*(asin(1/w)-acos(1/w))).
inline double planar_norm_inverse(double u) {
  const double pi = 3.14159265358979323846;
  const double sqrt2 = std::sqrt(2.0);
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return sqrt2;
  if (u <= 0.25 * pi) return std::sqrt(4.0 * u / pi);
  double lo = 1.0, hi = sqrt2;
  double w = 0.5 * (lo + hi);
  for (int i = 0; i < 100; ++i) {
    const double f = planar_norm_cdf(w) - u;
    (f > 0.0 ? hi : lo) = w;
    const double density = w * (std::asin(1.0 / w) - std::acos(1.0 / w));
    double next = density > 0.0 ? w - f / density : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - w) < 1e-15 * w) return next;
    w = next;
  }
  return w;
}

inline ReplacementLaw planar_norm_law() {
  return ReplacementLaw::transformed_cdf(planar_norm_cdf, 0.0,
                                         std::sqrt(2.0), planar_norm_inverse);
}

// ---------------------------------------------------------------------------
// Direct two-dimensional norm-ranked system: replace the point of smallest
// norm plus one uniformly chosen other point with fresh uniform points.

struct PlanarPoint {
  double x = 0.0;
  double y = 0.0;
};

namespace detail {
struct NormPoint {
  double norm2, x, y;
};
struct NormPointLess {
  bool operator()(const NormPoint& a, const NormPoint& b) const {
    return std::tie(a.norm2, a.x, a.y) < std::tie(b.norm2, b.x, b.y);
  }
};
}  // namespace detail

class PlanarNormSystem {
 public:
  PlanarNormSystem(int n_points, Rng& rng) {
    if (n_points < 2) throw ConfigError("need at least two points");
    for (int i = 0; i < n_points; ++i) insert(rng.next_unit(), rng.next_unit());
  }

  int size() const { return int(points_.size()); }

  // One uniform-64 for the other rank, then four unit draws for the two
  // fresh points.
  void step(Rng& rng) {
    points_.erase_at(0);  // smallest norm
    points_.erase_at(std::size_t(rng.next_below(points_.size())));
    insert(rng.next_unit(), rng.next_unit());
    insert(rng.next_unit(), rng.next_unit());
  }

  int count_within(double radius) const {
    const double inf = std::numeric_limits<double>::infinity();
    return int(points_.count_le({radius * radius, inf, inf}));
  }

  // Norm of the k-th closest point to the origin, 1-based.
  double radius_at(int rank) const {
    if (rank < 1 || rank > size()) throw RankOutOfRange("rank outside 1..N");
    return std::sqrt(points_.at(std::size_t(rank) - 1).norm2);
  }

  double typical_norm(Rng& rng) const {
    return std::sqrt(points_.at(std::size_t(rng.next_below(points_.size()))).norm2);
  }

  std::vector<PlanarPoint> snapshot() const {
    std::vector<PlanarPoint> out;
    out.reserve(points_.size());
    points_.for_each([&](const detail::NormPoint& p) {
      out.push_back({p.x, p.y});
    });
    return out;
  }

 private:
  void insert(double x, double y) { points_.insert({x * x + y * y, x, y}); }

  RankedMultiset<detail::NormPoint, detail::NormPointLess> points_;
};

// ---------------------------------------------------------------------------
// Partial-order system: points of the unit square ranked by coordinatewise
// dominance. Each step replaces one uniformly chosen Pareto-minimal point
// and one uniformly chosen dominated point with fresh uniform points. When
// every point is minimal, only a minimal point is replaced that step.

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

// Strict dominance: at most as large in both coordinates, smaller in one.
// Exact duplicates do not dominate each other (a multiset convention; the
// point-set formulation never produces them).
inline bool dominates(const Point2& a, const Point2& b) {
  return a.x <= b.x && a.y <= b.y && (a.x < b.x || a.y < b.y);
}

// O(n^2) pairwise scan, the oracle the incremental structure is checked
// against.
inline std::vector<Point2> pareto_minimal_brute(const std::vector<Point2>& pts) {
  std::vector<Point2> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool minimal = true;
    for (std::size_t j = 0; j < pts.size() && minimal; ++j)
      if (j != i && dominates(pts[j], pts[i])) minimal = false;
    if (minimal) out.push_back(pts[i]);
  }
  return out;
}

namespace detail {
struct Point2Less {
  bool operator()(const Point2& a, const Point2& b) const {
    return std::tie(a.x, a.y) < std::tie(b.x, b.y);
  }
};
}  // namespace detail

class PartialOrderSystem {
 public:
  PartialOrderSystem(int n_points, Rng& rng) {
    if (n_points < 2) throw ConfigError("need at least two points");
    for (int i = 0; i < n_points; ++i)
      insert_point({rng.next_unit(), rng.next_unit()});
  }

  explicit PartialOrderSystem(const std::vector<Point2>& initial) {
    if (initial.size() < 2) throw ConfigError("need at least two points");
    for (const Point2& p : initial) insert_point(p);
  }

  int size() const { return int(minimal_.size() + dominated_.size()); }
  int minimal_count() const { return int(minimal_.size()); }
  std::uint64_t degenerate_steps() const { return degenerate_steps_; }

  void step(Rng& rng) {
    const std::size_t i = std::size_t(rng.next_below(minimal_.size()));
    if (dominated_.empty()) {
      // Everyone is minimal: replace only the chosen minimal point.
      remove_minimal_at(i);
      insert_point({rng.next_unit(), rng.next_unit()});
      ++degenerate_steps_;
      return;
    }
    const std::size_t j = std::size_t(rng.next_below(dominated_.size()));
    dominated_.erase_at(j);  // no exposure: dominators of others survive
    remove_minimal_at(i);
    insert_point({rng.next_unit(), rng.next_unit()});
    insert_point({rng.next_unit(), rng.next_unit()});
  }

  std::vector<Point2> minimal_points() const { return minimal_.to_vector(); }

  std::vector<Point2> all_points() const {
    std::vector<Point2> out = minimal_.to_vector();
    dominated_.for_each([&](const Point2& p) { out.push_back(p); });
    return out;
  }

 private:
  using Set = RankedMultiset<Point2, detail::Point2Less>;

  // Is p dominated by the current frontier? Only the frontier point with
  // the greatest x at or below p.x can dominate p: frontier y values drop
  // as x grows, so it has the smallest y among eligible dominators.
  bool frontier_dominates(const Point2& p) const {
    const double inf = std::numeric_limits<double>::infinity();
    const std::size_t below = minimal_.count_le({p.x, inf});
    if (below == 0) return false;
    return dominates(minimal_.at(below - 1), p);
  }

  void insert_point(const Point2& p) {
    if (frontier_dominates(p)) {
      dominated_.insert(p);
      return;
    }
    minimal_.insert(p);
    // Frontier points past p with y at or above p.y are now dominated.
    std::size_t idx = minimal_.count_le(p);
    while (idx < minimal_.size()) {
      const Point2 q = minimal_.at(idx);
      if (q.y < p.y) break;
      if (dominates(p, q)) {
        minimal_.erase_at(idx);
        dominated_.insert(q);
      } else {
        ++idx;  // exact duplicate of p stays minimal
      }
    }
  }

  void remove_minimal_at(std::size_t rank) {
    const Point2 q = minimal_.at(rank);
    std::optional<Point2> next;
    if (rank + 1 < minimal_.size()) next = minimal_.at(rank + 1);
    minimal_.erase_at(rank);

    // Dominated points previously shadowed only by q sit in the x-strip
    // between q and its frontier successor; anything past the successor is
    // still shadowed by it. Scan in (x, y) order so that a re-exposed point
    // is frontier-checked against earlier re-exposed ones too.
    const double inf = std::numeric_limits<double>::infinity();
    std::size_t idx = dominated_.count_lt({q.x, -inf});
    while (idx < dominated_.size()) {
      const Point2 c = dominated_.at(idx);
      if (next && c.x >= next->x) break;
      if (frontier_dominates(c)) {
        ++idx;
      } else {
        dominated_.erase_at(idx);
        insert_point(c);
      }
    }
  }

  Set minimal_;
  Set dominated_;
  std::uint64_t degenerate_steps_ = 0;
};

// ---------------------------------------------------------------------------
// Beauty-contest dynamics: replace the value farthest from p times the
// current mean; that is always either the minimum or the maximum, with ties
// going to the larger value.

class BeautyContestSystem {
 public:
  BeautyContestSystem(int n_points, double p, Rng& rng) : p_(p) {
    if (n_points < 2) throw ConfigError("need at least two points");
    if (!(p >= 0.0)) throw ConfigError("p must be >= 0");
    for (int i = 0; i < n_points; ++i) {
      const double v = rng.next_unit();
      values_.insert(v);
      sum_ += v;
    }
  }

  BeautyContestSystem(const std::vector<double>& initial, double p) : p_(p) {
    if (initial.size() < 2) throw ConfigError("need at least two points");
    for (double v : initial) {
      if (!(v >= 0.0 && v <= 1.0)) throw BadInitialData("value outside [0,1]");
      values_.insert(v);
      sum_ += v;
    }
  }

  int size() const { return int(values_.size()); }
  double mean() const { return sum_ / double(values_.size()); }
  double min_value() const { return values_.at(0); }
  double max_value() const { return values_.at(values_.size() - 1); }

  // Returns the replaced value.
  double step(Rng& rng) {
    const double target = p_ * mean();
    const double lo = values_.at(0);
    const double hi = values_.at(values_.size() - 1);
    const bool take_max = std::abs(hi - target) >= std::abs(target - lo);
    const double removed =
        take_max ? values_.erase_at(values_.size() - 1) : values_.erase_at(0);
    sum_ -= removed;
    const double fresh = rng.next_unit();
    values_.insert(fresh);
    sum_ += fresh;
    if (++steps_since_refresh_ >= 65536) refresh_sum();
    return removed;
  }

  double typical_value(Rng& rng) const {
    return values_.at(std::size_t(rng.next_below(values_.size())));
  }

  double sum_drift() const {
    double exact = 0.0;
    values_.for_each([&](double v) { exact += v; });
    return std::abs(exact - sum_);
  }

  std::vector<double> snapshot() const { return values_.to_vector(); }

 private:
  void refresh_sum() {
    double exact = 0.0;
    values_.for_each([&](double v) { exact += v; });
    sum_ = exact;
    steps_since_refresh_ = 0;
  }

  RankedMultiset<double> values_;
  double sum_ = 0.0;
  double p_;
  int steps_since_refresh_ = 0;
};

// ---------------------------------------------------------------------------
// Scenario registry and verify diagnostics.

enum class ScenarioKind {
  WarmupKth,
  MinPlusUniform,
  MinPlusMax,
  PlanarNorm,
  PartialOrder,
  BeautyContest,
};

struct ScenarioParams {
  int n = 0;
  std::uint64_t steps = 0;
  std::uint64_t burn_in = 0;
  std::uint64_t seed = 0;
  int k = 1;        // warmup target rank
  double p = 1.0;   // beauty-contest factor
};

struct ScenarioSpec {
  ScenarioKind kind;
  std::string name;
  std::string summary;
  ScenarioParams defaults;
  bool engine_backed;  // runnable as SelectionModel + ReplacementLaw
};

inline const std::vector<ScenarioSpec>& scenarios() {
  static const std::vector<ScenarioSpec> all = {
      {ScenarioKind::WarmupKth, "warmup_kth",
       "replace the k-th ranked value each step; neighbors of rank k pin to "
       "0 and 1",
       {9, 110000, 10000, 101, 5, 1.0}, true},
      {ScenarioKind::MinPlusUniform, "min_plus_uniform",
       "replace the minimum and one uniform other value each step",
       {2000, 600000, 60000, 202, 1, 1.0}, true},
      {ScenarioKind::MinPlusMax, "min_plus_max",
       "replace the minimum and the maximum each step; values pile up at "
       "one half",
       {4000, 800000, 250000, 303, 1, 1.0}, true},
      {ScenarioKind::PlanarNorm, "planar_norm",
       "planar points ranked by norm; equivalent to the one-dimensional "
       "process through the norm CDF",
       {10000, 1000000, 200000, 404, 1, 1.0}, true},
      {ScenarioKind::PartialOrder, "partial_order",
       "planar points under coordinatewise dominance; replace one minimal "
       "and one dominated point",
       {1000, 200000, 20000, 505, 1, 1.0}, false},
      {ScenarioKind::BeautyContest, "beauty_contest",
       "replace the value farthest from p times the mean",
       {1000, 200000, 20000, 606, 1, 0.5}, false},
  };
  return all;
}

inline const ScenarioSpec& find_scenario(const std::string& name) {
  for (const auto& s : scenarios())
    if (s.name == name) return s;
  throw ConfigError("unknown scenario: " + name);
}

// Model/law pair for the engine-backed scenarios.
inline SelectionModel scenario_model(const ScenarioSpec& spec,
                                     const ScenarioParams& params) {
  switch (spec.kind) {
    case ScenarioKind::WarmupKth:
      return SelectionModel::replace_kth(params.n, params.k);
    case ScenarioKind::MinPlusUniform:
    case ScenarioKind::PlanarNorm:
      return SelectionModel::min_plus_uniform(params.n);
    case ScenarioKind::MinPlusMax:
      return SelectionModel::min_plus_max(params.n);
    default:
      throw ConfigError("scenario has no selection model");
  }
}

inline ReplacementLaw scenario_law(const ScenarioSpec& spec) {
  return spec.kind == ScenarioKind::PlanarNorm ? planar_norm_law()
                                               : ReplacementLaw::uniform01();
}

struct DiagnosticResult {
  std::string scenario;
  std::string diagnostic;
  double expected = 0.0;
  double observed = 0.0;
  double distance = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string note;
};

namespace detail {

inline DiagnosticResult make_result(const std::string& scenario,
                                    const std::string& name, double expected,
                                    double observed, double tolerance) {
  DiagnosticResult r;
  r.scenario = scenario;
  r.diagnostic = name;
  r.expected = expected;
  r.observed = observed;
  r.distance = std::abs(observed - expected);
  r.tolerance = tolerance;
  r.pass = r.distance < tolerance;
  return r;
}

inline std::vector<DiagnosticResult> verify_warmup(const ScenarioSpec& spec,
                                                   const ScenarioParams& pr) {
  if (pr.k < 1 || pr.k > pr.n) throw RankOutOfRange("k outside 1..N");
  Rng rng(pr.seed);
  SelectionModel model = scenario_model(spec, pr);
  ReplacementLaw law = scenario_law(spec);
  Landscape landscape = Landscape::iid_uniform(pr.n, rng, law);

  std::vector<double> kth;
  std::uint64_t below_hits = 0, above_hits = 0, samples = 0;
  for (std::uint64_t t = 1; t <= pr.steps; ++t) {
    step(landscape, model, law, rng);
    if (t <= pr.burn_in) continue;
    ++samples;
    kth.push_back(landscape.order_stat(pr.k));
    if (pr.k > 1 && landscape.order_stat(pr.k - 1) > 0.1) ++below_hits;
    if (pr.k < pr.n && landscape.order_stat(pr.k + 1) < 0.9) ++above_hits;
  }

  std::vector<DiagnosticResult> out;
  const double ks = ks_distance(
      EmpiricalDist::from_samples(std::move(kth)),
      [](double x) { return std::min(1.0, std::max(0.0, x)); });
  out.push_back(make_result(spec.name, "target_rank_uniform_ks", 0.0, ks, 0.02));
  if (pr.k > 1)
    out.push_back(make_result(spec.name, "rank_below_collapses_to_zero", 0.0,
                              double(below_hits) / double(samples), 0.01));
  if (pr.k < pr.n)
    out.push_back(make_result(spec.name, "rank_above_collapses_to_one", 0.0,
                              double(above_hits) / double(samples), 0.01));
  return out;
}

inline std::vector<DiagnosticResult> verify_min_plus_uniform(
    const ScenarioSpec& spec, const ScenarioParams& pr) {
  Rng rng(pr.seed);
  SelectionModel model = scenario_model(spec, pr);
  ReplacementLaw law = scenario_law(spec);
  Landscape landscape = Landscape::iid_uniform(pr.n, rng, law);

  std::vector<double> typical, minima, counts;
  for (std::uint64_t t = 1; t <= pr.steps; ++t) {
    step(landscape, model, law, rng);
    if (t <= pr.burn_in) continue;
    counts.push_back(double(landscape.count_at(0.25)));
    if ((t - pr.burn_in) % 10 == 0) {
      typical.push_back(landscape.typical_point(rng));
      minima.push_back(landscape.order_stat(1));
    }
  }

  std::vector<DiagnosticResult> out;
  const double ks_typical =
      ks_distance(EmpiricalDist::from_samples(std::move(typical)),
                  [](double x) {
                    return std::min(1.0, std::max(0.0, 2.0 * (x - 0.5)));
                  });
  out.push_back(
      make_result(spec.name, "typical_point_uniform_upper_half_ks", 0.0,
                  ks_typical, 0.02));

  const BatchMeans bm = batch_means(counts);
  auto mean_diag = make_result(spec.name, "mean_count_quarter_level",
                               closed_form_pi(0.25).mean, bm.mean, 0.02);
  if (3.0 * bm.stderr_batch > mean_diag.tolerance)
    mean_diag.note = "BudgetTooSmall";
  out.push_back(mean_diag);

  const double ks_min =
      ks_distance(EmpiricalDist::from_samples(std::move(minima)),
                  [](double x) { return order_stat_limit_cdf(1, x); });
  out.push_back(
      make_result(spec.name, "minimum_limit_law_ks", 0.0, ks_min, 0.02));
  return out;
}

inline std::vector<DiagnosticResult> verify_min_plus_max(
    const ScenarioSpec& spec, const ScenarioParams& pr) {
  Rng rng(pr.seed);
  SelectionModel model = scenario_model(spec, pr);
  ReplacementLaw law = scenario_law(spec);
  Landscape landscape = Landscape::iid_uniform(pr.n, rng, law);

  std::uint64_t inside = 0, samples = 0;
  std::vector<double> counts;
  for (std::uint64_t t = 1; t <= pr.steps; ++t) {
    step(landscape, model, law, rng);
    if (t <= pr.burn_in) continue;
    counts.push_back(double(landscape.count_at(0.25)));
    if ((t - pr.burn_in) % 10 == 0) {
      ++samples;
      const double v = landscape.typical_point(rng);
      if (v >= 0.45 && v <= 0.55) ++inside;
    }
  }

  std::vector<DiagnosticResult> out;
  const double mass = double(inside) / double(samples);
  DiagnosticResult concentration;
  concentration.scenario = spec.name;
  concentration.diagnostic = "typical_point_mass_near_half";
  concentration.expected = 1.0;
  concentration.observed = mass;
  concentration.distance = 1.0 - mass;
  concentration.tolerance = 0.1;  // pass when mass > 0.9
  concentration.pass = mass > 0.9;
  out.push_back(concentration);

  const UniformityCheck a4 = model.eventual_uniformity(2, 0.05);
  DiagnosticResult uniformity;
  uniformity.scenario = spec.name;
  uniformity.diagnostic = "eventual_uniformity_fails";
  uniformity.expected = 0.0;  // expected holds = false
  uniformity.observed = a4.holds ? 1.0 : 0.0;
  uniformity.distance = a4.sup_deviation;
  uniformity.tolerance = 0.05;
  uniformity.pass = !a4.holds;
  out.push_back(uniformity);

  const BatchMeans bm = batch_means(counts);
  out.push_back(make_result(spec.name, "mean_count_quarter_level",
                            closed_form_pi(0.25).mean, bm.mean, 0.05));
  return out;
}

inline std::vector<DiagnosticResult> verify_planar(const ScenarioSpec& spec,
                                                   const ScenarioParams& pr) {
  std::vector<DiagnosticResult> out;
  const double threshold_radius = std::sqrt(2.0 / 3.14159265358979323846);

  // One-dimensional run through the norm CDF.
  std::vector<double> norms_1d;
  {
    Rng rng(pr.seed);
    SelectionModel model = scenario_model(spec, pr);
    ReplacementLaw law = scenario_law(spec);
    Landscape landscape = Landscape::iid_uniform(pr.n, rng, law);
    for (std::uint64_t t = 1; t <= pr.steps; ++t) {
      step(landscape, model, law, rng);
      if (t > pr.burn_in && (t - pr.burn_in) % 10 == 0)
        norms_1d.push_back(landscape.typical_point(rng));
    }
  }

  // Direct two-dimensional run.
  std::vector<double> norms_2d;
  double radius_sum = 0.0, fraction_sum = 0.0;
  std::uint64_t radius_samples = 0;
  {
    Rng rng(pr.seed + 1);
    PlanarNormSystem system(pr.n, rng);
    const int one_percent = std::max(1, (pr.n + 99) / 100);
    for (std::uint64_t t = 1; t <= pr.steps; ++t) {
      system.step(rng);
      if (t <= pr.burn_in) continue;
      if ((t - pr.burn_in) % 10 == 0)
        norms_2d.push_back(system.typical_norm(rng));
      if ((t - pr.burn_in) % 1000 == 0) {
        radius_sum += system.radius_at(one_percent);
        fraction_sum += double(system.count_within(0.7)) / double(pr.n);
        ++radius_samples;
      }
    }
  }

  out.push_back(make_result(spec.name, "one_percent_radius_at_threshold",
                            threshold_radius,
                            radius_sum / double(radius_samples), 0.02));
  const double ks =
      ks_distance(EmpiricalDist::from_samples(std::move(norms_1d)),
                  EmpiricalDist::from_samples(std::move(norms_2d)));
  out.push_back(make_result(spec.name, "transformed_vs_direct_norm_ks", 0.0,
                            ks, 0.02));
  out.push_back(make_result(spec.name, "fraction_below_radius_0_7", 0.0,
                            fraction_sum / double(radius_samples), 0.01));
  return out;
}

inline std::vector<DiagnosticResult> verify_partial_order(
    const ScenarioSpec& spec, const ScenarioParams& pr) {
  Rng rng(pr.seed);
  PartialOrderSystem system(pr.n, rng);
  std::uint64_t mismatches = 0, antichain_violations = 0;
  const std::uint64_t check_every = std::max<std::uint64_t>(1, pr.steps / 10);
  double minimal_mean = 0.0;
  std::uint64_t samples = 0;

  auto check = [&]() {
    std::vector<Point2> fast = system.minimal_points();
    std::vector<Point2> slow = pareto_minimal_brute(system.all_points());
    auto key = [](const Point2& p) { return std::make_pair(p.x, p.y); };
    std::sort(fast.begin(), fast.end(), [&](auto a, auto b) {
      return key(a) < key(b);
    });
    std::sort(slow.begin(), slow.end(), [&](auto a, auto b) {
      return key(a) < key(b);
    });
    if (fast.size() != slow.size()) {
      ++mismatches;
    } else {
      for (std::size_t i = 0; i < fast.size(); ++i)
        if (key(fast[i]) != key(slow[i])) {
          ++mismatches;
          break;
        }
    }
    for (std::size_t i = 0; i < fast.size(); ++i)
      for (std::size_t j = 0; j < fast.size(); ++j)
        if (i != j && dominates(fast[i], fast[j])) ++antichain_violations;
  };

  for (std::uint64_t t = 1; t <= pr.steps; ++t) {
    system.step(rng);
    if (t % check_every == 0) check();
    if (t > pr.burn_in) {
      minimal_mean += double(system.minimal_count());
      ++samples;
    }
  }
  minimal_mean /= double(samples);

  std::vector<DiagnosticResult> out;
  out.push_back(make_result(spec.name, "minimal_set_matches_brute_force", 0.0,
                            double(mismatches), 0.5));
  out.push_back(make_result(spec.name, "minimal_set_is_antichain", 0.0,
                            double(antichain_violations), 0.5));
  auto report = make_result(spec.name, "mean_minimal_count", minimal_mean,
                            minimal_mean, 1.0);
  report.note = "report-only";
  out.push_back(report);
  return out;
}

inline std::vector<DiagnosticResult> verify_beauty(const ScenarioSpec& spec,
                                                   const ScenarioParams& pr) {
  Rng rng(pr.seed);
  BeautyContestSystem system(pr.n, pr.p, rng);
  std::uint64_t out_of_range = 0;
  double typical_mean = 0.0;
  std::uint64_t samples = 0;
  for (std::uint64_t t = 1; t <= pr.steps; ++t) {
    system.step(rng);
    if (system.min_value() < 0.0 || system.max_value() > 1.0) ++out_of_range;
    if (t > pr.burn_in && (t - pr.burn_in) % 10 == 0) {
      typical_mean += system.typical_value(rng);
      ++samples;
    }
  }

  std::vector<DiagnosticResult> out;
  out.push_back(make_result(spec.name, "values_stay_in_unit_interval", 0.0,
                            double(out_of_range), 0.5));
  out.push_back(make_result(spec.name, "running_mean_consistent", 0.0,
                            system.sum_drift(), 1e-6));
  auto report = make_result(spec.name, "mean_typical_value",
                            typical_mean / double(samples),
                            typical_mean / double(samples), 1.0);
  report.note = "report-only";
  out.push_back(report);
  return out;
}

}  // namespace detail

// Runs a scenario's diagnostics and returns one result per diagnostic.
inline std::vector<DiagnosticResult> verify_scenario(
    const ScenarioSpec& spec, const ScenarioParams& params) {
  switch (spec.kind) {
    case ScenarioKind::WarmupKth:
      return detail::verify_warmup(spec, params);
    case ScenarioKind::MinPlusUniform:
      return detail::verify_min_plus_uniform(spec, params);
    case ScenarioKind::MinPlusMax:
      return detail::verify_min_plus_max(spec, params);
    case ScenarioKind::PlanarNorm:
      return detail::verify_planar(spec, params);
    case ScenarioKind::PartialOrder:
      return detail::verify_partial_order(spec, params);
    case ScenarioKind::BeautyContest:
      return detail::verify_beauty(spec, params);
  }
  throw ConfigError("unknown scenario kind");
}

}  // namespace rankdrift
