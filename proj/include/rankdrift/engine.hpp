#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rankdrift/errors.hpp"
#include "rankdrift/io.hpp"
#include "rankdrift/ranked_multiset.hpp"
#include "rankdrift/rng.hpp"
#include "rankdrift/selection.hpp"

// Simulation engine for rank-driven dynamics: N values kept in an indexable
// ranked multiset; each step removes the K selected ranks (of the pre-step
// ordering) and inserts K fresh draws from the replacement law.

namespace rankdrift {

// Replacement value distribution: either the unit uniform, or a general law
// given by its CDF on one support interval. Draws map a unit uniform
// through the inverse CDF, so a process with values on another scale is
// just the uniform process watched through that lens.
class ReplacementLaw {
 public:
  static ReplacementLaw uniform01() { return ReplacementLaw(); }

  static ReplacementLaw transformed_cdf(
      std::function<double(double)> cdf, double lo, double hi,
      std::function<double(double)> inverse = nullptr) {
    if (!(lo < hi)) throw NonInvertibleCdf("support must be a real interval");
    ReplacementLaw law;
    law.cdf_ = std::move(cdf);
    law.inverse_ = std::move(inverse);
    law.lo_ = lo;
    law.hi_ = hi;
    law.identity_ = false;
    law.validate();
    return law;
  }

  bool is_identity() const { return identity_; }
  double support_lo() const { return lo_; }
  double support_hi() const { return hi_; }

  double cdf(double x) const {
    if (identity_) return std::min(1.0, std::max(0.0, x));
    if (x <= lo_) return 0.0;
    if (x >= hi_) return cdf_(hi_);
    return cdf_(x);
  }

  // Inverse CDF. Uses the supplied closed form when present, otherwise
  // monotone bisection to full double resolution.
  double draw_value(double u) const {
    if (identity_) return u;
    if (u <= 0.0) return lo_;
    if (u >= cdf_(hi_)) return hi_;
    if (inverse_) return inverse_(u);
    double a = lo_, b = hi_;
    for (int i = 0; i < 200 && a < b; ++i) {
      const double m = 0.5 * (a + b);
      if (m <= a || m >= b) break;
      (cdf_(m) < u ? a : b) = m;
    }
    return 0.5 * (a + b);
  }

  // True when the CDF actually reaches 1 at the top of the support, i.e.
  // the law is usable for sampling (not just threshold analysis).
  bool complete() const {
    return identity_ || std::abs(cdf_(hi_) - 1.0) <= 1e-9;
  }

 private:
  ReplacementLaw() = default;

  void validate() const {
    if (std::abs(cdf_(lo_)) > 1e-9)
      throw NonInvertibleCdf("CDF must start at zero on its support");
    const int grid = 128;
    double prev = cdf_(lo_);
    for (int i = 1; i <= grid; ++i) {
      const double x = lo_ + (hi_ - lo_) * double(i) / grid;
      const double y = cdf_(x);
      if (!(y > prev))
        throw NonInvertibleCdf("CDF must be strictly increasing on support");
      prev = y;
    }
  }

  std::function<double(double)> cdf_;
  std::function<double(double)> inverse_;
  double lo_ = 0.0;
  double hi_ = 1.0;
  bool identity_ = true;
};

inline double transform_replacement(const ReplacementLaw& law, double u) {
  return law.draw_value(u);
}

class Landscape {
 public:
  static Landscape iid_uniform(int n_points, Rng& rng,
                               const ReplacementLaw& law = ReplacementLaw::uniform01()) {
    check_law(law);
    Landscape l(law);
    for (int i = 0; i < n_points; ++i)
      l.values_.insert(law.draw_value(rng.next_unit()));
    l.check_size();
    return l;
  }

  static Landscape all_ones(int n_points) {
    Landscape l(ReplacementLaw::uniform01());
    for (int i = 0; i < n_points; ++i) l.values_.insert(1.0);
    l.check_size();
    return l;
  }

  static Landscape from_values(const std::vector<double>& values,
                               const ReplacementLaw& law = ReplacementLaw::uniform01()) {
    check_law(law);
    Landscape l(law);
    for (double v : values) {
      if (!(v >= law.support_lo() && v <= law.support_hi()))
        throw BadInitialData("initial value outside law support");
      l.values_.insert(v);
    }
    l.check_size();
    return l;
  }

  int size() const { return int(values_.size()); }
  std::uint64_t time() const { return time_; }
  double support_lo() const { return lo_; }
  double support_hi() const { return hi_; }

  // #{i : value_i <= s}; ties at s count.
  int count_at(double s) const { return int(values_.count_le(s)); }

  // n-th smallest value, 1-based.
  double order_stat(int n) const {
    if (n < 1 || n > size()) throw RankOutOfRange("order statistic rank");
    return values_.at(std::size_t(n) - 1);
  }

  // Value at a uniformly random coordinate; consumes from the stream.
  double typical_point(Rng& rng) const {
    return values_.at(std::size_t(rng.next_below(values_.size())));
  }

  std::vector<double> snapshot() const { return values_.to_vector(); }

 private:
  explicit Landscape(const ReplacementLaw& law)
      : lo_(law.support_lo()), hi_(law.support_hi()) {}

  static void check_law(const ReplacementLaw& law) {
    if (!law.complete())
      throw NonInvertibleCdf("replacement CDF does not reach one");
  }

  void check_size() const {
    if (values_.empty()) throw BadInitialData("landscape needs >= 1 value");
  }

  RankedMultiset<double> values_;
  std::uint64_t time_ = 0;
  double lo_;
  double hi_;

  friend struct StepAccess;
};

// What one step did: the selected ranks (pre-step, ascending), the values
// they held, and the fresh values inserted.
struct StepInfo {
  std::vector<int> ranks;
  std::vector<double> removed;
  std::vector<double> inserted;
};

struct StepAccess {
  static RankedMultiset<double>& values(Landscape& l) { return l.values_; }
  static void tick(Landscape& l) { ++l.time_; }
};

// One transition: draws a ranked tuple from the model, removes those ranks
// of the pre-step ordering, inserts K fresh draws. Stream consumption order
// is fixed (one uniform for the tuple, then one per replacement draw).
inline StepInfo step(Landscape& landscape, const SelectionModel& model,
                     const ReplacementLaw& law, Rng& rng) {
  if (model.n_points() != landscape.size())
    throw BadInitialData("model N does not match landscape size");
  if (!law.complete())
    throw NonInvertibleCdf("replacement CDF does not reach one");

  StepInfo info;
  info.ranks = model.sample_ranks(rng);
  auto& values = StepAccess::values(landscape);

  // Remove from highest rank down so lower pre-step ranks stay valid.
  info.removed.resize(info.ranks.size());
  for (std::size_t i = info.ranks.size(); i-- > 0;)
    info.removed[i] = values.erase_at(std::size_t(info.ranks[i]) - 1);

  info.inserted.reserve(info.ranks.size());
  for (std::size_t i = 0; i < info.ranks.size(); ++i) {
    const double v = law.draw_value(rng.next_unit());
    info.inserted.push_back(v);
    values.insert(v);
  }
  StepAccess::tick(landscape);
  return info;
}

// Observation plan for run(): after `burn_in` steps, every `every`-th step
// records each requested observable.
struct Schedule {
  std::uint64_t burn_in = 0;
  std::uint64_t every = 1;
  std::vector<double> count_levels;
  std::vector<int> order_stat_ranks;
  bool typical_point = false;

  std::uint64_t records_per_sample() const {
    return count_levels.size() + order_stat_ranks.size() +
           (typical_point ? 1 : 0);
  }

  std::uint64_t expected_records(std::uint64_t steps) const {
    if (steps <= burn_in || every == 0) return 0;
    return ((steps - burn_in) / every) * records_per_sample();
  }
};

struct TraceRecord {
  std::uint64_t step;
  std::string observable;
  double value;
};

struct Trace {
  std::uint64_t steps_run = 0;
  std::vector<TraceRecord> records;

  std::string to_csv() const {
    std::string out = "step,observable,value\n";
    for (const auto& r : records) {
      out += std::to_string(r.step);
      out += ',';
      out += csv_field(r.observable);
      out += ',';
      out += format_double(r.value);
      out += '\n';
    }
    return out;
  }
};

inline Trace run(Landscape& landscape, const SelectionModel& model,
                 const ReplacementLaw& law, std::uint64_t steps,
                 const Schedule& schedule, Rng& rng) {
  if (schedule.every == 0) throw ConfigError("schedule period must be >= 1");
  std::vector<std::string> count_names, order_names;
  for (double s : schedule.count_levels)
    count_names.push_back("count@" + format_double(s));
  for (int n : schedule.order_stat_ranks)
    order_names.push_back("orderstat@" + std::to_string(n));

  Trace trace;
  trace.records.reserve(schedule.expected_records(steps));
  for (std::uint64_t t = 1; t <= steps; ++t) {
    step(landscape, model, law, rng);
    if (t > schedule.burn_in && (t - schedule.burn_in) % schedule.every == 0) {
      for (std::size_t i = 0; i < count_names.size(); ++i)
        trace.records.push_back(
            {t, count_names[i],
             double(landscape.count_at(schedule.count_levels[i]))});
      for (std::size_t i = 0; i < order_names.size(); ++i)
        trace.records.push_back(
            {t, order_names[i],
             landscape.order_stat(schedule.order_stat_ranks[i])});
      if (schedule.typical_point)
        trace.records.push_back({t, "typical", landscape.typical_point(rng)});
    }
  }
  trace.steps_run = steps;
  return trace;
}

// Post-burn-in time averages of count_at over the given levels, with a
// batch-means standard error per level. Cheaper than a Trace when only the
// means matter (sweeps, long runs).
struct CountAverages {
  std::vector<double> mean;
  std::vector<double> stderr_batch;
  int batches = 0;
};

inline CountAverages time_averaged_counts(
    Landscape& landscape, const SelectionModel& model,
    const ReplacementLaw& law, std::uint64_t steps, std::uint64_t burn_in,
    const std::vector<double>& levels, Rng& rng, int batches = 30) {
  if (steps <= burn_in) throw ConfigError("steps must exceed burn-in");
  if (batches < 2) throw ConfigError("need >= 2 batches");
  const std::uint64_t kept = steps - burn_in;
  const std::size_t nlev = levels.size();
  std::vector<double> batch_sum(nlev * std::size_t(batches), 0.0);
  std::vector<std::uint64_t> batch_len(std::size_t(batches), 0);

  for (std::uint64_t t = 1; t <= steps; ++t) {
    step(landscape, model, law, rng);
    if (t <= burn_in) continue;
    const std::uint64_t i = t - burn_in - 1;
    const std::size_t b = std::size_t(i * std::uint64_t(batches) / kept);
    ++batch_len[b];
    for (std::size_t l = 0; l < nlev; ++l)
      batch_sum[l * std::size_t(batches) + b] +=
          double(landscape.count_at(levels[l]));
  }

  CountAverages out;
  out.batches = batches;
  out.mean.resize(nlev);
  out.stderr_batch.resize(nlev);
  for (std::size_t l = 0; l < nlev; ++l) {
    double total = 0.0, kept_d = double(kept);
    std::vector<double> bmean(static_cast<std::size_t>(batches));
    for (int b = 0; b < batches; ++b) {
      total += batch_sum[l * std::size_t(batches) + std::size_t(b)];
      bmean[std::size_t(b)] =
          batch_sum[l * std::size_t(batches) + std::size_t(b)] /
          double(batch_len[std::size_t(b)]);
    }
    const double mean = total / kept_d;
    double var = 0.0;
    for (int b = 0; b < batches; ++b) {
      const double d = bmean[std::size_t(b)] - mean;
      var += d * d;
    }
    var /= double(batches - 1);
    out.mean[l] = mean;
    out.stderr_batch[l] = std::sqrt(var / double(batches));
  }
  return out;
}

}  // namespace rankdrift
