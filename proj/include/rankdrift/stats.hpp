#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "rankdrift/errors.hpp"

// Empirical distributions and the distances the diagnostics run on:
// Kolmogorov-Smirnov against a reference CDF or a second sample, total
// variation between integer histograms, excursion statistics of count
// traces, batch-means errors, and a chi-square goodness-of-fit p-value.

namespace rankdrift {

class EmpiricalDist {
 public:
  static EmpiricalDist from_samples(std::vector<double> samples) {
    if (samples.empty()) throw EmptySample("no samples");
    std::sort(samples.begin(), samples.end());
    EmpiricalDist d;
    d.samples_ = std::move(samples);
    return d;
  }

  // Histogram over the integer states 0..counts.size()-1.
  static EmpiricalDist from_counts(std::vector<std::uint64_t> counts) {
    std::uint64_t total = 0;
    for (auto c : counts) total += c;
    if (total == 0) throw EmptySample("empty histogram");
    EmpiricalDist d;
    d.counts_ = std::move(counts);
    d.total_ = total;
    return d;
  }

  static EmpiricalDist from_integer_trace(const std::vector<int>& trace) {
    if (trace.empty()) throw EmptySample("empty trace");
    int max_state = 0;
    for (int v : trace) {
      if (v < 0) throw EmptySample("negative state in trace");
      max_state = std::max(max_state, v);
    }
    std::vector<std::uint64_t> counts(std::size_t(max_state) + 1, 0);
    for (int v : trace) ++counts[std::size_t(v)];
    return from_counts(std::move(counts));
  }

  bool is_sample() const { return !samples_.empty(); }
  const std::vector<double>& samples() const { return samples_; }
  const std::vector<std::uint64_t>& counts() const { return counts_; }

  std::uint64_t sample_size() const {
    return is_sample() ? samples_.size() : total_;
  }

  double mean() const {
    double sum = 0.0;
    if (is_sample()) {
      for (double v : samples_) sum += v;
      return sum / double(samples_.size());
    }
    for (std::size_t i = 0; i < counts_.size(); ++i)
      sum += double(i) * double(counts_[i]);
    return sum / double(total_);
  }

  std::vector<double> probabilities() const {
    if (is_sample()) throw EmptySample("not a histogram");
    std::vector<double> p(counts_.size());
    for (std::size_t i = 0; i < counts_.size(); ++i)
      p[i] = double(counts_[i]) / double(total_);
    return p;
  }

 private:
  std::vector<double> samples_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

// Sup distance between the empirical CDF of a sample and a reference CDF.
inline double ks_distance(const EmpiricalDist& dist,
                          const std::function<double(double)>& ref_cdf) {
  const auto& x = dist.samples();
  if (x.empty()) throw EmptySample("KS needs a sample");
  const double n = double(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = ref_cdf(x[i]);
    d = std::max(d, std::max(f - double(i) / n, double(i + 1) / n - f));
  }
  return d;
}

// Two-sample sup distance between empirical CDFs.
inline double ks_distance(const EmpiricalDist& a, const EmpiricalDist& b) {
  const auto& x = a.samples();
  const auto& y = b.samples();
  if (x.empty() || y.empty()) throw EmptySample("KS needs samples");
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= v) ++i;
    while (j < y.size() && y[j] <= v) ++j;
    d = std::max(d, std::abs(double(i) / double(x.size()) -
                             double(j) / double(y.size())));
  }
  return d;
}

// Asymptotic KS p-value (Stephens' small-sample correction).
inline double kolmogorov_pvalue(double d, std::uint64_t n) {
  const double rn = std::sqrt(double(n));
  const double lambda = (rn + 0.12 + 0.11 / rn) * d;
  double p = 0.0;
  for (int j = 1; j <= 200; ++j) {
    const double term =
        2.0 * ((j % 2) ? 1.0 : -1.0) * std::exp(-2.0 * j * j * lambda * lambda);
    p += term;
    if (std::abs(term) < 1e-16) break;
  }
  return std::min(1.0, std::max(0.0, p));
}

// Total variation between two integer histograms (supports aligned at 0).
inline double tv_distance(const EmpiricalDist& a, const EmpiricalDist& b) {
  const std::vector<double> p = a.probabilities();
  const std::vector<double> q = b.probabilities();
  const std::size_t m = std::max(p.size(), q.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    sum += std::abs((i < p.size() ? p[i] : 0.0) - (i < q.size() ? q[i] : 0.0));
  return 0.5 * sum;
}

// Total variation between a histogram and a reference probability vector.
inline double tv_distance(const EmpiricalDist& a,
                          const std::vector<double>& ref_probs) {
  const std::vector<double> p = a.probabilities();
  const std::size_t m = std::max(p.size(), ref_probs.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    sum += std::abs((i < p.size() ? p[i] : 0.0) -
                    (i < ref_probs.size() ? ref_probs[i] : 0.0));
  return 0.5 * sum;
}

// Excursions of a count trace away from zero: the stretches between
// successive zero visits. A trace (0,1,0,2,1,0) has two complete
// excursions, of lengths 2 and 3.
struct ExcursionStats {
  std::uint64_t num_excursions = 0;
  double mean_length = 0.0;
  std::uint64_t max_length = 0;
  std::vector<std::uint64_t> lengths;
};

inline ExcursionStats excursion_stats(const std::vector<int>& trace) {
  ExcursionStats out;
  bool seen_zero = false;
  std::size_t last_zero = 0;
  for (std::size_t t = 0; t < trace.size(); ++t) {
    if (trace[t] != 0) continue;
    if (seen_zero) {
      const std::uint64_t len = t - last_zero;
      out.lengths.push_back(len);
      out.max_length = std::max(out.max_length, len);
    }
    seen_zero = true;
    last_zero = t;
  }
  if (out.lengths.empty())
    throw NoZeroVisit("trace needs two zero visits for an excursion");
  out.num_excursions = out.lengths.size();
  double sum = 0.0;
  for (auto len : out.lengths) sum += double(len);
  out.mean_length = sum / double(out.num_excursions);
  return out;
}

struct BatchMeans {
  double mean = 0.0;
  double stderr_batch = 0.0;
  int batches = 0;
};

// Standard error of a correlated series by the method of batch means.
inline BatchMeans batch_means(const std::vector<double>& series,
                              int batches = 30) {
  if (series.size() < 2) throw EmptySample("need at least two values");
  batches = std::min<int>(batches, int(series.size()));
  if (batches < 2) batches = 2;
  std::vector<double> bmean(std::size_t(batches), 0.0);
  std::vector<std::size_t> blen(std::size_t(batches), 0);
  for (std::size_t i = 0; i < series.size(); ++i) {
    const std::size_t b = i * std::size_t(batches) / series.size();
    bmean[b] += series[i];
    ++blen[b];
  }
  BatchMeans out;
  out.batches = batches;
  double total = 0.0;
  for (int b = 0; b < batches; ++b) {
    total += bmean[std::size_t(b)];
    bmean[std::size_t(b)] /= double(blen[std::size_t(b)]);
  }
  out.mean = total / double(series.size());
  double var = 0.0;
  for (int b = 0; b < batches; ++b) {
    const double d = bmean[std::size_t(b)] - out.mean;
    var += d * d;
  }
  var /= double(batches - 1);
  out.stderr_batch = std::sqrt(var / double(batches));
  return out;
}

namespace detail {

// Regularized upper incomplete gamma Q(a, x): series for small x,
// continued fraction (modified Lentz) otherwise.
inline double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw ConfigError("gamma_q domain");
  if (x == 0.0) return 1.0;
  const double lg = std::lgamma(a);
  if (x < a + 1.0) {
    double term = 1.0 / a, sum = term;
    for (int n = 1; n < 10000; ++n) {
      term *= x / (a + n);
      sum += term;
      if (std::abs(term) < std::abs(sum) * 1e-15) break;
    }
    return 1.0 - sum * std::exp(-x + a * std::log(x) - lg);
  }
  const double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -double(i) * (double(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - lg) * h;
}

}  // namespace detail

inline double chi_square_stat(const std::vector<std::uint64_t>& observed,
                              const std::vector<double>& expected_probs) {
  if (observed.size() != expected_probs.size() || observed.empty())
    throw EmptySample("need matching nonempty bins");
  std::uint64_t total = 0;
  for (auto c : observed) total += c;
  if (total == 0) throw EmptySample("no observations");
  double stat = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double expected = double(total) * expected_probs[i];
    if (!(expected > 0.0)) throw ConfigError("expected bin mass must be > 0");
    const double d = double(observed[i]) - expected;
    stat += d * d / expected;
  }
  return stat;
}

inline double chi_square_pvalue(double stat, int dof) {
  if (dof < 1) throw ConfigError("dof must be >= 1");
  return detail::gamma_q(0.5 * dof, 0.5 * stat);
}

}  // namespace rankdrift
