#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "rankdrift/engine.hpp"
#include "rankdrift/errors.hpp"
#include "rankdrift/selection.hpp"

// The count process C_t(s) = #{values <= s} is itself a Markov chain on
// {0..N}: each step loses the selected ranks at or below the current count
// and gains a Binomial(K, s) number of fresh draws at or below s. This
// header builds those kernels (finite N, the N->infinity limit, and the
// merged birth-death form), solves for stationary laws, and provides the
// closed-form limit objects.

namespace rankdrift {

// Row of the K=2 min-plus-other kernel for a state n >= 1, as probabilities
// at offsets -2..+1. `f` is F_N(n), the chance the second removed rank also
// sits at or below n. Field is double in production and an exact rational
// in the zero-tolerance drift tests.
template <class Field>
std::array<Field, 4> min_plus_other_row(const Field& s, const Field& f) {
  const Field one(1);
  const Field q = one - s;
  const Field two(2);
  return {q * q * f, two * s * q * f + q * q * (one - f),
          s * s * f + two * s * q * (one - f), s * s * (one - f)};
}

// Row for n = 0: nothing can be removed at or below the level, so the count
// moves up by the number of fresh draws landing there (offsets 0..+2).
template <class Field>
std::array<Field, 3> min_plus_other_row0(const Field& s) {
  const Field one(1);
  const Field q = one - s;
  return {q * q, Field(2) * s * q, s * s};
}

class CountingChain {
 public:
  enum class Kind { FiniteN, LimitChain, MergedLimit };

  CountingChain(Kind kind, int states, int band, double s)
      : kind_(kind), states_(states), band_(band), s_(s),
        data_(std::size_t(states) * width(), 0.0) {
    if (states < 1 || band < 1) throw ConfigError("bad chain dimensions");
  }

  Kind kind() const { return kind_; }
  int states() const { return states_; }
  int band() const { return band_; }
  double s_level() const { return s_; }

  double prob(int from, int to) const {
    check_state(from);
    check_state(to);
    if (std::abs(to - from) > band_) return 0.0;
    return data_[index(from, to - from)];
  }

  // Adds probability mass; targets pushed outside {0..states-1} are folded
  // into staying put, so boundary rows remain stochastic.
  void add_prob(int from, int to, double p) {
    check_state(from);
    if (to < 0 || to >= states_) to = from;
    if (std::abs(to - from) > band_) throw ConfigError("entry outside band");
    data_[index(from, to - from)] += p;
  }

  double row_sum(int from) const {
    check_state(from);
    double sum = 0.0;
    for (int j = -band_; j <= band_; ++j) sum += data_[index(from, j)];
    return sum;
  }

  // Expected one-step increment from `from`.
  double drift(int from) const {
    check_state(from);
    double d = 0.0;
    for (int j = -band_; j <= band_; ++j) d += j * data_[index(from, j)];
    return d;
  }

 private:
  int width() const { return 2 * band_ + 1; }
  std::size_t index(int from, int offset) const {
    return std::size_t(from) * std::size_t(width()) +
           std::size_t(offset + band_);
  }
  void check_state(int n) const {
    if (n < 0 || n >= states_) throw RankOutOfRange("state outside chain");
  }

  Kind kind_;
  int states_;
  int band_;
  double s_;
  std::vector<double> data_;
};

namespace detail {
inline void check_rows_stochastic(const CountingChain& chain) {
  for (int n = 0; n < chain.states(); ++n)
    if (std::abs(chain.row_sum(n) - 1.0) > 1e-12)
      throw Error("kernel row does not sum to one");
}
}  // namespace detail

// Validates an F table for the K=2 min-plus-other family: F[n] is the CDF
// of the second removed rank over {2..N}, so F[0] = F[1] = 0, nondecreasing,
// F[N] = 1. Indexing is direct (size N+1).
inline void check_f_table(int n_points, const std::vector<double>& f) {
  if (int(f.size()) != n_points + 1)
    throw BadFTable("F table must have N+1 entries (index 0..N)");
  if (f[0] != 0.0 || f[1] != 0.0)
    throw BadFTable("F(0) and F(1) must be zero");
  for (int n = 1; n <= n_points; ++n) {
    if (!(f[std::size_t(n)] >= f[std::size_t(n) - 1]))
      throw BadFTable("F table must be nondecreasing");
  }
  if (std::abs(f[std::size_t(n_points)] - 1.0) > 1e-12)
    throw BadFTable("F(N) must be one");
}

// F table for the min-plus-uniform model: F(n) = (n-1)/(N-1).
inline std::vector<double> min_plus_uniform_f_table(int n_points) {
  if (n_points < 2) throw BadFTable("need at least two points");
  std::vector<double> f(std::size_t(n_points) + 1, 0.0);
  for (int n = 1; n <= n_points; ++n)
    f[std::size_t(n)] = double(n - 1) / double(n_points - 1);
  return f;
}

// Exact finite-N count kernel for the K=2 min-plus-other family.
inline CountingChain min_plus_other_kernel(int n_points, double s,
                                           const std::vector<double>& f) {
  if (!(s > 0.0 && s < 1.0)) throw ConfigError("s must be in (0,1)");
  check_f_table(n_points, f);
  CountingChain chain(CountingChain::Kind::FiniteN, n_points + 1, 2, s);
  const auto r0 = min_plus_other_row0<double>(s);
  for (int j = 0; j <= 2; ++j) chain.add_prob(0, j, r0[std::size_t(j)]);
  for (int n = 1; n <= n_points; ++n) {
    const auto row = min_plus_other_row<double>(s, f[std::size_t(n)]);
    for (int j = 0; j < 4; ++j)
      chain.add_prob(n, n + j - 2, row[std::size_t(j)]);
  }
  detail::check_rows_stochastic(chain);
  return chain;
}

// Finite-N count kernel for any selection model: the number of removed
// ranks at or below n is distributed by the table, the number of fresh
// draws at or below the level is Binomial(K, s), and the two are
// independent.
inline CountingChain kernel_from_model(const SelectionModel& model, double s) {
  if (!(s > 0.0 && s < 1.0)) throw ConfigError("s must be in (0,1)");
  const int n_points = model.n_points();
  const int k = model.k_replace();

  std::vector<double> binom(std::size_t(k) + 1, 0.0);
  for (int b = 0; b <= k; ++b) {
    double term = 1.0;
    for (int i = 0; i < b; ++i) term *= double(k - i) / double(i + 1);
    binom[std::size_t(b)] =
        term * std::pow(s, b) * std::pow(1.0 - s, k - b);
  }

  CountingChain chain(CountingChain::Kind::FiniteN, n_points + 1, k, s);
  std::vector<double> removal_pmf(std::size_t(k) + 1);
  for (int n = 0; n <= n_points; ++n) {
    std::fill(removal_pmf.begin(), removal_pmf.end(), 0.0);
    for (const auto& entry : model.gamma_table()) {
      int at_or_below = 0;
      for (int r : entry.ranks) at_or_below += (r <= n);
      removal_pmf[std::size_t(at_or_below)] += entry.weight;
    }
    for (int a = 0; a <= k; ++a) {
      if (removal_pmf[std::size_t(a)] == 0.0) continue;
      for (int b = 0; b <= k; ++b)
        chain.add_prob(n, n - a + b,
                       removal_pmf[std::size_t(a)] * binom[std::size_t(b)]);
    }
  }
  detail::check_rows_stochastic(chain);
  return chain;
}

// Default truncation for the limit chain: deep enough that the geometric
// tail beyond the cap is ~1e-10.
inline int default_limit_cap(double s) {
  const double ratio = (s / (1.0 - s)) * (s / (1.0 - s));
  const double logr = std::abs(std::log(ratio));
  if (!(logr > 0.0))
    throw ConfigError("no default cap at s = 1/2; pass one explicitly");
  return std::max(8, int(std::ceil(24.0 / logr)));
}

// N -> infinity count kernel (flat selection tail): nearest-neighbor walk
// with the n = 0 row jumping to {0,1,2}. Truncated at `cap` states with the
// overflow reflected into staying put.
inline CountingChain limit_kernel(double s,
                                  std::optional<int> cap = std::nullopt) {
  if (!(s > 0.0 && s < 1.0)) throw ConfigError("s must be in (0,1)");
  const int states = (cap ? *cap : default_limit_cap(s)) + 1;
  if (states < 3) throw ConfigError("cap too small");
  CountingChain chain(CountingChain::Kind::LimitChain, states, 2, s);
  const double q = 1.0 - s;
  chain.add_prob(0, 0, q * q);
  chain.add_prob(0, 1, 2.0 * s * q);
  chain.add_prob(0, 2, s * s);
  for (int n = 1; n < states; ++n) {
    chain.add_prob(n, n - 1, q * q);
    chain.add_prob(n, n, 2.0 * s * q);
    chain.add_prob(n, n + 1, s * s);  // folds into (n,n) at the top row
  }
  detail::check_rows_stochastic(chain);
  return chain;
}

enum class Provenance { ExactSolve, ClosedForm, Empirical };

struct StationaryDist {
  std::vector<double> probs;
  double s = 0.0;
  Provenance provenance = Provenance::ExactSolve;
  double mean = 0.0;
};

namespace detail {

// Strongly connected components of the kernel's support graph, Kosaraju
// with explicit stacks. Returns the component id per state.
inline std::vector<int> components(const CountingChain& chain,
                                   int& component_count) {
  const int n = chain.states();
  const int band = chain.band();
  auto forward = [&](int v, int e) {  // e-th potential neighbor of v
    const int to = v - band + e;
    if (to < 0 || to >= n || to == v) return -1;
    return chain.prob(v, to) > 0.0 ? to : -1;
  };
  auto backward = [&](int v, int e) {
    const int from = v - band + e;
    if (from < 0 || from >= n || from == v) return -1;
    return chain.prob(from, v) > 0.0 ? from : -1;
  };
  const int degree = 2 * band + 1;

  std::vector<int> order;
  order.reserve(std::size_t(n));
  std::vector<char> seen(std::size_t(n), 0);
  std::vector<std::pair<int, int>> stack;
  for (int start = 0; start < n; ++start) {
    if (seen[std::size_t(start)]) continue;
    seen[std::size_t(start)] = 1;
    stack.push_back({start, 0});
    while (!stack.empty()) {
      auto& [v, e] = stack.back();
      if (e == degree) {
        order.push_back(v);
        stack.pop_back();
        continue;
      }
      const int to = forward(v, e++);
      if (to >= 0 && !seen[std::size_t(to)]) {
        seen[std::size_t(to)] = 1;
        stack.push_back({to, 0});
      }
    }
  }

  std::vector<int> comp(std::size_t(n), -1);
  component_count = 0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (comp[std::size_t(*it)] >= 0) continue;
    std::vector<int> dfs{*it};
    comp[std::size_t(*it)] = component_count;
    while (!dfs.empty()) {
      const int v = dfs.back();
      dfs.pop_back();
      for (int e = 0; e < degree; ++e) {
        const int from = backward(v, e);
        if (from >= 0 && comp[std::size_t(from)] < 0) {
          comp[std::size_t(from)] = component_count;
          dfs.push_back(from);
        }
      }
    }
    ++component_count;
  }
  return comp;
}

// Stationary law of an irreducible chain on the contiguous states [lo, hi]
// by the GTH algorithm specialized to the band structure. GTH never
// subtracts, so geometric tails come out to full relative accuracy.
inline std::vector<double> gth_band(const CountingChain& chain, int lo,
                                    int hi) {
  const int m = hi - lo + 1;
  const int band = chain.band();
  const int width = 2 * band + 1;
  std::vector<double> w(std::size_t(m) * std::size_t(width), 0.0);
  auto at = [&](int i, int j) -> double& {
    return w[std::size_t(i) * std::size_t(width) +
             std::size_t(j - i + band)];
  };
  for (int i = 0; i < m; ++i)
    for (int j = std::max(0, i - band); j <= std::min(m - 1, i + band); ++j)
      at(i, j) = chain.prob(lo + i, lo + j);

  for (int k = m - 1; k >= 1; --k) {
    double below = 0.0;
    for (int j = std::max(0, k - band); j < k; ++j) below += at(k, j);
    if (!(below > 0.0)) throw ReducibleChain("no unique stationary law");
    for (int i = std::max(0, k - band); i < k; ++i) {
      const double scaled = at(i, k) / below;
      if (scaled == 0.0) continue;
      at(i, k) = scaled;
      for (int j = std::max(0, k - band); j < k; ++j)
        at(i, j) += scaled * at(k, j);
    }
  }

  std::vector<double> pi(std::size_t(m), 0.0);
  pi[0] = 1.0;
  double scale_guard = 1.0;
  for (int k = 1; k < m; ++k) {
    double acc = 0.0;
    for (int i = std::max(0, k - band); i < k; ++i)
      acc += pi[std::size_t(i)] * at(i, k);
    pi[std::size_t(k)] = acc;
    if (acc > 1e270) {  // rescale to dodge overflow on growing profiles
      for (int i = 0; i <= k; ++i) pi[std::size_t(i)] /= acc;
      scale_guard *= acc;
      (void)scale_guard;
    }
  }
  double total = 0.0;
  for (double p : pi) total += p;
  for (double& p : pi) p /= total;
  return pi;
}

}  // namespace detail

// Stationary distribution of the kernel. The chain may have transient
// states (they get probability zero); what it must have is exactly one
// closed communicating class, else no unique stationary law exists and
// ReducibleChain is thrown.
inline StationaryDist solve_stationary(const CountingChain& chain) {
  const int n = chain.states();
  int component_count = 0;
  const std::vector<int> comp = detail::components(chain, component_count);

  // A component is closed when no positive entry leaves it.
  std::vector<char> closed(std::size_t(component_count), 1);
  for (int v = 0; v < n; ++v)
    for (int to = std::max(0, v - chain.band());
         to <= std::min(n - 1, v + chain.band()); ++to)
      if (chain.prob(v, to) > 0.0 && comp[std::size_t(to)] != comp[std::size_t(v)])
        closed[std::size_t(comp[std::size_t(v)])] = 0;

  int closed_id = -1;
  for (int c = 0; c < component_count; ++c) {
    if (!closed[std::size_t(c)]) continue;
    if (closed_id >= 0)
      throw ReducibleChain("multiple closed classes; stationary law not unique");
    closed_id = c;
  }
  if (closed_id < 0) throw ReducibleChain("no closed class found");

  int lo = n, hi = -1;
  int class_size = 0;
  for (int v = 0; v < n; ++v) {
    if (comp[std::size_t(v)] != closed_id) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    ++class_size;
  }
  if (class_size != hi - lo + 1)
    throw ReducibleChain("closed class is not a contiguous state range");

  StationaryDist out;
  out.s = chain.s_level();
  out.provenance = Provenance::ExactSolve;
  out.probs.assign(std::size_t(n), 0.0);
  if (class_size == 1) {
    out.probs[std::size_t(lo)] = 1.0;
  } else {
    const std::vector<double> pi = detail::gth_band(chain, lo, hi);
    for (int i = 0; i < class_size; ++i)
      out.probs[std::size_t(lo + i)] = pi[std::size_t(i)];
  }
  for (int v = 0; v < n; ++v) out.mean += double(v) * out.probs[std::size_t(v)];
  return out;
}

// Closed-form stationary law of the limit chain for s < 1/2:
//   pi(0) = 1-2s, pi(1) = 2s - r, pi(n) = (1-r) r^(n-1) for n >= 2,
// with r = (s/(1-s))^2; mean = 2s + s^2/(1-2s). Probabilities are stored up
// to a 1e-16 tail truncation; the mean uses the exact formula.
inline StationaryDist closed_form_pi(double s) {
  if (!(s > 0.0)) throw ConfigError("s must be positive");
  if (s >= 0.5) throw Supercritical("closed form exists only for s < 1/2");
  const double ratio = (s / (1.0 - s)) * (s / (1.0 - s));
  StationaryDist out;
  out.s = s;
  out.provenance = Provenance::ClosedForm;
  out.probs.push_back(1.0 - 2.0 * s);
  out.probs.push_back(2.0 * s - ratio);
  double term = (1.0 - ratio) * ratio;  // pi(2)
  while (term >= 1e-16 && out.probs.size() < 200000) {
    out.probs.push_back(term);
    term *= ratio;
  }
  out.mean = 2.0 * s + s * s / (1.0 - 2.0 * s);
  return out;
}

// Merging states {0,1} of the limit chain gives a clean birth-death chain
// whose stationary law is geometric by detailed balance. The two original
// states are recovered from the merged mass via the no-recent-arrival
// split: pi(0) = (1-s)^2 * (pi(0)+pi(1)).
struct MergedReduction {
  CountingChain kernel;
  std::vector<double> pi;  // stationary of the merged chain
  double pi0 = 0.0;        // disentangled original pi(0)
  double pi1 = 0.0;        // disentangled original pi(1)
};

inline MergedReduction merged_chain_reduction(double s,
                                              std::optional<int> cap =
                                                  std::nullopt) {
  if (!(s > 0.0 && s < 1.0)) throw ConfigError("s must be in (0,1)");
  if (s >= 0.5)
    throw Supercritical("merged reduction solved only for s < 1/2");
  const int states = (cap ? *cap : default_limit_cap(s)) + 1;
  if (states < 2) throw ConfigError("cap too small");
  const double q = 1.0 - s;

  CountingChain kernel(CountingChain::Kind::MergedLimit, states, 1, s);
  kernel.add_prob(0, 0, 1.0 - s * s);
  kernel.add_prob(0, 1, s * s);
  for (int n = 1; n < states; ++n) {
    kernel.add_prob(n, n - 1, q * q);
    kernel.add_prob(n, n, 2.0 * s * q);
    kernel.add_prob(n, n + 1, s * s);  // reflected at the top row
  }
  detail::check_rows_stochastic(kernel);

  MergedReduction out{std::move(kernel), {}, 0.0, 0.0};
  const double ratio = (s / q) * (s / q);
  out.pi.resize(std::size_t(states));
  double term = 1.0, total = 0.0;
  for (int n = 0; n < states; ++n, term *= ratio) {
    out.pi[std::size_t(n)] = term;
    total += term;
  }
  for (double& p : out.pi) p /= total;
  out.pi0 = q * q * out.pi[0];
  out.pi1 = out.pi[0] - out.pi0;
  return out;
}

// Mean first return time of the limit count chain to zero: 1/(1-2s) below
// the critical level, infinite at or above it.
inline double return_time_expectation(double s) {
  if (!(s > 0.0 && s < 1.0)) throw ConfigError("s must be in (0,1)");
  if (s >= 0.5) return std::numeric_limits<double>::infinity();
  return 1.0 / (1.0 - 2.0 * s);
}

struct ReturnTimeEstimate {
  double mean = 0.0;
  double stderr_batch = 0.0;
  std::uint64_t excursions = 0;
};

// Monte Carlo mean return time to count zero at level s. The landscape
// starts conditioned on count_at(s) = 0 (every value drawn from the law
// restricted above s), then excursion lengths between successive zero
// visits are averaged. Throws TrialBudgetExceeded if `step_cap` steps pass
// before `excursions` completed excursions are seen.
inline ReturnTimeEstimate estimate_return_time(
    const SelectionModel& model, const ReplacementLaw& law, double s,
    std::uint64_t excursions, std::uint64_t step_cap, Rng& rng,
    int batches = 30) {
  if (!(s > law.support_lo() && s < law.support_hi()))
    throw ConfigError("level outside law support");
  if (excursions == 0) throw ConfigError("need at least one excursion");

  const double c = law.cdf(s);
  std::vector<double> values(std::size_t(model.n_points()));
  for (auto& v : values) {
    do {
      v = law.draw_value(c + rng.next_unit() * (1.0 - c));
    } while (v <= s);
  }
  Landscape landscape = Landscape::from_values(values, law);

  std::vector<double> lengths;
  lengths.reserve(std::size_t(excursions));
  std::uint64_t current = 0, total_steps = 0;
  while (lengths.size() < excursions) {
    if (total_steps >= step_cap)
      throw TrialBudgetExceeded("step cap hit before excursion budget");
    step(landscape, model, law, rng);
    ++total_steps;
    ++current;
    if (landscape.count_at(s) == 0) {
      lengths.push_back(double(current));
      current = 0;
    }
  }

  ReturnTimeEstimate out;
  out.excursions = excursions;
  double sum = 0.0;
  for (double len : lengths) sum += len;
  out.mean = sum / double(lengths.size());

  const int b = std::min<int>(batches, int(lengths.size()));
  std::vector<double> bmean(std::size_t(b), 0.0);
  std::vector<std::size_t> blen(std::size_t(b), 0);
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    const std::size_t which = i * std::size_t(b) / lengths.size();
    bmean[which] += lengths[i];
    ++blen[which];
  }
  double var = 0.0;
  for (int i = 0; i < b; ++i) {
    bmean[std::size_t(i)] /= double(blen[std::size_t(i)]);
    const double d = bmean[std::size_t(i)] - out.mean;
    var += d * d;
  }
  var /= double(b - 1);
  out.stderr_batch = std::sqrt(var / double(b));
  return out;
}

}  // namespace rankdrift
