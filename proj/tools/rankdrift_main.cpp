// rankdrift command-line tool.
//
// Subcommands:
//   simulate   run one scenario, write its trace or point cloud
//   analyze    exact and closed-form stationary tables over an s grid
//   verify     run a scenario's diagnostics, write a JSON report
//   sweep      time-averaged counts over an (N, s) grid, in parallel
//
// Exit codes: 0 success, 1 diagnostic failure, 2 configuration error.

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rankdrift/rankdrift.hpp"

namespace rd = rankdrift;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Option plumbing. Flags land in strings first so that a JSON config file
// can fill anything the command line left unset; the merged document is the
// effective config and is echoed into every output file.

struct Opts {
  std::string config_path;
  std::string scenario;
  std::string n_text;
  std::uint64_t steps = 0;
  std::uint64_t burn_in = 0;
  std::uint64_t seed = 0;
  std::string s_grid_text;
  std::string order_stats_text;
  std::string out;
  std::string format;
  int jobs = 0;
  std::uint64_t every = 0;
  int k_rank = 0;
  double p = 0.0;
};

void add_options(CLI::App* cmd, Opts& o) {
  cmd->add_option("--config", o.config_path, "JSON config file; flags override");
  cmd->add_option("--scenario", o.scenario, "scenario name");
  cmd->add_option("--n", o.n_text, "number of points (sweep: comma list)");
  cmd->add_option("--steps", o.steps, "steps to run");
  cmd->add_option("--burnin", o.burn_in, "steps discarded before recording");
  cmd->add_option("--seed", o.seed, "RNG seed");
  cmd->add_option("--s-grid", o.s_grid_text,
                  "levels, comma list or lo:hi:step");
  cmd->add_option("--order-stats", o.order_stats_text,
                  "order-statistic ranks, comma list");
  cmd->add_option("--out", o.out, "output file path");
  cmd->add_option("--format", o.format, "csv or json");
  cmd->add_option("--jobs", o.jobs, "worker threads (sweep)");
  cmd->add_option("--every", o.every, "record every this many steps");
  cmd->add_option("--k-rank", o.k_rank, "target rank for warmup_kth");
  cmd->add_option("--p", o.p, "beauty-contest factor");
}

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw rd::ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw rd::ConfigError("bad config JSON: " + std::string(e.what()));
  }
  if (!j.is_object()) throw rd::ConfigError("config must be a JSON object");
  return j;
}

// Effective config: command defaults, then the config file, then flags
// actually given on this command line.
json merge_config(const CLI::App* cmd, const Opts& o, const json& defaults) {
  json merged = defaults;
  if (!o.config_path.empty()) merged.update(load_config_file(o.config_path));
  auto put = [&](const char* flag, const char* key, json value) {
    if (cmd->count(flag) > 0) merged[key] = std::move(value);
  };
  put("--scenario", "scenario", o.scenario);
  put("--n", "n", o.n_text);
  put("--steps", "steps", o.steps);
  put("--burnin", "burnin", o.burn_in);
  put("--seed", "seed", o.seed);
  put("--s-grid", "s_grid", o.s_grid_text);
  put("--order-stats", "order_stats", o.order_stats_text);
  put("--out", "out", o.out);
  put("--format", "format", o.format);
  put("--jobs", "jobs", o.jobs);
  put("--every", "every", o.every);
  put("--k-rank", "k_rank", o.k_rank);
  put("--p", "p", o.p);
  return merged;
}

bool has(const json& cfg, const char* key) {
  return cfg.contains(key) && !cfg[key].is_null();
}

std::uint64_t get_u64(const json& cfg, const char* key) {
  if (!cfg[key].is_number())
    throw rd::ConfigError(std::string(key) + " must be a number");
  return cfg[key].get<std::uint64_t>();
}

// "0.1,0.25,0.4" or "0.1:0.5:0.05" (inclusive); a JSON array also works.
std::vector<double> parse_grid(const json& value, const char* key) {
  if (value.is_array()) return value.get<std::vector<double>>();
  if (!value.is_string())
    throw rd::ConfigError(std::string(key) + " must be a string or array");
  const std::string text = value.get<std::string>();
  std::vector<double> out;
  if (text.empty()) return out;
  if (text.find(':') != std::string::npos) {
    double lo, hi, step;
    char c1, c2;
    std::istringstream in(text);
    if (!(in >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' ||
        step <= 0.0)
      throw rd::ConfigError(std::string(key) + ": bad range " + text);
    for (double s = lo; s <= hi + 1e-12; s += step) out.push_back(s);
    return out;
  }
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw rd::ConfigError(std::string(key) + ": bad number " + item);
    }
  }
  return out;
}

std::vector<int> parse_int_list(const json& value, const char* key) {
  if (value.is_array()) return value.get<std::vector<int>>();
  if (value.is_number_integer()) return {value.get<int>()};
  if (!value.is_string())
    throw rd::ConfigError(std::string(key) + " must be string, int, or array");
  std::vector<int> out;
  std::istringstream in(value.get<std::string>());
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw rd::ConfigError(std::string(key) + ": bad integer " + item);
    }
  }
  return out;
}

int parse_single_n(const json& cfg) {
  if (!has(cfg, "n")) throw rd::ConfigError("--n is required");
  const std::vector<int> ns = parse_int_list(cfg["n"], "n");
  if (ns.size() != 1) throw rd::ConfigError("--n must be a single integer");
  return ns[0];
}

std::string get_format(const json& cfg) {
  const std::string f = cfg.value("format", "csv");
  if (f != "csv" && f != "json")
    throw rd::ConfigError("format must be csv or json");
  return f;
}

std::string require_out(const json& cfg) {
  if (!has(cfg, "out")) throw rd::ConfigError("--out is required");
  return cfg["out"].get<std::string>();
}

std::string config_comment(const json& cfg) {
  return "# config: " + cfg.dump() + "\n";
}

int default_jobs(const json& cfg) {
  if (has(cfg, "jobs") && cfg["jobs"].get<int>() > 0)
    return cfg["jobs"].get<int>();
  if (const char* env = std::getenv("RANKDRIFT_JOBS")) {
    const int j = std::atoi(env);
    if (j > 0) return j;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? int(hw) : 1;
}

// Scenario parameters: registry defaults overridden by whatever the merged
// config carries.
rd::ScenarioParams scenario_params(const rd::ScenarioSpec& spec,
                                   const json& cfg, bool need_seed) {
  rd::ScenarioParams pr = spec.defaults;
  if (has(cfg, "n")) pr.n = parse_single_n(cfg);
  if (has(cfg, "steps")) pr.steps = get_u64(cfg, "steps");
  if (has(cfg, "burnin")) pr.burn_in = get_u64(cfg, "burnin");
  if (has(cfg, "seed"))
    pr.seed = get_u64(cfg, "seed");
  else if (need_seed)
    throw rd::ConfigError("--seed is required");
  if (has(cfg, "k_rank")) pr.k = cfg["k_rank"].get<int>();
  if (has(cfg, "p")) pr.p = cfg["p"].get<double>();
  if (pr.steps <= pr.burn_in)
    throw rd::ConfigError("steps must exceed burn-in");
  return pr;
}

// ---------------------------------------------------------------------------
// simulate

json schedule_to_json(const rd::Schedule& sch) {
  json j;
  j["burnin"] = sch.burn_in;
  j["every"] = sch.every;
  j["count_levels"] = sch.count_levels;
  j["order_stat_ranks"] = sch.order_stat_ranks;
  j["typical_point"] = sch.typical_point;
  return j;
}

void write_trace(const json& cfg, const rd::SelectionModel& model,
                 const rd::Schedule& sch, std::uint64_t seed,
                 const rd::Trace& trace, const std::string& out,
                 const std::string& format) {
  if (format == "csv") {
    rd::write_text_file(out, config_comment(cfg) + trace.to_csv());
  } else {
    json j;
    j["config"] = cfg;
    j["seed"] = seed;
    j["model"] = model.to_json();
    j["schedule"] = schedule_to_json(sch);
    json records = json::array();
    for (const auto& r : trace.records)
      records.push_back(
          {{"step", r.step}, {"observable", r.observable}, {"value", r.value}});
    j["records"] = std::move(records);
    rd::write_text_file(out, j.dump(2) + "\n");
  }
}

void print_trace_summary(const rd::Trace& trace) {
  std::vector<std::string> names;
  std::vector<double> sums;
  std::vector<std::uint64_t> counts;
  for (const auto& r : trace.records) {
    std::size_t i = 0;
    while (i < names.size() && names[i] != r.observable) ++i;
    if (i == names.size()) {
      names.push_back(r.observable);
      sums.push_back(0.0);
      counts.push_back(0);
    }
    sums[i] += r.value;
    ++counts[i];
  }
  for (std::size_t i = 0; i < names.size(); ++i)
    std::cout << names[i] << ": records=" << counts[i]
              << " mean=" << rd::format_double(sums[i] / double(counts[i]))
              << "\n";
}

int cmd_simulate(const json& cfg) {
  const std::string format = get_format(cfg);
  const std::string out = require_out(cfg);

  // Inline model: run it directly under the uniform replacement law.
  if (has(cfg, "model")) {
    const rd::SelectionModel model = rd::SelectionModel::from_json(cfg["model"]);
    if (!has(cfg, "seed")) throw rd::ConfigError("--seed is required");
    const std::uint64_t seed = get_u64(cfg, "seed");
    const std::uint64_t steps =
        has(cfg, "steps") ? get_u64(cfg, "steps") : 100000;
    rd::Schedule sch;
    sch.burn_in = has(cfg, "burnin") ? get_u64(cfg, "burnin") : steps / 10;
    sch.every = has(cfg, "every") ? get_u64(cfg, "every") : 10;
    if (has(cfg, "s_grid")) sch.count_levels = parse_grid(cfg["s_grid"], "s_grid");
    if (has(cfg, "order_stats"))
      sch.order_stat_ranks = parse_int_list(cfg["order_stats"], "order_stats");
    sch.typical_point = true;
    if (steps <= sch.burn_in) throw rd::ConfigError("steps must exceed burn-in");
    rd::Rng rng(seed);
    const rd::ReplacementLaw law = rd::ReplacementLaw::uniform01();
    rd::Landscape landscape =
        rd::Landscape::iid_uniform(model.n_points(), rng, law);
    const rd::Trace trace = rd::run(landscape, model, law, steps, sch, rng);
    write_trace(cfg, model, sch, seed, trace, out, format);
    print_trace_summary(trace);
    std::cout << "wrote " << out << "\n";
    return 0;
  }

  if (!has(cfg, "scenario")) throw rd::ConfigError("--scenario is required");
  const rd::ScenarioSpec& spec =
      rd::find_scenario(cfg["scenario"].get<std::string>());
  const rd::ScenarioParams pr = scenario_params(spec, cfg, true);

  switch (spec.kind) {
    case rd::ScenarioKind::WarmupKth:
    case rd::ScenarioKind::MinPlusUniform:
    case rd::ScenarioKind::MinPlusMax: {
      const rd::SelectionModel model = rd::scenario_model(spec, pr);
      const rd::ReplacementLaw law = rd::scenario_law(spec);
      rd::Schedule sch;
      sch.burn_in = pr.burn_in;
      sch.every = has(cfg, "every") ? get_u64(cfg, "every") : 10;
      if (has(cfg, "s_grid"))
        sch.count_levels = parse_grid(cfg["s_grid"], "s_grid");
      if (has(cfg, "order_stats"))
        sch.order_stat_ranks = parse_int_list(cfg["order_stats"], "order_stats");
      sch.typical_point = true;
      rd::Rng rng(pr.seed);
      rd::Landscape landscape = rd::Landscape::iid_uniform(pr.n, rng, law);
      const rd::Trace trace = rd::run(landscape, model, law, pr.steps, sch, rng);
      write_trace(cfg, model, sch, pr.seed, trace, out, format);
      print_trace_summary(trace);
      break;
    }
    case rd::ScenarioKind::PlanarNorm: {
      rd::Rng rng(pr.seed);
      rd::PlanarNormSystem system(pr.n, rng);
      for (std::uint64_t t = 0; t < pr.steps; ++t) system.step(rng);
      const std::vector<rd::PlanarPoint> cloud = system.snapshot();
      if (format == "csv") {
        std::string body = config_comment(cfg) + "x,y\n";
        for (const auto& p : cloud)
          body += rd::format_double(p.x) + "," + rd::format_double(p.y) + "\n";
        rd::write_text_file(out, body);
      } else {
        json j;
        j["config"] = cfg;
        json pts = json::array();
        for (const auto& p : cloud) pts.push_back({{"x", p.x}, {"y", p.y}});
        j["points"] = std::move(pts);
        rd::write_text_file(out, j.dump(2) + "\n");
      }
      std::cout << "points=" << cloud.size() << " count_within(0.7979)="
                << system.count_within(std::sqrt(2.0 / 3.14159265358979323846))
                << "\n";
      break;
    }
    case rd::ScenarioKind::PartialOrder: {
      rd::Rng rng(pr.seed);
      rd::PartialOrderSystem system(pr.n, rng);
      for (std::uint64_t t = 0; t < pr.steps; ++t) system.step(rng);
      std::vector<rd::Point2> minimal = system.minimal_points();
      auto is_minimal = [&](const rd::Point2& p) {
        for (const auto& m : minimal)
          if (m.x == p.x && m.y == p.y) return true;
        return false;
      };
      const std::vector<rd::Point2> cloud = system.all_points();
      if (format == "csv") {
        std::string body = config_comment(cfg) + "x,y,minimal\n";
        for (const auto& p : cloud)
          body += rd::format_double(p.x) + "," + rd::format_double(p.y) + "," +
                  (is_minimal(p) ? "1" : "0") + "\n";
        rd::write_text_file(out, body);
      } else {
        json j;
        j["config"] = cfg;
        json pts = json::array();
        for (const auto& p : cloud)
          pts.push_back(
              {{"x", p.x}, {"y", p.y}, {"minimal", is_minimal(p)}});
        j["points"] = std::move(pts);
        rd::write_text_file(out, j.dump(2) + "\n");
      }
      std::cout << "points=" << cloud.size()
                << " minimal=" << system.minimal_count()
                << " degenerate_steps=" << system.degenerate_steps() << "\n";
      break;
    }
    case rd::ScenarioKind::BeautyContest: {
      rd::Rng rng(pr.seed);
      rd::BeautyContestSystem system(pr.n, pr.p, rng);
      for (std::uint64_t t = 0; t < pr.steps; ++t) system.step(rng);
      const std::vector<double> values = system.snapshot();
      if (format == "csv") {
        std::string body = config_comment(cfg) + "value\n";
        for (double v : values) body += rd::format_double(v) + "\n";
        rd::write_text_file(out, body);
      } else {
        json j;
        j["config"] = cfg;
        j["values"] = values;
        rd::write_text_file(out, j.dump(2) + "\n");
      }
      std::cout << "values=" << values.size()
                << " mean=" << rd::format_double(system.mean()) << "\n";
      break;
    }
  }
  std::cout << "wrote " << out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// analyze

int cmd_analyze(const json& cfg) {
  const std::string format = get_format(cfg);
  const std::string out = require_out(cfg);
  if (!has(cfg, "s_grid")) throw rd::ConfigError("--s-grid is required");
  const std::vector<double> grid = parse_grid(cfg["s_grid"], "s_grid");
  const int n = has(cfg, "n") ? parse_single_n(cfg) : 200;
  std::vector<int> ranks;
  if (has(cfg, "order_stats"))
    ranks = parse_int_list(cfg["order_stats"], "order_stats");

  const std::vector<double> f = rd::min_plus_uniform_f_table(n);
  const double s_star = 0.5;

  json stationary = json::array();
  for (double s : grid) {
    if (!(s > 0.0 && s < 1.0))
      throw rd::ConfigError("s-grid values must lie in (0,1)");
    json row;
    row["s"] = s;
    const bool super = s >= s_star;
    row["supercritical"] = super;
    const rd::CountingChain chain = rd::min_plus_other_kernel(n, s, f);
    const rd::StationaryDist exact = rd::solve_stationary(chain);
    row["mean_exact"] = exact.mean;
    for (int i = 0; i < 3; ++i)
      row["pi" + std::to_string(i) + "_exact"] = exact.probs[std::size_t(i)];
    if (!super) {
      const rd::StationaryDist closed = rd::closed_form_pi(s);
      row["mean_closed"] = closed.mean;
      for (int i = 0; i < 3; ++i)
        row["pi" + std::to_string(i) + "_closed"] =
            i < int(closed.probs.size()) ? closed.probs[std::size_t(i)] : 0.0;
    } else {
      row["mean_closed"] = nullptr;
      for (int i = 0; i < 3; ++i)
        row["pi" + std::to_string(i) + "_closed"] = nullptr;
    }
    row["v_limit"] = rd::limit_fraction_below(s, s_star);
    for (int r : ranks)
      row["h@" + std::to_string(r)] = rd::order_stat_limit_cdf(r, s);
    stationary.push_back(std::move(row));
  }

  json moments = json::array();
  for (int r : ranks)
    for (int k = 1; k <= 4; ++k)
      moments.push_back({{"n", r},
                         {"k", k},
                         {"moment", rd::order_stat_moment(r, k)}});

  std::vector<std::string> columns = {"s",         "supercritical",
                                      "mean_exact", "mean_closed",
                                      "v_limit",   "pi0_exact",
                                      "pi1_exact", "pi2_exact",
                                      "pi0_closed", "pi1_closed",
                                      "pi2_closed"};
  for (int r : ranks) columns.push_back("h@" + std::to_string(r));

  if (format == "csv") {
    std::string body = config_comment(cfg);
    for (std::size_t i = 0; i < columns.size(); ++i)
      body += (i ? "," : "") + columns[i];
    body += "\n";
    for (const auto& row : stationary) {
      for (std::size_t i = 0; i < columns.size(); ++i) {
        if (i) body += ',';
        const json& cell = row[columns[i]];
        if (cell.is_null())
          ;  // empty field
        else if (cell.is_boolean())
          body += cell.get<bool>() ? "1" : "0";
        else
          body += rd::format_double(cell.get<double>());
      }
      body += '\n';
    }
    rd::write_text_file(out, body);
    if (!ranks.empty()) {
      std::string mpath = out;
      const std::size_t dot = mpath.rfind('.');
      mpath.insert(dot == std::string::npos ? mpath.size() : dot, ".moments");
      std::string mbody = config_comment(cfg) + "n,k,moment\n";
      for (const auto& m : moments)
        mbody += std::to_string(m["n"].get<int>()) + "," +
                 std::to_string(m["k"].get<int>()) + "," +
                 rd::format_double(m["moment"].get<double>()) + "\n";
      rd::write_text_file(mpath, mbody);
      std::cout << "wrote " << mpath << "\n";
    }
  } else {
    json j;
    j["config"] = cfg;
    j["stationary"] = std::move(stationary);
    j["moments"] = std::move(moments);
    rd::write_text_file(out, j.dump(2) + "\n");
  }
  std::cout << "wrote " << out << " (" << grid.size() << " rows)\n";
  return 0;
}

// ---------------------------------------------------------------------------
// verify

int cmd_verify(const json& cfg) {
  const std::string out = has(cfg, "out") ? cfg["out"].get<std::string>()
                                          : std::string("verify_report.json");
  std::vector<const rd::ScenarioSpec*> specs;
  const std::string which =
      has(cfg, "scenario") ? cfg["scenario"].get<std::string>() : "all";
  if (which == "all") {
    for (const auto& s : rd::scenarios()) specs.push_back(&s);
  } else {
    specs.push_back(&rd::find_scenario(which));
  }

  bool all_pass = true;
  json results = json::array();
  for (const rd::ScenarioSpec* spec : specs) {
    const rd::ScenarioParams pr = scenario_params(*spec, cfg, false);
    for (const rd::DiagnosticResult& r : rd::verify_scenario(*spec, pr)) {
      std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.scenario << "/"
                << r.diagnostic << ": observed="
                << rd::format_double(r.observed)
                << " expected=" << rd::format_double(r.expected)
                << " distance=" << rd::format_double(r.distance)
                << " tolerance=" << rd::format_double(r.tolerance);
      if (!r.note.empty()) std::cout << " (" << r.note << ")";
      std::cout << "\n";
      all_pass = all_pass && r.pass;
      results.push_back({{"scenario", r.scenario},
                         {"diagnostic", r.diagnostic},
                         {"expected", r.expected},
                         {"observed", r.observed},
                         {"distance", r.distance},
                         {"tolerance", r.tolerance},
                         {"pass", r.pass},
                         {"note", r.note}});
    }
  }

  json report;
  report["config"] = cfg;
  report["results"] = std::move(results);
  report["pass"] = all_pass;
  rd::write_text_file(out, report.dump(2) + "\n");
  std::cout << "wrote " << out << "\n";
  return all_pass ? 0 : 1;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepRow {
  int n = 0;
  double s = 0.0;
  std::uint64_t cell_seed = 0;
  double mean_count = 0.0;
  double mean_over_n = 0.0;
  double stderr_batch = 0.0;
  double v_limit = 0.0;
};

int cmd_sweep(const json& cfg) {
  const std::string format = get_format(cfg);
  const std::string out = require_out(cfg);
  if (!has(cfg, "seed")) throw rd::ConfigError("--seed is required");
  const std::uint64_t seed = get_u64(cfg, "seed");
  const std::uint64_t steps = has(cfg, "steps") ? get_u64(cfg, "steps") : 200000;
  const std::uint64_t burn_in =
      has(cfg, "burnin") ? get_u64(cfg, "burnin") : 20000;
  if (steps <= burn_in) throw rd::ConfigError("steps must exceed burn-in");
  const std::vector<int> n_list =
      has(cfg, "n") ? parse_int_list(cfg["n"], "n") : std::vector<int>{};
  const std::vector<double> s_grid =
      has(cfg, "s_grid") ? parse_grid(cfg["s_grid"], "s_grid")
                         : std::vector<double>{};
  const std::string scenario_name =
      has(cfg, "scenario") ? cfg["scenario"].get<std::string>()
                           : std::string("min_plus_uniform");
  const rd::ScenarioSpec& spec = rd::find_scenario(scenario_name);
  if (!spec.engine_backed || spec.kind == rd::ScenarioKind::PlanarNorm)
    throw rd::ConfigError("sweep supports the uniform-replacement scenarios");
  const int k_rank = has(cfg, "k_rank") ? cfg["k_rank"].get<int>()
                                        : spec.defaults.k;
  for (double s : s_grid)
    if (!(s > 0.0 && s < 1.0))
      throw rd::ConfigError("s-grid values must lie in (0,1)");

  struct Cell {
    int n;
    double s;
    std::uint64_t index;
  };
  std::vector<Cell> cells;
  for (std::size_t i = 0; i < n_list.size(); ++i)
    for (std::size_t j = 0; j < s_grid.size(); ++j)
      cells.push_back({n_list[i], s_grid[j],
                       std::uint64_t(i * s_grid.size() + j)});

  std::vector<SweepRow> rows(cells.size());
  std::atomic<std::size_t> next{0};
  const int jobs = std::max(1, std::min<int>(default_jobs(cfg),
                                             int(std::max<std::size_t>(
                                                 cells.size(), 1))));
  std::vector<std::string> errors(static_cast<std::size_t>(jobs));

  auto worker = [&](int worker_id) {
    try {
      for (;;) {
        const std::size_t idx = next.fetch_add(1);
        if (idx >= cells.size()) return;
        const Cell& cell = cells[idx];
        rd::ScenarioParams pr = spec.defaults;
        pr.n = cell.n;
        pr.k = k_rank;
        const rd::SelectionModel model = rd::scenario_model(spec, pr);
        const rd::ReplacementLaw law = rd::ReplacementLaw::uniform01();
        rd::Rng rng(rd::derive_cell_seed(seed, cell.index));
        rd::Landscape landscape = rd::Landscape::iid_uniform(cell.n, rng, law);
        const rd::CountAverages avg = rd::time_averaged_counts(
            landscape, model, law, steps, burn_in, {cell.s}, rng);
        SweepRow& row = rows[idx];
        row.n = cell.n;
        row.s = cell.s;
        row.cell_seed = rd::derive_cell_seed(seed, cell.index);
        row.mean_count = avg.mean[0];
        row.mean_over_n = avg.mean[0] / double(cell.n);
        row.stderr_batch = avg.stderr_batch[0];
        row.v_limit = model.threshold()
                          ? rd::limit_fraction_below(cell.s, *model.threshold())
                          : 0.0;
      }
    } catch (const std::exception& e) {
      errors[std::size_t(worker_id)] = e.what();
    }
  };

  std::vector<std::thread> pool;
  for (int w = 0; w < jobs; ++w) pool.emplace_back(worker, w);
  for (auto& t : pool) t.join();
  for (const std::string& e : errors)
    if (!e.empty()) throw rd::ConfigError("sweep cell failed: " + e);

  if (format == "csv") {
    std::string body = config_comment(cfg) +
                       "n,s,cell_seed,mean_count,mean_over_n,stderr,v_limit\n";
    for (const SweepRow& r : rows) {
      body += std::to_string(r.n) + "," + rd::format_double(r.s) + "," +
              std::to_string(r.cell_seed) + "," +
              rd::format_double(r.mean_count) + "," +
              rd::format_double(r.mean_over_n) + "," +
              rd::format_double(r.stderr_batch) + "," +
              rd::format_double(r.v_limit) + "\n";
    }
    rd::write_text_file(out, body);
  } else {
    json j;
    j["config"] = cfg;
    json jrows = json::array();
    for (const SweepRow& r : rows)
      jrows.push_back({{"n", r.n},
                       {"s", r.s},
                       {"cell_seed", r.cell_seed},
                       {"mean_count", r.mean_count},
                       {"mean_over_n", r.mean_over_n},
                       {"stderr", r.stderr_batch},
                       {"v_limit", r.v_limit}});
    j["rows"] = std::move(jrows);
    rd::write_text_file(out, j.dump(2) + "\n");
  }
  std::cout << "wrote " << out << " (" << rows.size() << " cells, " << jobs
            << " jobs)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rank-driven process toolkit"};
  app.require_subcommand(1);

  Opts sim_opts, ana_opts, ver_opts, swp_opts;
  CLI::App* sim = app.add_subcommand("simulate", "run one scenario");
  CLI::App* ana = app.add_subcommand("analyze", "stationary and limit tables");
  CLI::App* ver = app.add_subcommand("verify", "run scenario diagnostics");
  CLI::App* swp = app.add_subcommand("sweep", "grid of time-averaged counts");
  add_options(sim, sim_opts);
  add_options(ana, ana_opts);
  add_options(ver, ver_opts);
  add_options(swp, swp_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed()) return cmd_simulate(merge_config(sim, sim_opts, {}));
    if (ana->parsed()) return cmd_analyze(merge_config(ana, ana_opts, {}));
    if (ver->parsed()) return cmd_verify(merge_config(ver, ver_opts, {}));
    if (swp->parsed()) return cmd_sweep(merge_config(swp, swp_opts, {}));
  } catch (const rd::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
