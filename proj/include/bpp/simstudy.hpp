#pragma once

// Synthetic benchmark harness: factorial dataset generation (time designs x
// noise x change size x segment count), windowed change matching, detection
// metrics, and a deterministic, resumable, optionally threaded runner.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bpp/chain.hpp"
#include "bpp/detect.hpp"
#include "bpp/errors.hpp"
#include "bpp/rng.hpp"
#include "bpp/time_grid.hpp"

namespace bpp {

enum class TimeDist { uniform_grid, beta_half, beta_two };

inline const char* time_dist_name(TimeDist d) {
  switch (d) {
    case TimeDist::uniform_grid: return "uniform_grid";
    case TimeDist::beta_half: return "beta_half";
    default: return "beta_two";
  }
}

inline TimeDist time_dist_from_name(const std::string& s) {
  if (s == "uniform_grid") return TimeDist::uniform_grid;
  if (s == "beta_half") return TimeDist::beta_half;
  if (s == "beta_two") return TimeDist::beta_two;
  throw invalid_input("unknown time distribution: " + s);
}

struct FactorialSetting {
  TimeDist time_dist = TimeDist::uniform_grid;
  double sigma2 = 0.1;
  double nu = 3.0;
  double delta = 0.5;
  int k_true = 1;
  int n_obs = 500;
  double span_years = 20.0;
  int replicate = 0;

  std::string id() const {  // replicate-free key for seed derivation and resume
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%s|s%.6g|nu%.6g|d%.6g|k%d|n%d|y%.6g",
                  time_dist_name(time_dist), sigma2, nu, delta, k_true, n_obs,
                  span_years);
    return buf;
  }
};

struct SyntheticDataset {
  TimeGrid grid = TimeGrid::uniform(2);
  Eigen::VectorXd y;
  std::vector<double> true_change_times;  // standardized chain time
  StatePath true_path;
  FactorialSetting setting;
  std::uint64_t seed = 0;
};

struct MetricRow {
  std::string setting_id;
  int tp = 0, fp = 0, fn = 0;
  double tpr = 0.0, fpr = 0.0, commission = 0.0, omission = 0.0, f1 = 0.0;
};

/* Draw order is fixed (times, then changes with rejection, then noise) so a
   seed fully determines the dataset. */
inline SyntheticDataset generate_dataset(const FactorialSetting& s, std::uint64_t seed) {
  if (s.k_true < 1 || s.n_obs < s.k_true + 1 || !(s.sigma2 > 0.0) || !(s.nu > 0.0) ||
      !(s.span_years > 0.0))
    throw invalid_input("generate_dataset: invalid setting");

  SyntheticDataset d;
  d.setting = s;
  d.seed = seed;
  Rng rng(seed);
  const double span_days = 365.0 * s.span_years;

  if (s.time_dist == TimeDist::uniform_grid) {
    d.grid = TimeGrid::uniform(s.n_obs, span_days);
  } else {
    const double a = s.time_dist == TimeDist::beta_half ? 0.5 : 2.0;
    while (true) {
      std::vector<double> u(s.n_obs);
      for (int i = 0; i < s.n_obs; ++i) u[i] = rng.beta(a, a);
      std::sort(u.begin(), u.end());
      bool distinct = true;
      for (int i = 1; i < s.n_obs; ++i) distinct = distinct && u[i] > u[i - 1];
      if (!distinct) continue;
      for (double& v : u) v *= span_days;
      d.grid = TimeGrid::from_raw(u);
      break;
    }
  }

  d.true_path.assign(s.n_obs, 1);
  if (s.k_true > 1) {
    if (s.time_dist == TimeDist::uniform_grid) {
      const std::vector<int> idx = sample_discrete_changepoints(s.n_obs - 1, s.k_true, rng);
      for (int c : idx) d.true_change_times.push_back(d.grid.time(c));
      for (int i = 0; i < s.n_obs; ++i)
        for (int c : idx) d.true_path[i] += i >= c;
    } else {
      while (true) {  // reject change layouts leaving any segment unobserved
        const std::vector<double> zeta = sample_segment_lengths(s.k_true, rng);
        std::vector<double> cuts;
        double acc = 0.0;
        for (int j = 0; j + 1 < s.k_true; ++j) {
          acc += zeta[j];
          cuts.push_back(acc);
        }
        StatePath path(s.n_obs, 1);
        for (int i = 0; i < s.n_obs; ++i)
          for (double c : cuts) path[i] += d.grid.time(i) >= c;
        std::vector<bool> seen(s.k_true + 1, false);
        for (int z : path) seen[z] = true;
        bool complete = true;
        for (int j = 1; j <= s.k_true; ++j) complete = complete && seen[j];
        if (!complete) continue;
        d.true_change_times = std::move(cuts);
        d.true_path = std::move(path);
        break;
      }
    }
  }

  d.y.resize(s.n_obs);
  for (int i = 0; i < s.n_obs; ++i) {
    const double mean = d.true_path[i] % 2 == 0 ? s.delta : 0.0;
    d.y[i] = mean + std::sqrt(s.sigma2) * rng.student_t(s.nu);
  }
  return d;
}

struct MatchResult {
  int tp = 0, fp = 0, fn = 0;
  std::vector<std::pair<double, double>> pairs;  // (true time, detection time)
  std::vector<double> false_positive_times;
  std::vector<double> missed_times;
};

/* Greedy closest-pair matching: candidate pairs within the window are
   accepted in order of increasing distance, each side used at most once;
   a surplus detection near an already-claimed truth counts as a false
   positive. */
inline MatchResult match_changes(const std::vector<double>& truths,
                                 const std::vector<double>& detections,
                                 double window = 0.0225) {
  if (window < 0.0) throw invalid_input("match_changes: negative window");
  struct Cand {
    double dist;
    std::size_t t, d;
  };
  std::vector<Cand> cands;
  for (std::size_t t = 0; t < truths.size(); ++t)
    for (std::size_t d = 0; d < detections.size(); ++d) {
      const double dist = std::fabs(truths[t] - detections[d]);
      if (dist <= window) cands.push_back({dist, t, d});
    }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.dist != b.dist) return a.dist < b.dist;
    if (a.t != b.t) return a.t < b.t;
    return a.d < b.d;
  });

  std::vector<bool> t_used(truths.size(), false), d_used(detections.size(), false);
  MatchResult m;
  for (const Cand& c : cands) {
    if (t_used[c.t] || d_used[c.d]) continue;
    t_used[c.t] = d_used[c.d] = true;
    m.pairs.emplace_back(truths[c.t], detections[c.d]);
    ++m.tp;
  }
  for (std::size_t t = 0; t < truths.size(); ++t)
    if (!t_used[t]) {
      ++m.fn;
      m.missed_times.push_back(truths[t]);
    }
  for (std::size_t d = 0; d < detections.size(); ++d)
    if (!d_used[d]) {
      ++m.fp;
      m.false_positive_times.push_back(detections[d]);
    }
  return m;
}

struct BinCounts {
  int fp_bins = 0;        // change-free bins holding at least one false positive
  int negative_bins = 0;  // bins of width `window` tiling [0,1] with no true change
};

inline BinCounts fpr_bins(const std::vector<double>& truths,
                          const std::vector<double>& fp_times, double window) {
  if (!(window > 0.0)) throw invalid_input("fpr_bins: window must be positive");
  const int nbins = static_cast<int>(std::ceil(1.0 / window));
  auto bin_of = [&](double t) {
    const int b = static_cast<int>(std::floor(t / window));
    return std::min(std::max(b, 0), nbins - 1);
  };
  std::vector<bool> has_truth(nbins, false), has_fp(nbins, false);
  for (double t : truths) has_truth[bin_of(t)] = true;
  for (double t : fp_times) has_fp[bin_of(t)] = true;
  BinCounts out;
  for (int b = 0; b < nbins; ++b) {
    if (has_truth[b]) continue;
    ++out.negative_bins;
    out.fp_bins += has_fp[b];
  }
  return out;
}

/* Rates with empty denominators are reported as NaN (serialized as null). */
inline MetricRow compute_metrics(const MatchResult& m, const BinCounts& bins) {
  if (m.tp < 0 || m.fp < 0 || m.fn < 0)
    throw invalid_input("compute_metrics: negative counts");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  MetricRow row;
  row.tp = m.tp;
  row.fp = m.fp;
  row.fn = m.fn;
  row.tpr = m.tp + m.fn > 0 ? static_cast<double>(m.tp) / (m.tp + m.fn) : nan;
  row.fpr = bins.negative_bins > 0
                ? static_cast<double>(bins.fp_bins) / bins.negative_bins
                : nan;
  row.commission = m.tp + m.fp > 0 ? static_cast<double>(m.fp) / (m.tp + m.fp) : nan;
  row.omission = m.tp + m.fn > 0 ? static_cast<double>(m.fn) / (m.tp + m.fn) : nan;
  row.f1 = 2 * m.tp + m.fp + m.fn > 0
               ? 2.0 * m.tp / (2.0 * m.tp + m.fp + m.fn)
               : nan;
  return row;
}

inline const std::vector<std::string>& factorial_model_names() {
  static const std::vector<std::string> names{
      "bpp_robust", "bpp_gaussian", "bpp_equal_volume_prior",
      "discrete_noninformative"};
  return names;
}

inline DetectOptions factorial_model_options(const std::string& model, int k_max) {
  DetectOptions opts;
  opts.k_max = k_max;
  opts.design = DesignKind::intercept;
  if (model == "bpp_robust") return opts;
  if (model == "bpp_gaussian") {
    opts.robust.mode = LikelihoodMode::gaussian;
    return opts;
  }
  if (model == "bpp_equal_volume_prior") {
    opts.prior = PriorVariant::equal_volume;
    return opts;
  }
  if (model == "discrete_noninformative") {
    opts.time_model = TimeModel::discrete;
    return opts;
  }
  throw invalid_input("unknown benchmark model: " + model);
}

struct ResultRow {
  FactorialSetting setting;
  std::string model;
  int replicate = 0;
  MetricRow metrics;
  BinCounts bins;
  double wall_seconds = 0.0;
};

inline std::string result_key(const FactorialSetting& s, const std::string& model,
                              int replicate) {
  return s.id() + "|" + model + "|r" + std::to_string(replicate);
}

struct FactorialConfig {
  std::vector<FactorialSetting> settings;
  int replicates = 100;
  std::vector<std::string> models = factorial_model_names();
  std::uint64_t seed = 0;
  int jobs = 1;
  double window = 0.0225;
  int k_max = 6;
  std::set<std::string> skip;  // result keys already present (resume)
  // externally produced detections: model name -> dataset key -> change times
  std::map<std::string, std::map<std::string, std::vector<double>>> external;
};

/* Default full factorial grid: 3 time designs x 3 noise levels x
   3 tail weights x 6 change sizes x 4 segment counts. */
inline std::vector<FactorialSetting> default_factorial_grid() {
  std::vector<FactorialSetting> grid;
  for (TimeDist td : {TimeDist::uniform_grid, TimeDist::beta_half, TimeDist::beta_two})
    for (double s2 : {0.1, 0.2, 0.3})
      for (double nu : {3.0, 10.0, 100.0})
        for (double delta : {0.1, 0.3, 0.5, 0.7, 0.9, 1.1})
          for (int k : {1, 2, 3, 4}) {
            FactorialSetting s;
            s.time_dist = td;
            s.sigma2 = s2;
            s.nu = nu;
            s.delta = delta;
            s.k_true = k;
            grid.push_back(s);
          }
  return grid;
}

namespace detail {

inline ResultRow evaluate_model(const SyntheticDataset& data, const std::string& model,
                                const FactorialConfig& cfg,
                                const std::vector<double>* external_times) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<double> detected;
  if (external_times != nullptr) {
    detected = *external_times;
    std::sort(detected.begin(), detected.end());
  } else {
    std::vector<double> raw(data.grid.size());
    for (std::size_t i = 0; i < data.grid.size(); ++i) raw[i] = data.grid.raw_at(i);
    const DetectionReport rep =
        detect(data.y, raw, factorial_model_options(model, cfg.k_max));
    for (const ChangeRecord& c : rep.changes) detected.push_back(c.std_time);
  }
  const MatchResult m = match_changes(data.true_change_times, detected, cfg.window);
  const BinCounts bins =
      fpr_bins(data.true_change_times, m.false_positive_times, cfg.window);

  ResultRow row;
  row.setting = data.setting;
  row.setting.replicate = data.setting.replicate;
  row.model = model;
  row.replicate = data.setting.replicate;
  row.metrics = compute_metrics(m, bins);
  row.metrics.setting_id = data.setting.id();
  row.bins = bins;
  row.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

}  // namespace detail

/* Per-replicate evaluation of every requested model on shared datasets.
   Dataset seeds derive from (seed, setting id, replicate), so results do not
   depend on scheduling; rows come back in task order (settings x replicates
   x models). Keys listed in `skip` are not recomputed. */
inline std::vector<ResultRow> run_factorial(const FactorialConfig& cfg) {
  if (cfg.replicates < 1) throw invalid_input("run_factorial: replicates must be >= 1");
  if (cfg.jobs < 1) throw invalid_input("run_factorial: jobs must be >= 1");
  for (const std::string& m : cfg.models)
    if (cfg.external.find(m) == cfg.external.end())
      factorial_model_options(m, cfg.k_max);  // validates the name

  struct Task {
    FactorialSetting setting;
    std::vector<std::string> models;
  };
  std::vector<Task> tasks;
  for (const FactorialSetting& base : cfg.settings)
    for (int rep = 0; rep < cfg.replicates; ++rep) {
      Task t;
      t.setting = base;
      t.setting.replicate = rep;
      for (const std::string& m : cfg.models)
        if (cfg.skip.find(result_key(t.setting, m, rep)) == cfg.skip.end())
          t.models.push_back(m);
      if (!t.models.empty()) tasks.push_back(std::move(t));
    }

  std::vector<std::vector<ResultRow>> slots(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t at = next.fetch_add(1);
      if (at >= tasks.size()) return;
      const Task& task = tasks[at];
      const std::uint64_t seed =
          derive_seed(cfg.seed, task.setting.id(), task.setting.replicate);
      const SyntheticDataset data = generate_dataset(task.setting, seed);
      for (const std::string& model : task.models) {
        const std::vector<double>* ext = nullptr;
        const auto it = cfg.external.find(model);
        if (it != cfg.external.end()) {
          const std::string key =
              task.setting.id() + "|r" + std::to_string(task.setting.replicate);
          const auto jt = it->second.find(key);
          ext = jt == it->second.end() ? nullptr : &jt->second;
          if (ext == nullptr) continue;  // no external detections for this dataset
        }
        slots[at].push_back(detail::evaluate_model(data, model, cfg, ext));
      }
    }
  };

  if (cfg.jobs == 1 || tasks.size() <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    const int n_threads =
        static_cast<int>(std::min<std::size_t>(cfg.jobs, tasks.size()));
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  std::vector<ResultRow> rows;
  for (std::vector<ResultRow>& s : slots)
    for (ResultRow& r : s) rows.push_back(std::move(r));
  return rows;
}

/* Pooled counts over a row subset; rates recomputed from the sums. */
inline MetricRow aggregate_rows(const std::vector<ResultRow>& rows) {
  MatchResult m;
  BinCounts bins;
  for (const ResultRow& r : rows) {
    m.tp += r.metrics.tp;
    m.fp += r.metrics.fp;
    m.fn += r.metrics.fn;
    bins.fp_bins += r.bins.fp_bins;
    bins.negative_bins += r.bins.negative_bins;
  }
  MetricRow out = compute_metrics(m, bins);
  out.setting_id = "pooled";
  return out;
}

}  // namespace bpp
