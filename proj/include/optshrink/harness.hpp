#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "optshrink/asymptotics.hpp"
#include "optshrink/dtransform.hpp"
#include "optshrink/linalg.hpp"
#include "optshrink/oracle.hpp"
#include "optshrink/random.hpp"
#include "optshrink/shrinkage.hpp"

#ifndef OPTSHRINK_VERSION
#define OPTSHRINK_VERSION "0.0.0"
#endif

namespace optshrink {

enum class Experiment {
  weights_vs_theta,
  mse_vs_rhat,
  relmse_accuracy,
  missing_data,
  shrinkers,
  svt_compare,
};

inline const std::vector<std::pair<Experiment, std::string>>& experiment_table() {
  static const std::vector<std::pair<Experiment, std::string>> table = {
      {Experiment::weights_vs_theta, "weights-vs-theta"},
      {Experiment::mse_vs_rhat, "mse-vs-rhat"},
      {Experiment::relmse_accuracy, "relmse-accuracy"},
      {Experiment::missing_data, "missing-data"},
      {Experiment::shrinkers, "shrinkers"},
      {Experiment::svt_compare, "svt-compare"},
  };
  return table;
}

inline std::string experiment_name(Experiment experiment) {
  for (const auto& [value, name] : experiment_table()) {
    if (value == experiment) return name;
  }
  return "unknown";
}

inline std::optional<Experiment> parse_experiment(const std::string& name) {
  for (const auto& [value, table_name] : experiment_table()) {
    if (table_name == name) return value;
  }
  return std::nullopt;
}

struct ExperimentConfig {
  Experiment experiment = Experiment::weights_vs_theta;
  Index n = 400;
  Index m = 400;
  int trials = 100;
  std::uint64_t seed = 1;
  std::vector<double> grid;    // sweep values; empty = experiment default
  std::vector<double> thetas;  // fixed signal spikes where applicable
  int threads = 0;             // 0 = OPTSHRINK_THREADS env var, else hardware

  double aspect_ratio() const {
    return static_cast<double>(std::min(n, m)) / static_cast<double>(std::max(n, m));
  }
};

inline ExperimentConfig default_config(Experiment experiment) {
  ExperimentConfig cfg;
  cfg.experiment = experiment;
  switch (experiment) {
    case Experiment::weights_vs_theta:
    case Experiment::shrinkers:
    case Experiment::svt_compare:
      for (int i = 1; i <= 16; ++i) cfg.grid.push_back(0.25 * i);
      break;
    case Experiment::relmse_accuracy:
      for (int i = 1; i <= 16; ++i) cfg.grid.push_back(0.5 * i);
      break;
    case Experiment::mse_vs_rhat:
      for (int i = 1; i <= 5; ++i) cfg.grid.push_back(i);
      cfg.thetas = {10.0};
      break;
    case Experiment::missing_data:
      for (int i = 1; i <= 20; ++i) cfg.grid.push_back(0.05 * i);
      cfg.thetas = {2.0};
      break;
  }
  return cfg;
}

inline void validate_config(const ExperimentConfig& cfg) {
  if (cfg.n < 2 || cfg.m < 2) {
    throw std::invalid_argument("matrix dimensions must be at least 2");
  }
  if (cfg.trials < 1) {
    throw std::invalid_argument("trial count must be positive");
  }
  if (cfg.grid.empty()) {
    throw std::invalid_argument("sweep grid must be non-empty");
  }
  for (std::size_t i = 0; i < cfg.thetas.size(); ++i) {
    if (!(cfg.thetas[i] > 0.0) || !std::isfinite(cfg.thetas[i])) {
      throw std::invalid_argument("fixed spikes must be positive and finite");
    }
    if (i > 0 && !(cfg.thetas[i] < cfg.thetas[i - 1])) {
      throw std::invalid_argument("fixed spikes must be strictly descending");
    }
  }
  const bool needs_fixed_spikes = cfg.experiment == Experiment::mse_vs_rhat ||
                                  cfg.experiment == Experiment::missing_data;
  if (needs_fixed_spikes && cfg.thetas.empty()) {
    throw std::invalid_argument("this experiment needs at least one fixed spike");
  }
}

// One estimator evaluated in one trial at one grid point.
struct TrialRecord {
  double sweep = 0.0;
  int trial = 0;
  std::string estimator;
  double weight = 0.0;   // weight assigned to the swept (or first) component
  double se = 0.0;       // exact squared error against the target signal
  double nse = 0.0;      // se normalized by the target signal energy
  double sigma1 = 0.0;   // top empirical singular value of the trial
  double relmse_estimate = 0.0;  // data-driven estimate, optshrink rows only
  bool flagged = false;  // some retained component was pole-proximate
};

struct ResultRow {
  double sweep = 0.0;
  std::string estimator;
  double mean_weight = 0.0;
  double mean_nse = 0.0;
  double std_error = 0.0;  // standard error of the experiment's primary metric
  double predicted = 0.0;  // asymptotic overlay for the primary metric
  bool flagged = false;    // grid value violated an estimator precondition
};

namespace detail {

inline std::vector<std::string> estimator_labels(Experiment experiment) {
  switch (experiment) {
    case Experiment::weights_vs_theta:
      return {"oracle", "optshrink", "eym"};
    case Experiment::mse_vs_rhat:
      return {"oracle", "oracle-rr", "optshrink", "eym"};
    case Experiment::relmse_accuracy:
      return {"optshrink", "relmse-estimate"};
    case Experiment::missing_data:
      return {"oracle", "optshrink", "eym"};
    case Experiment::shrinkers:
      return {"oracle", "optshrink", "eym", "svt(1)", "svt(2)"};
    case Experiment::svt_compare:
      return {"oracle", "optshrink", "svt(1)", "svt(2)"};
  }
  return {};
}

inline bool sweeps_theta(Experiment experiment) {
  return experiment == Experiment::weights_vs_theta ||
         experiment == Experiment::relmse_accuracy ||
         experiment == Experiment::shrinkers ||
         experiment == Experiment::svt_compare;
}

// The mean-weight column tracks the swept spike for theta sweeps and the
// leading spike otherwise; nse is the primary metric for the error figures.
inline bool weight_is_primary(Experiment experiment) {
  return experiment == Experiment::weights_vs_theta ||
         experiment == Experiment::shrinkers ||
         experiment == Experiment::missing_data;
}

inline Vector spikes_for(const ExperimentConfig& cfg, double sweep) {
  std::vector<double> spikes = cfg.thetas;
  if (sweeps_theta(cfg.experiment)) spikes.push_back(sweep);
  Vector out(static_cast<Index>(spikes.size()));
  for (std::size_t i = 0; i < spikes.size(); ++i) {
    out[static_cast<Index>(i)] = spikes[i];
  }
  return out;
}

inline double observe_probability(const ExperimentConfig& cfg, double sweep) {
  return cfg.experiment == Experiment::missing_data ? sweep : 1.0;
}

inline Index retained_rank(const ExperimentConfig& cfg, double sweep, Index r) {
  if (cfg.experiment == Experiment::mse_vs_rhat) {
    return static_cast<Index>(std::llround(sweep));
  }
  return r;
}

inline bool valid_grid_point(const ExperimentConfig& cfg, double sweep) {
  const Index q = std::min(cfg.n, cfg.m);
  if (sweeps_theta(cfg.experiment)) {
    if (!(sweep > 0.0) || !std::isfinite(sweep)) return false;
    if (!cfg.thetas.empty() && !(sweep < cfg.thetas.back())) return false;
    return static_cast<Index>(cfg.thetas.size()) + 1 < q;
  }
  if (cfg.experiment == Experiment::mse_vs_rhat) {
    const double rounded = std::llround(sweep);
    if (sweep != rounded) return false;
    const Index r_hat = static_cast<Index>(rounded);
    return r_hat >= 1 && r_hat < q;
  }
  // missing data sweeps the observation probability
  return sweep > 0.0 && sweep <= 1.0;
}

struct TrialContext {
  SignalSpec signal;       // planted signal S
  SignalSpec target;       // what the estimators approximate (p*S if masked)
  SvdFactors factors;
  Vector k_values;         // oracle diagonal against S
  Vector k_target;         // oracle diagonal against the target
  double target_energy = 0.0;
  double p = 1.0;
  Index r_hat = 0;
};

inline TrialContext make_trial(const ExperimentConfig& cfg, std::size_t grid_index,
                               double sweep, int trial) {
  const Vector spikes = spikes_for(cfg, sweep);
  const double p = observe_probability(cfg, sweep);
  const std::uint64_t trial_seed =
      rng::derive_seed(cfg.seed, static_cast<std::uint64_t>(grid_index),
                       static_cast<std::uint64_t>(trial));
  const Matrix left = sample_orthonormal_frame(
      cfg.n, spikes.size(), rng::derive_seed(trial_seed, 0, 0));
  const Matrix right = sample_orthonormal_frame(
      cfg.m, spikes.size(), rng::derive_seed(trial_seed, 1, 0));

  TrialContext ctx;
  ctx.signal = SignalSpec{spikes, left, right};
  ctx.p = p;
  ctx.r_hat = retained_rank(cfg, sweep, spikes.size());

  Matrix noisy =
      ctx.signal.materialize() +
      sample_gaussian_matrix(cfg.n, cfg.m, 1.0 / static_cast<double>(cfg.m),
                             rng::derive_seed(trial_seed, 2, 0));
  if (cfg.experiment == Experiment::missing_data) {
    noisy = noisy.cwiseProduct(
        sample_mask(cfg.n, cfg.m, p, rng::derive_seed(trial_seed, 3, 0)));
  }
  ctx.factors = svd(noisy);
  ctx.target = p == 1.0 ? ctx.signal : SignalSpec{p * spikes, left, right};
  ctx.k_values = oracle_diagonal(ctx.signal, ctx.factors);
  ctx.k_target = p == 1.0 ? ctx.k_values : Vector(p * ctx.k_values);
  ctx.target_energy = ctx.target.thetas.squaredNorm();
  return ctx;
}

inline double svt_threshold(const std::string& label) {
  return label == "svt(1)" ? 1.0 : 2.0;
}

inline std::vector<TrialRecord> evaluate_trial(const ExperimentConfig& cfg,
                                               std::size_t grid_index,
                                               double sweep, int trial) {
  const TrialContext ctx = make_trial(cfg, grid_index, sweep, trial);
  const Index weight_index = sweeps_theta(cfg.experiment)
                                 ? ctx.signal.rank() - 1
                                 : Index{0};

  // optshrink is shared between its own row and the relmse-estimate row
  const DenoiseReport report = optshrink(ctx.factors, ctx.r_hat);
  const double optshrink_se =
      exact_squared_error(ctx.target, ctx.factors, report.weights);

  std::vector<TrialRecord> records;
  for (const std::string& label : estimator_labels(cfg.experiment)) {
    TrialRecord rec;
    rec.sweep = sweep;
    rec.trial = trial;
    rec.estimator = label;
    rec.sigma1 = ctx.factors.singular_values[0];
    if (label == "oracle") {
      // the weight column reports the overlap with S itself; the error is
      // measured with the weights that are optimal for the target signal
      const ShrinkageWeights w = oracle_weights(ctx.k_target, ctx.r_hat);
      rec.weight = std::max(ctx.k_values[weight_index], 0.0);
      rec.se = exact_squared_error(ctx.target, ctx.factors, w);
    } else if (label == "oracle-rr") {
      const ShrinkageWeights w = rank_regularized_weights(ctx.k_target, ctx.r_hat);
      rec.weight = w.weights[weight_index];
      rec.se = exact_squared_error(ctx.target, ctx.factors, w);
    } else if (label == "optshrink" || label == "relmse-estimate") {
      rec.weight = report.weights.weights[weight_index];
      rec.se = optshrink_se;
      rec.relmse_estimate = report.rel_mse_estimate;
      rec.flagged = !report.metadata.flagged_components.empty();
    } else if (label == "eym") {
      const ShrinkageWeights w = eym_weights(ctx.factors, ctx.r_hat);
      rec.weight = w.weights[weight_index];
      rec.se = exact_squared_error(ctx.target, ctx.factors, w);
    } else {
      const ShrinkageWeights w = svt_weights(ctx.factors, svt_threshold(label));
      rec.weight = weight_index < w.weights.size() ? w.weights[weight_index] : 0.0;
      rec.se = exact_squared_error(ctx.target, ctx.factors, w);
    }
    rec.nse = label == "relmse-estimate" ? rec.relmse_estimate
                                         : rec.se / ctx.target_energy;
    records.push_back(std::move(rec));
  }
  return records;
}

// Limits of the r_hat-truncated estimators; components below the phase
// transition or beyond the truncation contribute their full signal energy,
// retained uninformative components add the bulk edge energy for truncation.
inline double predicted_nse_truncated(const Vector& spikes, Index r_hat,
                                      const MpParams& mp, bool truncation) {
  const double b = mp.bulk_edge();
  const double threshold = phase_transition_threshold(mp);
  double total = 0.0;
  double energy = 0.0;
  const Index terms = std::max<Index>(spikes.size(), r_hat);
  for (Index i = 0; i < terms; ++i) {
    const double theta = i < spikes.size() ? spikes[i] : 0.0;
    const double component_energy = mp.p * mp.p * theta * theta;
    energy += component_energy;
    if (i >= r_hat) {
      total += component_energy;  // dropped outright
    } else if (theta > threshold) {
      const AsymptoticPrediction pred = predict_spike(theta, mp);
      total += truncation ? pred.mse_eym_limit : pred.mse_opt_limit;
    } else {
      total += component_energy + (truncation ? b * b : 0.0);
    }
  }
  return total / energy;
}

inline double predicted_value(const ExperimentConfig& cfg, double sweep,
                              const std::string& label) {
  const MpParams mp{cfg.aspect_ratio(), observe_probability(cfg, sweep)};
  const Vector spikes = spikes_for(cfg, sweep);
  const double swept_theta = spikes[spikes.size() - 1];
  switch (cfg.experiment) {
    case Experiment::weights_vs_theta:
    case Experiment::shrinkers: {
      const AsymptoticPrediction pred = predict_spike(swept_theta, mp);
      if (label == "eym") return pred.w_eym_limit;
      if (label.rfind("svt", 0) == 0) {
        return std::max(pred.w_eym_limit - svt_threshold(label), 0.0);
      }
      return pred.w_opt_limit;
    }
    case Experiment::missing_data: {
      const AsymptoticPrediction pred = predict_spike(spikes[0], mp);
      if (label == "eym") return pred.w_eym_limit;
      if (label == "oracle") return pred.w_opt_limit / mp.p;
      return pred.w_opt_limit;
    }
    case Experiment::mse_vs_rhat: {
      const Index r_hat = retained_rank(cfg, sweep, spikes.size());
      return predicted_nse_truncated(spikes, r_hat, mp, label == "eym");
    }
    case Experiment::relmse_accuracy:
      return predicted_nse_truncated(spikes, spikes.size(), mp, false);
    case Experiment::svt_compare:
      if (label.rfind("svt", 0) == 0) {
        return std::numeric_limits<double>::quiet_NaN();
      }
      return predicted_nse_truncated(spikes, spikes.size(), mp, false);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

inline int resolve_threads(const ExperimentConfig& cfg) {
  if (cfg.threads > 0) return cfg.threads;
  if (const char* env = std::getenv("OPTSHRINK_THREADS")) {
    const int parsed = std::atoi(env);
    if (parsed > 0) return parsed;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

}  // namespace detail

// Runs every (grid point, trial) pair, skipping invalid grid points. Trials
// are independent: each derives its own seed from (seed, grid index, trial),
// so the schedule across worker threads cannot change any result.
inline std::vector<TrialRecord> run_experiment_trials(const ExperimentConfig& cfg) {
  validate_config(cfg);
  struct Task {
    std::size_t grid_index;
    double sweep;
    int trial;
  };
  std::vector<Task> tasks;
  for (std::size_t gi = 0; gi < cfg.grid.size(); ++gi) {
    if (!detail::valid_grid_point(cfg, cfg.grid[gi])) continue;
    for (int t = 0; t < cfg.trials; ++t) {
      tasks.push_back(Task{gi, cfg.grid[gi], t});
    }
  }
  std::vector<std::vector<TrialRecord>> slots(tasks.size());

  const int workers = std::min<int>(detail::resolve_threads(cfg),
                                    static_cast<int>(std::max<std::size_t>(tasks.size(), 1)));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&]() {
    for (;;) {
      const std::size_t index = next.fetch_add(1);
      if (index >= tasks.size()) return;
      try {
        const Task& task = tasks[index];
        slots[index] =
            detail::evaluate_trial(cfg, task.grid_index, task.sweep, task.trial);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (std::thread& thread : pool) thread.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<TrialRecord> records;
  for (std::vector<TrialRecord>& slot : slots) {
    for (TrialRecord& rec : slot) records.push_back(std::move(rec));
  }
  return records;
}

inline std::vector<ResultRow> aggregate_records(
    const ExperimentConfig& cfg, const std::vector<TrialRecord>& records) {
  const bool weight_primary = detail::weight_is_primary(cfg.experiment);
  std::vector<ResultRow> rows;
  for (std::size_t gi = 0; gi < cfg.grid.size(); ++gi) {
    const double sweep = cfg.grid[gi];
    if (std::count(cfg.grid.begin(), cfg.grid.begin() + static_cast<long>(gi),
                   sweep) > 0) {
      continue;  // duplicate grid values fold into one set of rows
    }
    for (const std::string& label : detail::estimator_labels(cfg.experiment)) {
      ResultRow row;
      row.sweep = sweep;
      row.estimator = label;
      if (!detail::valid_grid_point(cfg, sweep)) {
        row.flagged = true;
        row.mean_weight = std::numeric_limits<double>::quiet_NaN();
        row.mean_nse = std::numeric_limits<double>::quiet_NaN();
        row.std_error = std::numeric_limits<double>::quiet_NaN();
        row.predicted = std::numeric_limits<double>::quiet_NaN();
        rows.push_back(std::move(row));
        continue;
      }
      double weight_sum = 0.0;
      double nse_sum = 0.0;
      std::vector<double> primary;
      for (const TrialRecord& rec : records) {
        if (rec.sweep != sweep || rec.estimator != label) continue;
        weight_sum += rec.weight;
        nse_sum += rec.nse;
        primary.push_back(weight_primary ? rec.weight : rec.nse);
      }
      const double count = static_cast<double>(primary.size());
      row.mean_weight = weight_sum / count;
      row.mean_nse = nse_sum / count;
      const double primary_mean =
          weight_primary ? row.mean_weight : row.mean_nse;
      double variance = 0.0;
      for (double value : primary) {
        variance += (value - primary_mean) * (value - primary_mean);
      }
      row.std_error = primary.size() > 1
                          ? std::sqrt(variance / (count - 1.0)) / std::sqrt(count)
                          : 0.0;
      row.predicted = detail::predicted_value(cfg, sweep, label);
      rows.push_back(std::move(row));
    }
  }
  std::sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    if (a.sweep != b.sweep) return a.sweep < b.sweep;
    return a.estimator < b.estimator;
  });
  return rows;
}

inline std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg) {
  return aggregate_records(cfg, run_experiment_trials(cfg));
}

inline void write_csv(const std::vector<ResultRow>& rows,
                      const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::invalid_argument("cannot open output file: " + path.string());
  }
  out << "sweep,estimator,mean_weight,mean_nse,stderr,predicted\n";
  char buffer[64];
  auto emit = [&](double value) {
    std::snprintf(buffer, sizeof(buffer), "%.10g", value);
    out << buffer;
  };
  for (const ResultRow& row : rows) {
    emit(row.sweep);
    out << ',' << row.estimator << ',';
    emit(row.mean_weight);
    out << ',';
    emit(row.mean_nse);
    out << ',';
    emit(row.std_error);
    out << ',';
    emit(row.predicted);
    out << '\n';
  }
  if (!out) {
    throw std::runtime_error("failed writing results file: " + path.string());
  }
}

inline void write_sidecar(const ExperimentConfig& cfg,
                          const std::filesystem::path& path) {
  nlohmann::json j{
      {"config",
       {{"experiment", experiment_name(cfg.experiment)},
        {"n", cfg.n},
        {"m", cfg.m},
        {"trials", cfg.trials},
        {"seed", cfg.seed},
        {"grid", cfg.grid},
        {"thetas", cfg.thetas},
        {"threads", cfg.threads}}},
      {"rng", std::string(rng::generator_name)},
      {"seed", cfg.seed},
      {"libraryVersion", OPTSHRINK_VERSION}};
  std::ofstream out(path);
  if (!out) {
    throw std::invalid_argument("cannot open sidecar file: " + path.string());
  }
  out << j.dump(2) << '\n';
}

}  // namespace optshrink
