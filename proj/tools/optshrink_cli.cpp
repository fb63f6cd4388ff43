#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "optshrink/optshrink.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_internal = 1;
constexpr int exit_usage = 2;

// Largest relative gap in the singular value sequence. A convenience only:
// the shrinkage theory assumes the rank is known, so prefer passing --rank.
optshrink::Index gap_heuristic_rank(const optshrink::Vector& singular_values) {
  optshrink::Index best = 1;
  double best_ratio = 0.0;
  for (optshrink::Index i = 0; i + 1 < singular_values.size(); ++i) {
    const double next = singular_values[i + 1];
    const double ratio = next > 0.0 ? singular_values[i] / next
                                    : std::numeric_limits<double>::infinity();
    if (ratio > best_ratio) {
      best_ratio = ratio;
      best = i + 1;
    }
  }
  return best;
}

int run_denoise(const std::string& input, std::int64_t rank, bool use_gap_heuristic,
                const std::string& output, const std::string& report_path) {
  const optshrink::CsvMatrix loaded = optshrink::load_matrix_csv(input);
  const optshrink::SvdFactors factors = optshrink::svd(loaded.matrix);
  const optshrink::Index q = factors.q();

  optshrink::Index r_hat = 0;
  if (use_gap_heuristic) {
    r_hat = gap_heuristic_rank(factors.singular_values);
    std::cerr << "gap heuristic selected rank " << r_hat << "\n";
  } else {
    if (rank < 1 || rank >= q) {
      std::cerr << "error: --rank must satisfy 1 <= rank < min(n, m) = " << q
                << "\n";
      return exit_usage;
    }
    r_hat = static_cast<optshrink::Index>(rank);
  }

  optshrink::DenoiseReport report = optshrink::optshrink(factors, r_hat);
  report.metadata.observed_fraction = loaded.observed_fraction();
  for (optshrink::Index component : report.metadata.flagged_components) {
    std::cerr << "warning: component " << (component + 1)
              << " is too close to the noise spectrum; weight set to 0\n";
  }

  optshrink::save_matrix_csv(output, optshrink::reconstruct(factors, report.weights));
  if (!report_path.empty()) {
    std::ofstream out(report_path);
    if (!out) {
      std::cerr << "error: cannot open report file " << report_path << "\n";
      return exit_usage;
    }
    out << nlohmann::json(report).dump(2) << '\n';
  }
  return exit_ok;
}

int run_predict(double theta, double c, double p) {
  const optshrink::AsymptoticPrediction pred =
      optshrink::predict_spike(theta, optshrink::MpParams{c, p});
  std::cout << nlohmann::json(pred).dump(2) << std::endl;
  return exit_ok;
}

int run_simulate(const std::string& experiment, std::int64_t n, std::int64_t m,
                 std::int64_t trials, std::uint64_t seed, double theta,
                 bool theta_given, const std::string& out_path) {
  const auto parsed = optshrink::parse_experiment(experiment);
  if (!parsed) {
    std::cerr << "error: unknown experiment '" << experiment << "'; valid names:";
    for (const auto& [value, name] : optshrink::experiment_table()) {
      std::cerr << ' ' << name;
    }
    std::cerr << "\n";
    return exit_usage;
  }
  optshrink::ExperimentConfig cfg = optshrink::default_config(*parsed);
  cfg.n = static_cast<optshrink::Index>(n);
  cfg.m = static_cast<optshrink::Index>(m);
  cfg.trials = static_cast<int>(trials);
  cfg.seed = seed;
  if (theta_given) cfg.thetas = {theta};
  optshrink::validate_config(cfg);

  const std::vector<optshrink::ResultRow> rows = optshrink::run_experiment(cfg);
  optshrink::write_csv(rows, out_path);
  std::filesystem::path sidecar(out_path);
  sidecar.replace_extension(".json");
  optshrink::write_sidecar(cfg, sidecar);
  std::cout << "wrote " << rows.size() << " rows to " << out_path << " (sidecar "
            << sidecar.string() << ")\n";
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"data-driven optimal shrinkage of singular values"};
  app.require_subcommand(1);

  std::string input;
  std::int64_t rank = 0;
  bool use_gap_heuristic = false;
  std::string output;
  std::string report_path;
  CLI::App* denoise = app.add_subcommand(
      "denoise", "estimate a low-rank matrix from one noisy observation");
  denoise->add_option("--input", input, "matrix CSV; empty or NaN cells are missing")
      ->required();
  CLI::Option* rank_opt =
      denoise->add_option("--rank", rank, "number of signal components to retain");
  denoise
      ->add_flag("--gap-heuristic", use_gap_heuristic,
                 "pick the rank at the largest relative singular value gap "
                 "(heuristic; the shrinkage theory assumes a known rank)")
      ->excludes(rank_opt);
  denoise->add_option("--output", output, "denoised matrix CSV")->required();
  denoise->add_option("--report", report_path, "JSON denoise report");

  double theta = 0.0;
  double c = 1.0;
  double p = 1.0;
  CLI::App* predict = app.add_subcommand(
      "predict", "closed-form large-matrix limits for one signal component");
  predict->add_option("--theta", theta, "signal component strength")->required();
  predict->add_option("--c", c, "aspect ratio n/m in (0, 1]");
  predict->add_option("--p", p, "observation probability in (0, 1]");

  std::string experiment;
  std::int64_t n = 400;
  std::int64_t m = 400;
  std::int64_t trials = 100;
  std::uint64_t seed = 1;
  std::string out_path;
  double sim_theta = 0.0;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "Monte Carlo sweep writing a results CSV plus JSON sidecar");
  simulate->add_option("--experiment", experiment, "experiment name")->required();
  simulate->add_option("--n", n, "matrix rows");
  simulate->add_option("--m", m, "matrix columns");
  simulate->add_option("--trials", trials, "trials per grid point");
  simulate->add_option("--seed", seed, "base seed for the run");
  CLI::Option* sim_theta_opt = simulate->add_option(
      "--theta", sim_theta, "override the fixed signal strength");
  simulate->add_option("--out", out_path, "results CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& error) {
    const int code = app.exit(error);
    return code == 0 ? exit_ok : exit_usage;
  }

  try {
    if (denoise->parsed()) {
      if (!use_gap_heuristic && rank_opt->count() == 0) {
        std::cerr << "error: pass --rank or --gap-heuristic\n";
        return exit_usage;
      }
      return run_denoise(input, rank, use_gap_heuristic, output, report_path);
    }
    if (predict->parsed()) {
      return run_predict(theta, c, p);
    }
    return run_simulate(experiment, n, m, trials, seed, sim_theta,
                        sim_theta_opt->count() > 0, out_path);
  } catch (const std::invalid_argument& error) {
    std::cerr << "error: " << error.what() << "\n";
    return exit_usage;
  } catch (const std::domain_error& error) {
    std::cerr << "error: " << error.what() << "\n";
    return exit_usage;
  } catch (const std::exception& error) {
    std::cerr << "internal error: " << error.what() << "\n";
    return exit_internal;
  }
}
