#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "safeshed/checkpoint.hpp"
#include "safeshed/config.hpp"
#include "safeshed/io.hpp"
#include "safeshed/run.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitRuntimeError = 3;

std::string default_out_dir() {
  if (const char* env = std::getenv("SAFESHED_OUT_DIR"); env && *env) {
    return env;
  }
  return "";
}

int cmd_train(const std::string& config_path, const std::optional<std::string>& resume,
              const std::optional<std::uint64_t>& seed, const std::optional<int>& parallelism,
              const std::string& out_dir, int stop_after, bool force_resume) {
  safeshed::RunConfig config = safeshed::load_run_config(config_path);
  safeshed::TrainRunOptions options;
  options.resume_checkpoint = resume;
  options.seed_override = seed;
  options.parallelism_override = parallelism;
  if (!out_dir.empty()) {
    options.out_dir_override = out_dir;
  }
  options.stop_after = stop_after;
  options.force_resume = force_resume;

  const safeshed::TrainRunSummary summary = safeshed::run_training(config, options);
  std::cout << "trained " << summary.iterations_run << " iteration(s), now at iteration "
            << summary.final_state.iteration << "\n"
            << "checkpoint: " << summary.final_checkpoint_path << "\n"
            << "metrics:    " << summary.metrics_path << "\n";
  return kExitOk;
}

int cmd_evaluate(const std::string& config_path, const std::string& checkpoint_path,
                 int fault_bus, double fault_start, double duration, const std::string& out_csv,
                 const std::optional<std::string>& dump_checkpoint, bool force) {
  safeshed::RunConfig config = safeshed::load_run_config(config_path);
  const safeshed::Checkpoint checkpoint = safeshed::load_checkpoint(checkpoint_path);
  if (checkpoint.config_hash != safeshed::config_hash(config) && !force) {
    throw std::invalid_argument(
        "evaluate: checkpoint config hash does not match this configuration "
        "(pass --force to override)");
  }
  if (dump_checkpoint) {
    std::ofstream out(*dump_checkpoint);
    out << safeshed::checkpoint_to_json(checkpoint).dump(2) << "\n";
  }

  safeshed::FaultScenario scenario{fault_bus, fault_start, duration};
  const safeshed::EvaluateReport report =
      safeshed::run_evaluation(config, checkpoint, scenario, out_csv);

  std::cout << "scenario: fault at bus " << fault_bus << ", start " << fault_start << " s, "
            << "duration " << duration << " s (cleared at " << scenario.clearing_time()
            << " s)\n";
  std::cout << "recovery criterion: " << (report.criterion.pass ? "PASS" : "FAIL");
  if (!report.criterion.pass) {
    std::cout << " (first violation at t=" << report.criterion.first_violation_time << " s, bus "
              << safeshed::kMonitoredBuses[static_cast<std::size_t>(
                     report.criterion.violating_bus)]
              << ")";
  }
  std::cout << "\n";
  std::cout << "plain reward: " << safeshed::format_double(report.plain_reward) << "\n";
  std::cout << "total shed:   " << safeshed::format_double(report.total_shed) << " p.u.\n";
  std::cout << "min safety:   " << safeshed::format_double(report.min_safety)
            << (report.any_violation ? " (violated)" : "") << "\n";
  if (report.blackout) {
    std::cout << "blackout branch fired\n";
  }
  if (!report.trajectory_path.empty()) {
    std::cout << "trajectory:   " << report.trajectory_path << "\n";
  }
  return kExitOk;
}

int cmd_export_plotdata(const std::string& input_csv, const std::string& output_csv,
                        double t_pf) {
  safeshed::export_plotdata(input_csv, output_csv, t_pf, safeshed::RecoveryEnvelope::defaults());
  std::cout << "wrote " << output_csv << "\n";
  return kExitOk;
}

int cmd_print_default_config() {
  std::cout << safeshed::run_config_to_json(safeshed::RunConfig::defaults()).dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Safety-constrained random-search training for emergency load shedding"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = default_out_dir();
  std::optional<std::string> resume;
  std::optional<std::uint64_t> seed;
  std::optional<int> parallelism;
  int stop_after = -1;
  bool force_resume = false;

  CLI::App* train = app.add_subcommand("train", "Run the training loop");
  train->add_option("--config", config_path, "Run configuration file")->required();
  train->add_option("--resume", resume, "Checkpoint to resume from");
  train->add_option("--seed", seed, "Master seed override");
  train->add_option("--parallelism", parallelism, "Rollout worker count override");
  train->add_option("--out-dir", out_dir, "Output directory override");
  train->add_option("--stop-after", stop_after,
                    "Stop after this many additional iterations (for split runs)");
  train->add_flag("--force-resume", force_resume,
                  "Resume even when the checkpoint config hash differs");

  std::string checkpoint_path;
  std::string traj_csv = "trajectory.csv";
  int fault_bus = 4;
  double fault_start = 1.0;
  double duration = 0.15;
  std::optional<std::string> dump_checkpoint;
  bool force_eval = false;

  CLI::App* evaluate = app.add_subcommand("evaluate", "Roll out a checkpointed policy once");
  evaluate->add_option("--config", config_path, "Run configuration file")->required();
  evaluate->add_option("--checkpoint", checkpoint_path, "Checkpoint to evaluate")->required();
  evaluate->add_option("--fault-bus", fault_bus, "Faulted bus id");
  evaluate->add_option("--fault-start", fault_start, "Fault start time, seconds");
  evaluate->add_option("--fault-duration", duration, "Fault duration, seconds");
  evaluate->add_option("--out", traj_csv, "Trajectory CSV output path");
  evaluate->add_option("--dump-checkpoint", dump_checkpoint,
                       "Also write the checkpoint as JSON to this path");
  evaluate->add_flag("--force", force_eval,
                     "Evaluate even when the checkpoint config hash differs");

  std::string plot_in;
  std::string plot_out;
  double t_pf = 0.0;

  CLI::App* plotdata = app.add_subcommand("export-plotdata",
                                          "Append the recovery-envelope column to a trajectory");
  plotdata->add_option("--input", plot_in, "Trajectory CSV from evaluate")->required();
  plotdata->add_option("--output", plot_out, "Output CSV path")->required();
  plotdata->add_option("--t-pf", t_pf, "Fault clearing time, seconds")->required();

  app.add_subcommand("print-default-config", "Print the default configuration as JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      return cmd_train(config_path, resume, seed, parallelism, out_dir, stop_after, force_resume);
    }
    if (evaluate->parsed()) {
      return cmd_evaluate(config_path, checkpoint_path, fault_bus, fault_start, duration,
                          traj_csv, dump_checkpoint, force_eval);
    }
    if (plotdata->parsed()) {
      return cmd_export_plotdata(plot_in, plot_out, t_pf);
    }
    return cmd_print_default_config();
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntimeError;
  }
}
