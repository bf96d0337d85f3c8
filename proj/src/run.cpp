#include "safeshed/run.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "safeshed/io.hpp"
#include "safeshed/rollout.hpp"

namespace safeshed {

namespace fs = std::filesystem;
using nlohmann::json;

std::string metrics_line(const IterationRecord& record) {
  const json j{{"iteration", record.iteration},
               {"multiplier", record.multiplier},
               {"step_size", record.step_size},
               {"noise_std", record.noise_std},
               {"best_combined", record.best_combined},
               {"mean_combined", record.mean_combined},
               {"mean_plain", record.mean_plain},
               {"violations", record.violation_count}};
  return j.dump();
}

IterationRecord parse_metrics_line(const std::string& line) {
  const json j = json::parse(line);
  IterationRecord record;
  record.iteration = j.at("iteration").get<int>();
  record.multiplier = j.at("multiplier").get<double>();
  record.step_size = j.at("step_size").get<double>();
  record.noise_std = j.at("noise_std").get<double>();
  record.best_combined = j.at("best_combined").get<double>();
  record.mean_combined = j.at("mean_combined").get<double>();
  record.mean_plain = j.at("mean_plain").get<double>();
  record.violation_count = j.at("violations").get<int>();
  return record;
}

namespace {

std::string checkpoint_name(int iteration) {
  std::ostringstream s;
  s << "checkpoint_" << std::setw(6) << std::setfill('0') << iteration << ".bin";
  return s.str();
}

}  // namespace

TrainRunSummary run_training(RunConfig config, const TrainRunOptions& options) {
  if (options.seed_override) {
    config.trainer.seed = *options.seed_override;
  }
  if (options.parallelism_override) {
    config.parallelism = *options.parallelism_override;
  }
  if (options.out_dir_override) {
    config.out_dir = *options.out_dir_override;
  }
  config.validate();
  const std::uint64_t hash = config_hash(config);

  fs::create_directories(config.out_dir);

  std::unique_ptr<EnvironmentFactory> factory = make_env_factory(config);
  std::optional<std::string> trajectory_dir;
  if (config.dump_trajectories) {
    trajectory_dir = (fs::path(config.out_dir) / "trajectories").string();
  }
  RolloutEngine engine(*factory, config.parallelism, trajectory_dir);
  Trainer trainer(config.trainer, *factory, engine);

  TrainerState state;
  if (options.resume_checkpoint) {
    const Checkpoint checkpoint = load_checkpoint(*options.resume_checkpoint);
    if (checkpoint.config_hash != hash && !options.force_resume) {
      throw std::invalid_argument(
          "resume: checkpoint config hash does not match this configuration "
          "(pass --force-resume to override)");
    }
    state = checkpoint.state;
  } else {
    state = trainer.init_state();
  }
  const int start_iteration = state.iteration;

  const std::string metrics_path = (fs::path(config.out_dir) / config.metrics_file).string();
  std::ofstream metrics(metrics_path, std::ios::binary | std::ios::app);
  if (!metrics) {
    throw std::runtime_error("cannot open metrics file: " + metrics_path);
  }

  const auto on_iteration = [&](const TrainerState& current, const IterationRecord& record) {
    metrics << metrics_line(record) << "\n";
    metrics.flush();
    if (record.iteration % config.trainer.checkpoint_interval == 0 &&
        record.iteration < config.trainer.iterations) {
      const std::string path =
          (fs::path(config.out_dir) / checkpoint_name(record.iteration)).string();
      save_checkpoint(Checkpoint::from_state(current, hash), path);
    }
  };

  TrainOutcome outcome = trainer.train(std::move(state), options.stop_after, on_iteration);

  TrainRunSummary summary;
  summary.final_state = std::move(outcome.state);
  summary.iterations_run = summary.final_state.iteration - start_iteration;
  summary.metrics_path = metrics_path;
  const bool finished = summary.final_state.iteration >= config.trainer.iterations;
  const std::string final_name =
      finished ? "checkpoint_final.bin" : checkpoint_name(summary.final_state.iteration);
  summary.final_checkpoint_path = (fs::path(config.out_dir) / final_name).string();
  save_checkpoint(Checkpoint::from_state(summary.final_state, hash),
                  summary.final_checkpoint_path);
  return summary;
}

EvaluateReport run_evaluation(const RunConfig& config, const Checkpoint& checkpoint,
                              const FaultScenario& scenario,
                              const std::string& trajectory_csv_path) {
  if (config.env_kind != EnvKind::kGrid) {
    throw std::invalid_argument("evaluate: requires a grid environment configuration");
  }
  GridEnv env(scenario, config.surrogate, config.reward, config.safety);

  EpisodeOptions options;
  options.collect_stats = false;
  options.record_trajectory = true;
  const EpisodeResult episode =
      run_episode(env, checkpoint.state.policy, checkpoint.state.stats, 0.0, options);

  EvaluateReport report;
  report.plain_reward = episode.plain_reward;
  report.any_violation = episode.violation;
  report.blackout = episode.blackout;
  report.min_safety = std::numeric_limits<double>::infinity();
  for (double f : episode.safety_trace) {
    report.min_safety = std::min(report.min_safety, f);
  }
  for (const StepOutcome& outcome : env.trajectory()) {
    for (double shed : outcome.shed_amounts) {
      report.total_shed += shed;
    }
  }
  report.criterion =
      check_recovery_criterion(env.trajectory(), scenario.clearing_time(), env.envelope());

  if (!trajectory_csv_path.empty()) {
    write_trajectory_csv(trajectory_csv_path, env.observation_labels(), env.action_labels(),
                         episode.rows);
    report.trajectory_path = trajectory_csv_path;
  }
  return report;
}

}  // namespace safeshed
