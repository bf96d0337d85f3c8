#pragma once

#include <optional>
#include <string>

#include "safeshed/checkpoint.hpp"
#include "safeshed/config.hpp"
#include "safeshed/trainer.hpp"

namespace safeshed {

// One metrics line per completed iteration, line-delimited JSON. Wall-clock
// time is deliberately excluded so runs are byte-reproducible.
std::string metrics_line(const IterationRecord& record);
IterationRecord parse_metrics_line(const std::string& line);

struct TrainRunOptions {
  std::optional<std::string> resume_checkpoint;
  std::optional<std::uint64_t> seed_override;
  std::optional<int> parallelism_override;
  std::optional<std::string> out_dir_override;
  int stop_after = -1;      // additional iterations this invocation; -1 = to the end
  bool force_resume = false;  // accept a checkpoint whose config hash differs
};

struct TrainRunSummary {
  TrainerState final_state;
  int iterations_run = 0;
  std::string final_checkpoint_path;
  std::string metrics_path;
};

TrainRunSummary run_training(RunConfig config, const TrainRunOptions& options = {});

struct EvaluateReport {
  double plain_reward = 0.0;
  double total_shed = 0.0;
  double min_safety = 0.0;
  bool any_violation = false;
  bool blackout = false;
  CriterionReport criterion;
  std::string trajectory_path;
};

// One deterministic rollout of the checkpointed policy on a fault scenario,
// with frozen normalization stats; writes the trajectory CSV.
EvaluateReport run_evaluation(const RunConfig& config, const Checkpoint& checkpoint,
                              const FaultScenario& scenario,
                              const std::string& trajectory_csv_path);

}  // namespace safeshed
