#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "safeshed/envelope.hpp"
#include "safeshed/grid_env.hpp"
#include "safeshed/toy_env.hpp"
#include "safeshed/trainer.hpp"

#include "json.hpp"

namespace safeshed {

enum class EnvKind { kGrid, kToy };

// Whole-run configuration: everything a training or evaluation run needs,
// round-trippable through a single JSON file. Unknown keys are rejected.
struct RunConfig {
  TrainerConfig trainer;
  RewardWeights reward;
  SafetyWindowSpec safety = SafetyWindowSpec::defaults();
  EnvKind env_kind = EnvKind::kGrid;
  SurrogateParams surrogate = SurrogateParams::defaults();
  TaskSet tasks = TaskSet::nine_task_default();
  ToyParams toy;
  int parallelism = 4;
  bool dump_trajectories = false;
  std::string out_dir = "runs/latest";
  std::string metrics_file = "metrics.jsonl";

  static RunConfig defaults();
  void validate() const;
};

nlohmann::json run_config_to_json(const RunConfig& config);
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);

// FNV-1a over the canonical JSON dump; ties checkpoints to the exact
// configuration that produced them.
std::uint64_t config_hash(const RunConfig& config);

std::unique_ptr<EnvironmentFactory> make_env_factory(const RunConfig& config);

}  // namespace safeshed
