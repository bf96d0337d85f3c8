#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "safeshed/env.hpp"
#include "safeshed/policy.hpp"

namespace safeshed {

// Everything a rollout needs, by value. The seed is a pure function of
// (master seed, iteration, direction, side, rollout), so any rollout can be
// replayed in isolation.
struct RolloutSpec {
  int iteration = 0;
  int direction = 0;
  int side = +1;  // +1 / -1, the antithetic pair
  int rollout = 0;
  int task_index = 0;
  PolicyParams policy;
  RunningStats stats;     // frozen normalization snapshot
  double multiplier = 0.0;
  std::uint64_t seed = 0;
};

struct TrajectoryRow {
  double t = 0.0;
  std::vector<double> observation;
  std::vector<double> action;
  double reward = 0.0;
  std::optional<double> safety;
};

struct RolloutResult {
  // spec identity
  int iteration = 0;
  int direction = 0;
  int side = +1;
  int rollout = 0;
  int task_index = 0;

  double combined_reward = 0.0;
  double plain_reward = 0.0;
  std::vector<double> safety_trace;
  bool violation = false;
  bool blackout = false;
  RunningStats stats_delta;
  std::optional<std::string> trajectory_path;

  bool failed = false;
  std::string error;

  // min over the trace; +inf when the trace is empty
  double min_safety() const;
  // mean over the trace; 0 when the trace is empty
  double mean_safety() const;
};

struct EpisodeOptions {
  bool collect_stats = true;
  bool record_trajectory = false;
  std::string trajectory_dir;  // rollouts write CSVs here when non-empty
};

struct EpisodeResult {
  double plain_reward = 0.0;
  double combined_reward = 0.0;
  std::vector<double> safety_trace;
  bool violation = false;
  bool blackout = false;
  RunningStats stats_delta;
  std::vector<TrajectoryRow> rows;
};

// Core episode loop: observe -> normalize with the frozen snapshot -> act ->
// step, accumulating the plain reward and the safety trace. The combined
// return is plain + multiplier * (trace sum), formed once at the end.
EpisodeResult run_episode(Environment& env, const PolicyParams& policy,
                          const RunningStats& frozen_stats, double multiplier,
                          const EpisodeOptions& options = {});

RolloutResult run_rollout(const RolloutSpec& spec, const EnvironmentFactory& factory,
                          const EpisodeOptions& options = {});

// Seam between the trainer and rollout execution; tests script it.
class RolloutBackend {
 public:
  virtual ~RolloutBackend() = default;
  virtual std::vector<RolloutResult> execute_batch(const std::vector<RolloutSpec>& specs) = 0;
};

// Thread-pool execution of independent rollouts. Results are keyed by spec
// position, so output is identical for any worker count. A failing rollout
// becomes an error result carrying the spec identity; the batch completes.
class RolloutEngine : public RolloutBackend {
 public:
  RolloutEngine(const EnvironmentFactory& factory, int parallelism,
                std::optional<std::string> trajectory_dir = std::nullopt);

  std::vector<RolloutResult> execute_batch(const std::vector<RolloutSpec>& specs) override;

  int parallelism() const { return parallelism_; }

 private:
  const EnvironmentFactory& factory_;
  int parallelism_;
  std::optional<std::string> trajectory_dir_;
};

}  // namespace safeshed
