#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "safeshed/env.hpp"
#include "safeshed/policy.hpp"
#include "safeshed/rollout.hpp"

namespace safeshed {

enum class MultiplierStrategy {
  kHeuristic,     // double on any violation, halve otherwise
  kDualGradient,  // descend on the dual using the mean safety value
  kNone,          // multiplier pinned at 0: the standard, unconstrained search
};

struct TrainerConfig {
  double step_size = 0.02;
  int num_directions = 16;
  double noise_std = 0.03;
  int top_directions = 8;
  int rollouts_per_direction = 3;
  double decay_rate = 0.995;
  int iterations = 300;
  double multiplier_init = 1.0;
  MultiplierStrategy strategy = MultiplierStrategy::kHeuristic;
  double dual_step = 0.5;
  double multiplier_min = 1.0 / 64.0;
  double multiplier_max = 1024.0;
  double discount = 0.99;  // part of the MDP description; the search is undiscounted
  std::uint64_t seed = 42;
  int checkpoint_interval = 25;

  void validate() const;
};

// Aggregated outcome for one exploration direction.
struct DirectionResult {
  int index = 0;
  double mean_reward_plus = 0.0;
  double mean_reward_minus = 0.0;
  std::vector<bool> violations;      // one flag per rollout, both sides
  std::vector<double> mean_safety;   // per-rollout mean safety value
};

struct IterationRecord {
  int iteration = 0;
  double multiplier = 0.0;  // after this iteration's update
  double step_size = 0.0;   // after decay
  double noise_std = 0.0;   // after decay
  double best_combined = 0.0;
  double mean_combined = 0.0;
  double mean_plain = 0.0;
  int violation_count = 0;
  double wall_seconds = 0.0;
};

struct TopDirections {
  std::vector<int> indices;  // ascending direction index
  double reward_std = 0.0;   // population std of the selected 2b side means
};

// Sorts directions by max(mean+, mean-) descending (ties to the lower
// index), keeps the best `count`, and returns the population standard
// deviation of their 2*count side means (guarded to 1 when degenerate).
TopDirections select_top_directions(std::span<const DirectionResult> results, int count);

// weights + step_size / (b * reward_std) * sum over selected directions of
// (mean+ - mean-) * delta, summed in ascending direction index order.
Matrix update_weights(const Matrix& weights, std::span<const DirectionResult> results,
                      std::span<const Matrix> deltas, const TopDirections& top,
                      double step_size);

std::pair<double, double> decay_schedule(double step_size, double noise_std, double rate);

// Any violation doubles the multiplier, none halves it; clamped.
double update_multiplier_heuristic(double multiplier, bool any_violation, double floor,
                                   double ceiling);

// One dual gradient step: max(floor, multiplier - step * mean_safety).
double update_multiplier_dual(double multiplier, double mean_safety, double step, double floor);

// Mutable training state; exactly what a checkpoint captures.
struct TrainerState {
  int iteration = 0;
  PolicyParams policy;
  RunningStats stats;
  double multiplier = 0.0;
  double step_size = 0.0;
  double noise_std = 0.0;
  std::uint64_t master_seed = 0;
  std::uint64_t rng_cursor = 0;  // next iteration index for stream derivation
};

// Injection point for exploration directions; the default draws i.i.d.
// standard normal entries from a per-(iteration, direction) stream.
class DirectionSampler {
 public:
  virtual ~DirectionSampler() = default;
  virtual Matrix sample(std::uint64_t master_seed, int iteration, int direction, int rows,
                        int cols) = 0;
};

class GaussianDirectionSampler : public DirectionSampler {
 public:
  Matrix sample(std::uint64_t master_seed, int iteration, int direction, int rows,
                int cols) override;
};

struct TrainOutcome {
  TrainerState state;
  std::vector<IterationRecord> records;
};

class Trainer {
 public:
  using IterationCallback = std::function<void(const TrainerState&, const IterationRecord&)>;

  Trainer(TrainerConfig config, const EnvironmentFactory& factory, RolloutBackend& backend,
          std::unique_ptr<DirectionSampler> sampler = nullptr);

  // Fresh state: small random policy, empty stats, initial multiplier and
  // schedule values.
  TrainerState init_state() const;

  // Runs iterations from `state` until config.iterations, or fewer when
  // stop_after (a count of additional iterations) is given. The callback
  // fires after each completed iteration.
  TrainOutcome train(TrainerState state, int stop_after = -1,
                     const IterationCallback& callback = {}) const;

  const TrainerConfig& config() const { return config_; }

  // Task order for one iteration: a seeded shuffle of the task indices;
  // rollout k uses entry k mod |T|.
  static std::vector<int> iteration_task_order(std::uint64_t master_seed, int iteration,
                                               int num_tasks);

  static std::uint64_t rollout_seed(std::uint64_t master_seed, int iteration, int direction,
                                    int side, int rollout);

 private:
  TrainerConfig config_;
  const EnvironmentFactory& factory_;
  RolloutBackend& backend_;
  std::unique_ptr<DirectionSampler> sampler_;
};

// Deterministic evaluation episodes with frozen stats and no multiplier
// pressure; used by the CLI and the acceptance runs.
struct EvaluationEpisode {
  int task_index = 0;
  double plain_reward = 0.0;
  bool violation = false;  // any negative safety sample
  bool blackout = false;
};

std::vector<EvaluationEpisode> evaluate_policy(const EnvironmentFactory& factory,
                                               std::span<const int> task_indices,
                                               const PolicyParams& policy,
                                               const RunningStats& stats);

}  // namespace safeshed
