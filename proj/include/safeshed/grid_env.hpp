#pragma once

#include <array>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "safeshed/env.hpp"
#include "safeshed/envelope.hpp"

namespace safeshed {

// Monitored voltage buses and controllable load buses of the study system.
inline constexpr std::array<int, 4> kMonitoredBuses = {4, 7, 8, 18};
inline constexpr std::array<int, 3> kLoadBuses = {4, 7, 18};

struct FaultScenario {
  int fault_bus = 4;
  double fault_start = 1.0;  // seconds into the episode
  double duration = 0.0;     // 0 means the fault degenerates to a no-op

  double clearing_time() const { return fault_start + duration; }
  void validate() const;
};

struct TaskSet {
  std::vector<FaultScenario> scenarios;

  // 3 fault buses x 3 durations.
  static TaskSet nine_task_default();
  void validate() const;
};

struct GridState {
  double t = 0.0;
  std::int64_t substep = 0;  // t == substep * sim_step, kept to avoid drift
  std::array<double, 4> voltages{1.0, 1.0, 1.0, 1.0};
  std::array<double, 3> load_fractions{1.0, 1.0, 1.0};
  std::array<double, 4> stall{0.0, 0.0, 0.0, 0.0};
};

// First-order surrogate of fault-induced delayed voltage recovery. A fault
// depresses voltages while active; clearing leaves a per-bus stall level
// that decays with a time constant growing with the remaining served load,
// so shedding load speeds recovery.
struct SurrogateParams {
  // fault bus -> severity weight per monitored bus (ordering of
  // kMonitoredBuses). Keys define the admissible fault buses.
  std::map<int, std::array<double, 4>> proximity;
  // monitored bus x load bus coupling used in the recovery time constant.
  std::array<std::array<double, 3>, 4> coupling;
  double depression_gain = 0.8;     // during-fault voltage depression scale
  double stall_gain = 1.4;          // stall level per second of fault duration
  double base_time_constant = 1.2;  // seconds
  double load_floor = 0.05;         // keeps the time constant positive at zero load
  double sim_step = 0.02;           // integrator substep, seconds
  double action_interval = 0.1;     // seconds between policy actions
  double episode_length = 10.0;     // seconds
  bool substep_safety = false;      // sample the safety function at substeps too

  static SurrogateParams defaults();
  void validate() const;
  int substeps_per_action() const;
};

GridState grid_reset(const FaultScenario& scenario, const SurrogateParams& params);

struct GridStepResult {
  GridState state;
  StepOutcome outcome;
  // (time, voltages) at every integrator substep of this action interval.
  std::vector<std::pair<double, std::array<double, 4>>> substep_samples;
};

// Applies the shed action at the boundary, then advances one action interval
// in explicit-Euler substeps. Actions outside [-0.2, 0] are clipped and
// flagged in the outcome.
GridStepResult grid_step(const GridState& state, std::span<const double> action,
                         const FaultScenario& scenario, const SurrogateParams& params);

// [V4, V7, V8, V18, p4, p7, p18]
std::vector<double> grid_observe(const GridState& state);

// Episode adapter over the surrogate; composes the reward, safety and
// blackout rules. Keeps the outcome trajectory for criterion checks.
class GridEnv : public Environment {
 public:
  GridEnv(FaultScenario scenario, SurrogateParams params, RewardWeights weights,
          SafetyWindowSpec safety);

  int observation_dim() const override { return 7; }
  int action_dim() const override { return 3; }
  double action_low() const override { return -0.2; }
  double action_high() const override { return 0.0; }

  std::vector<double> reset() override;
  EnvStep step(std::span<const double> action) override;

  std::vector<std::string> observation_labels() const override;
  std::vector<std::string> action_labels() const override;

  const std::vector<StepOutcome>& trajectory() const { return trajectory_; }
  const FaultScenario& scenario() const { return scenario_; }
  const RecoveryEnvelope& envelope() const { return envelope_; }

 private:
  FaultScenario scenario_;
  SurrogateParams params_;
  RewardWeights weights_;
  SafetyWindowSpec safety_;
  RecoveryEnvelope envelope_;
  GridState state_;
  bool done_ = true;
  std::vector<StepOutcome> trajectory_;
};

class GridEnvFactory : public EnvironmentFactory {
 public:
  GridEnvFactory(TaskSet tasks, SurrogateParams params, RewardWeights weights,
                 SafetyWindowSpec safety);

  int num_tasks() const override { return static_cast<int>(tasks_.scenarios.size()); }
  std::unique_ptr<Environment> make(int task_index) const override;

 private:
  TaskSet tasks_;
  SurrogateParams params_;
  RewardWeights weights_;
  SafetyWindowSpec safety_;
};

}  // namespace safeshed
