#pragma once

#include <array>
#include <memory>
#include <span>
#include <vector>

#include "safeshed/env.hpp"

namespace safeshed {

// Constrained point-mass benchmark used to validate the optimizer: reach the
// goal while a circular hazard sits on the unconstrained-optimal straight
// path. Reward ignores the hazard entirely; only the safety function sees it.
struct ToyParams {
  std::array<double, 2> start{-0.18, 0.0};
  std::array<double, 2> goal{0.18, 0.0};
  std::array<double, 2> hazard_center{0.0, 0.0};
  double hazard_radius = 0.07;
  double dt = 0.06;
  int episode_steps = 50;
  // Tasks are start positions on a small ring around the base start; the
  // evaluation ring is phase-shifted so no evaluation start was trained on.
  double task_ring_radius = 0.025;
  int num_train_tasks = 8;
  int num_eval_tasks = 10;

  void validate() const;
  std::array<double, 2> train_start(int task_index) const;
  std::array<double, 2> eval_start(int episode_index) const;
};

struct ToyState {
  std::array<double, 2> position{0.0, 0.0};
  int step_count = 0;
};

ToyState toy_reset(const std::array<double, 2>& start);

struct ToyStepResult {
  ToyState state;
  double reward = 0.0;  // -||x' - goal||^2
  double safety = 0.0;  // ||x' - hazard||^2 - radius^2, negative inside
};

ToyStepResult toy_step(const ToyState& state, std::span<const double> action,
                       const ToyParams& params);

class ToyEnv : public Environment {
 public:
  ToyEnv(ToyParams params, std::array<double, 2> start);

  int observation_dim() const override { return 2; }
  int action_dim() const override { return 2; }
  double action_low() const override { return -1.0; }
  double action_high() const override { return 1.0; }

  std::vector<double> reset() override;
  EnvStep step(std::span<const double> action) override;

  std::vector<std::string> observation_labels() const override { return {"dx", "dy"}; }
  std::vector<std::string> action_labels() const override { return {"ax", "ay"}; }

  const std::vector<ToyState>& visited() const { return visited_; }

 private:
  ToyParams params_;
  std::array<double, 2> start_;
  ToyState state_;
  bool done_ = true;
  std::vector<ToyState> visited_;
};

// Task indices [0, num_train_tasks) map to the training ring;
// [num_train_tasks, num_train_tasks + num_eval_tasks) to the evaluation ring.
class ToyEnvFactory : public EnvironmentFactory {
 public:
  explicit ToyEnvFactory(ToyParams params);

  int num_tasks() const override { return params_.num_train_tasks; }
  int num_eval_tasks() const { return params_.num_eval_tasks; }
  std::unique_ptr<Environment> make(int task_index) const override;

 private:
  ToyParams params_;
};

}  // namespace safeshed
