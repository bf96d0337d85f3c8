#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace safeshed {

// Result of one action step as seen by the rollout loop. safety_samples is
// empty whenever the safety function is undefined at this step (pre-fault
// and during-fault samples on the grid).
struct EnvStep {
  double time = 0.0;  // simulation time of the post-step sample
  std::vector<double> observation;
  double reward = 0.0;
  std::vector<double> safety_samples;
  bool done = false;
  bool blackout = false;
};

// Episode environment bound to one task. Instances are single-threaded value
// machines; concurrency comes from running many instances.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual int observation_dim() const = 0;
  virtual int action_dim() const = 0;
  virtual double action_low() const = 0;
  virtual double action_high() const = 0;

  virtual std::vector<double> reset() = 0;
  virtual EnvStep step(std::span<const double> action) = 0;

  virtual std::vector<std::string> observation_labels() const = 0;
  virtual std::vector<std::string> action_labels() const = 0;
};

class EnvironmentFactory {
 public:
  virtual ~EnvironmentFactory() = default;

  virtual int num_tasks() const = 0;
  virtual std::unique_ptr<Environment> make(int task_index) const = 0;
};

}  // namespace safeshed
