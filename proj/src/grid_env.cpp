#include "safeshed/grid_env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace safeshed {

void FaultScenario::validate() const {
  if (!(fault_start >= 0.0)) {
    throw std::invalid_argument("fault scenario: fault_start must be nonnegative");
  }
  if (!(duration >= 0.0)) {
    throw std::invalid_argument("fault scenario: duration must be nonnegative");
  }
}

TaskSet TaskSet::nine_task_default() {
  TaskSet tasks;
  for (int bus : {4, 15, 21}) {
    for (double duration : {0.0, 0.15, 0.28}) {
      tasks.scenarios.push_back({bus, 1.0, duration});
    }
  }
  return tasks;
}

void TaskSet::validate() const {
  if (scenarios.empty()) {
    throw std::invalid_argument("task set: empty");
  }
  for (const auto& s : scenarios) {
    s.validate();
  }
}

SurrogateParams SurrogateParams::defaults() {
  SurrogateParams p;
  // Severity per monitored bus [4, 7, 8, 18]: 1.0 at the faulted bus itself,
  // 0.55 for electrically close monitored buses, 0.35 otherwise. Bus 7 is the
  // held-out fault used only for the generalization test.
  p.proximity[4] = {1.0, 0.35, 0.55, 0.55};
  p.proximity[15] = {0.55, 0.35, 0.35, 0.35};
  p.proximity[21] = {0.35, 0.35, 0.35, 0.35};
  p.proximity[7] = {0.35, 1.0, 0.55, 0.35};
  for (auto& row : p.coupling) {
    row = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  }
  return p;
}

void SurrogateParams::validate() const {
  if (proximity.empty()) {
    throw std::invalid_argument("surrogate: proximity table empty");
  }
  for (const auto& [bus, row] : proximity) {
    for (double v : row) {
      if (!(v >= 0.0)) {
        throw std::invalid_argument("surrogate: proximity weights must be nonnegative");
      }
    }
  }
  for (const auto& row : coupling) {
    for (double v : row) {
      if (!(v >= 0.0)) {
        throw std::invalid_argument("surrogate: coupling weights must be nonnegative");
      }
    }
  }
  if (!(depression_gain > 0.0) || !(stall_gain > 0.0) || !(base_time_constant > 0.0) ||
      !(load_floor > 0.0)) {
    throw std::invalid_argument("surrogate: gains must be positive");
  }
  if (!(sim_step > 0.0) || !(action_interval > 0.0) || !(episode_length > 0.0)) {
    throw std::invalid_argument("surrogate: time steps must be positive");
  }
  const double per_action = action_interval / sim_step;
  if (std::abs(per_action - std::round(per_action)) > 1e-9 || per_action < 1.0) {
    throw std::invalid_argument("surrogate: sim_step must divide action_interval");
  }
  const double per_episode = episode_length / action_interval;
  if (std::abs(per_episode - std::round(per_episode)) > 1e-9 || per_episode < 1.0) {
    throw std::invalid_argument("surrogate: action_interval must divide episode_length");
  }
  if (!(sim_step < base_time_constant * load_floor)) {
    throw std::invalid_argument(
        "surrogate: sim_step must resolve the fastest recovery time constant");
  }
}

int SurrogateParams::substeps_per_action() const {
  return static_cast<int>(std::round(action_interval / sim_step));
}

namespace {

const std::array<double, 4>& proximity_row(const SurrogateParams& params, int fault_bus) {
  auto it = params.proximity.find(fault_bus);
  if (it == params.proximity.end()) {
    throw std::invalid_argument("surrogate: fault bus " + std::to_string(fault_bus) +
                                " not in proximity table");
  }
  return it->second;
}

double recovery_time_constant(const SurrogateParams& params, int bus_index,
                              const std::array<double, 3>& load_fractions) {
  double served = 0.0;
  for (std::size_t j = 0; j < load_fractions.size(); ++j) {
    served += params.coupling[static_cast<std::size_t>(bus_index)][j] * load_fractions[j];
  }
  return params.base_time_constant * (params.load_floor + served);
}

}  // namespace

GridState grid_reset(const FaultScenario& scenario, const SurrogateParams& params) {
  scenario.validate();
  params.validate();
  proximity_row(params, scenario.fault_bus);  // rejects unknown buses
  return GridState{};
}

GridStepResult grid_step(const GridState& state, std::span<const double> action,
                         const FaultScenario& scenario, const SurrogateParams& params) {
  if (action.size() != kLoadBuses.size()) {
    throw std::invalid_argument("grid_step: action dimension mismatch");
  }
  if (!(state.t < params.episode_length - 0.5 * params.sim_step)) {
    throw std::invalid_argument("grid_step: episode already at full length");
  }
  const auto& prox = proximity_row(params, scenario.fault_bus);
  const double t_clear = scenario.clearing_time();

  GridStepResult result;
  GridState& next = result.state;
  next = state;
  StepOutcome& outcome = result.outcome;

  // Shedding applies instantaneously at the action boundary. a_j is a
  // fraction of the initial load, negative means shed.
  outcome.shed_amounts.assign(kLoadBuses.size(), 0.0);
  for (std::size_t j = 0; j < kLoadBuses.size(); ++j) {
    double a = action[j];
    if (a < -0.2 - 1e-12 || a > 1e-12) {
      outcome.action_clipped = true;
    }
    a = std::clamp(a, -0.2, 0.0);
    const double before = next.load_fractions[j];
    if (before == 0.0 && a < -1e-9) {
      ++outcome.invalid_count;
    }
    const double after = std::max(0.0, before + a);
    outcome.shed_amounts[j] = before - after;
    next.load_fractions[j] = after <= 1e-12 ? 0.0 : after;
  }

  const int substeps = params.substeps_per_action();
  for (int k = 0; k < substeps; ++k) {
    const double prev_te = static_cast<double>(next.substep) * params.sim_step;
    ++next.substep;
    const double te = static_cast<double>(next.substep) * params.sim_step;
    if (te >= scenario.fault_start && te < t_clear) {
      for (std::size_t i = 0; i < kMonitoredBuses.size(); ++i) {
        next.voltages[i] = std::max(0.2, 1.0 - params.depression_gain * prox[i]);
      }
    } else if (te >= t_clear && te >= scenario.fault_start) {
      if (prev_te < t_clear) {
        // Fault clears within this substep; the stall level it leaves behind
        // scales with fault duration and electrical proximity.
        for (std::size_t i = 0; i < kMonitoredBuses.size(); ++i) {
          next.stall[i] = params.stall_gain * scenario.duration * prox[i];
        }
      } else {
        for (std::size_t i = 0; i < kMonitoredBuses.size(); ++i) {
          const double tau = recovery_time_constant(params, static_cast<int>(i),
                                                    next.load_fractions);
          next.stall[i] *= (1.0 - params.sim_step / tau);
        }
      }
      for (std::size_t i = 0; i < kMonitoredBuses.size(); ++i) {
        next.voltages[i] = std::max(0.0, 1.0 - next.stall[i]);
      }
    }
    next.t = te;
    result.substep_samples.push_back({te, next.voltages});
  }

  outcome.t = next.t;
  outcome.voltages.assign(next.voltages.begin(), next.voltages.end());
  return result;
}

std::vector<double> grid_observe(const GridState& state) {
  std::vector<double> obs;
  obs.reserve(7);
  obs.insert(obs.end(), state.voltages.begin(), state.voltages.end());
  obs.insert(obs.end(), state.load_fractions.begin(), state.load_fractions.end());
  return obs;
}

GridEnv::GridEnv(FaultScenario scenario, SurrogateParams params, RewardWeights weights,
                 SafetyWindowSpec safety)
    : scenario_(scenario),
      params_(std::move(params)),
      weights_(weights),
      safety_(std::move(safety)),
      envelope_(RecoveryEnvelope::from_safety_windows(safety_)) {
  weights_.validate();
  state_ = grid_reset(scenario_, params_);
}

std::vector<double> GridEnv::reset() {
  state_ = grid_reset(scenario_, params_);
  trajectory_.clear();
  done_ = false;
  return grid_observe(state_);
}

EnvStep GridEnv::step(std::span<const double> action) {
  if (done_) {
    throw std::runtime_error("grid env: step after episode end");
  }
  GridStepResult result = grid_step(state_, action, scenario_, params_);
  state_ = result.state;
  trajectory_.push_back(result.outcome);

  const double t_clear = scenario_.clearing_time();
  EnvStep out;
  out.time = result.outcome.t;
  out.observation = grid_observe(state_);
  const RewardResult reward = step_reward(result.outcome, t_clear, weights_, envelope_);
  out.reward = reward.reward;
  out.blackout = reward.blackout;
  if (params_.substep_safety) {
    for (const auto& [te, voltages] : result.substep_samples) {
      if (te > t_clear) {
        out.safety_samples.push_back(safety_value(voltages, te, t_clear, safety_));
      }
    }
  } else if (result.outcome.t > t_clear) {
    out.safety_samples.push_back(
        safety_value(result.outcome.voltages, result.outcome.t, t_clear, safety_));
  }
  if (reward.blackout || state_.t >= params_.episode_length - 0.5 * params_.sim_step) {
    done_ = true;
  }
  out.done = done_;
  return out;
}

std::vector<std::string> GridEnv::observation_labels() const {
  return {"V4", "V7", "V8", "V18", "p4", "p7", "p18"};
}

std::vector<std::string> GridEnv::action_labels() const {
  return {"a4", "a7", "a18"};
}

GridEnvFactory::GridEnvFactory(TaskSet tasks, SurrogateParams params, RewardWeights weights,
                               SafetyWindowSpec safety)
    : tasks_(std::move(tasks)),
      params_(std::move(params)),
      weights_(weights),
      safety_(std::move(safety)) {
  tasks_.validate();
  params_.validate();
}

std::unique_ptr<Environment> GridEnvFactory::make(int task_index) const {
  if (task_index < 0 || task_index >= num_tasks()) {
    throw std::out_of_range("grid env factory: task index out of range");
  }
  return std::make_unique<GridEnv>(tasks_.scenarios[static_cast<std::size_t>(task_index)],
                                   params_, weights_, safety_);
}

}  // namespace safeshed
