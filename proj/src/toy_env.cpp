#include "safeshed/toy_env.hpp"

#include <cmath>
#include <stdexcept>

namespace safeshed {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

void ToyParams::validate() const {
  if (!(dt > 0.0) || episode_steps <= 0) {
    throw std::invalid_argument("toy params: dt and episode_steps must be positive");
  }
  if (!(hazard_radius > 0.0)) {
    throw std::invalid_argument("toy params: hazard radius must be positive");
  }
  if (num_train_tasks <= 0 || num_eval_tasks <= 0) {
    throw std::invalid_argument("toy params: task counts must be positive");
  }
}

std::array<double, 2> ToyParams::train_start(int task_index) const {
  const double angle = kTwoPi * task_index / num_train_tasks;
  return {start[0] + task_ring_radius * std::cos(angle),
          start[1] + task_ring_radius * std::sin(angle)};
}

std::array<double, 2> ToyParams::eval_start(int episode_index) const {
  // Half-step phase offset keeps evaluation starts off the training ring.
  const double angle = kTwoPi * (episode_index + 0.5) / num_eval_tasks;
  return {start[0] + task_ring_radius * std::cos(angle),
          start[1] + task_ring_radius * std::sin(angle)};
}

ToyState toy_reset(const std::array<double, 2>& start) {
  return ToyState{start, 0};
}

ToyStepResult toy_step(const ToyState& state, std::span<const double> action,
                       const ToyParams& params) {
  if (action.size() != 2) {
    throw std::invalid_argument("toy_step: action must be 2-D");
  }
  if (state.step_count >= params.episode_steps) {
    throw std::invalid_argument("toy_step: episode already at full length");
  }
  ToyStepResult result;
  result.state = state;
  for (int i = 0; i < 2; ++i) {
    double a = action[static_cast<std::size_t>(i)];
    a = std::clamp(a, -1.0, 1.0);
    result.state.position[static_cast<std::size_t>(i)] += params.dt * a;
  }
  ++result.state.step_count;

  const double gx = result.state.position[0] - params.goal[0];
  const double gy = result.state.position[1] - params.goal[1];
  result.reward = -(gx * gx + gy * gy);

  const double hx = result.state.position[0] - params.hazard_center[0];
  const double hy = result.state.position[1] - params.hazard_center[1];
  result.safety = hx * hx + hy * hy - params.hazard_radius * params.hazard_radius;
  return result;
}

ToyEnv::ToyEnv(ToyParams params, std::array<double, 2> start)
    : params_(params), start_(start) {
  params_.validate();
}

std::vector<double> ToyEnv::reset() {
  state_ = toy_reset(start_);
  visited_.clear();
  done_ = false;
  return {params_.goal[0] - state_.position[0], params_.goal[1] - state_.position[1]};
}

EnvStep ToyEnv::step(std::span<const double> action) {
  if (done_) {
    throw std::runtime_error("toy env: step after episode end");
  }
  ToyStepResult result = toy_step(state_, action, params_);
  state_ = result.state;
  visited_.push_back(state_);

  EnvStep out;
  out.time = params_.dt * state_.step_count;
  out.observation = {params_.goal[0] - state_.position[0],
                     params_.goal[1] - state_.position[1]};
  out.reward = result.reward;
  out.safety_samples.push_back(result.safety);
  done_ = state_.step_count >= params_.episode_steps;
  out.done = done_;
  return out;
}

ToyEnvFactory::ToyEnvFactory(ToyParams params) : params_(params) {
  params_.validate();
}

std::unique_ptr<Environment> ToyEnvFactory::make(int task_index) const {
  const int total = params_.num_train_tasks + params_.num_eval_tasks;
  if (task_index < 0 || task_index >= total) {
    throw std::out_of_range("toy env factory: task index out of range");
  }
  const std::array<double, 2> start =
      task_index < params_.num_train_tasks
          ? params_.train_start(task_index)
          : params_.eval_start(task_index - params_.num_train_tasks);
  return std::make_unique<ToyEnv>(params_, start);
}

}  // namespace safeshed
