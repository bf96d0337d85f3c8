#include "safeshed/envelope.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace safeshed {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

SafetyWindowSpec SafetyWindowSpec::defaults() {
  SafetyWindowSpec spec;
  spec.windows = {
      {0.0, 0.33, 0.4, 1.1},
      {0.33, 0.5, 0.35, 1.15},
      {0.5, 1.5, 0.3, 1.2},
      {1.5, kInf, 0.275, 1.225},
  };
  return spec;
}

void SafetyWindowSpec::validate() const {
  if (windows.empty()) {
    throw std::invalid_argument("safety windows: empty");
  }
  if (windows.front().start != 0.0) {
    throw std::invalid_argument("safety windows: first window must start at 0");
  }
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto& w = windows[i];
    if (!(w.radius > 0.0)) {
      throw std::invalid_argument("safety windows: radius must be positive");
    }
    if (!(w.end > w.start)) {
      throw std::invalid_argument("safety windows: end must exceed start");
    }
    if (i + 1 < windows.size() && windows[i + 1].start != w.end) {
      throw std::invalid_argument("safety windows: windows must be contiguous");
    }
  }
  if (windows.back().end != kInf) {
    throw std::invalid_argument("safety windows: last window must be unbounded");
  }
}

const SafetyWindow& SafetyWindowSpec::window_at(double tau) const {
  if (!(tau > 0.0)) {
    throw std::invalid_argument("safety window lookup requires a post-fault offset");
  }
  for (const auto& w : windows) {
    if (tau > w.start && tau <= w.end) {
      return w;
    }
  }
  throw std::invalid_argument("safety window lookup: offset not covered");
}

RecoveryEnvelope RecoveryEnvelope::defaults() {
  return from_safety_windows(SafetyWindowSpec::defaults());
}

RecoveryEnvelope RecoveryEnvelope::from_safety_windows(const SafetyWindowSpec& spec) {
  spec.validate();
  RecoveryEnvelope env;
  env.upper_bound = spec.windows.front().upper();
  for (const auto& w : spec.windows) {
    env.thresholds.push_back({w.start, w.lower()});
  }
  env.validate();
  return env;
}

void RecoveryEnvelope::validate() const {
  if (thresholds.empty() || thresholds.front().offset != 0.0) {
    throw std::invalid_argument("recovery envelope: thresholds must start at offset 0");
  }
  for (std::size_t i = 1; i < thresholds.size(); ++i) {
    if (!(thresholds[i].offset > thresholds[i - 1].offset)) {
      throw std::invalid_argument("recovery envelope: offsets must be strictly increasing");
    }
    if (thresholds[i].lower_bound < thresholds[i - 1].lower_bound) {
      throw std::invalid_argument("recovery envelope: lower bounds must be non-decreasing");
    }
  }
}

double RecoveryEnvelope::lower_bound_at(double tau) const {
  if (!(tau > 0.0)) {
    throw std::invalid_argument("envelope lookup requires a post-fault offset");
  }
  double bound = thresholds.front().lower_bound;
  for (const auto& th : thresholds) {
    if (tau > th.offset) {
      bound = th.lower_bound;
    }
  }
  return bound;
}

void RewardWeights::validate() const {
  if (!(voltage_weight > 0.0) || !(shed_weight > 0.0) || !(invalid_weight > 0.0)) {
    throw std::invalid_argument("reward weights must be positive");
  }
  if (!(blackout_penalty < 0.0)) {
    throw std::invalid_argument("blackout penalty must be negative");
  }
  if (!(blackout_deadline > 0.0)) {
    throw std::invalid_argument("blackout deadline must be positive");
  }
}

double safety_value(std::span<const double> voltages, double t, double t_pf,
                    const SafetyWindowSpec& spec) {
  if (!(t > t_pf)) {
    throw std::invalid_argument("safety_value: defined only after fault clearing");
  }
  if (voltages.empty()) {
    throw std::invalid_argument("safety_value: no voltages");
  }
  const SafetyWindow& w = spec.window_at(t - t_pf);
  double worst = 0.0;
  for (double v : voltages) {
    const double dev = v - w.center;
    worst = std::max(worst, dev * dev);
  }
  return w.radius * w.radius - worst;
}

double delta_v(double voltage, double t, double t_pf, const RecoveryEnvelope& envelope) {
  if (!(t > t_pf)) {
    throw std::invalid_argument("delta_v: defined only after fault clearing");
  }
  return std::min(voltage - envelope.lower_bound_at(t - t_pf), 0.0);
}

RewardResult step_reward(const StepOutcome& outcome, double t_pf, const RewardWeights& weights,
                         const RecoveryEnvelope& envelope) {
  if (outcome.t > t_pf + weights.blackout_deadline) {
    for (double v : outcome.voltages) {
      if (v < 0.95) {
        return {weights.blackout_penalty, true};
      }
    }
  }
  double deficit = 0.0;
  if (outcome.t > t_pf) {
    for (double v : outcome.voltages) {
      deficit += delta_v(v, outcome.t, t_pf, envelope);
    }
  }
  double shed = 0.0;
  for (double s : outcome.shed_amounts) {
    shed += s;
  }
  const double reward = weights.voltage_weight * deficit - weights.shed_weight * shed -
                        weights.invalid_weight * outcome.invalid_count;
  return {reward, false};
}

double combined_reward(double reward, double safety, double multiplier) {
  if (!(multiplier > 0.0)) {
    throw std::invalid_argument("combined_reward: multiplier must be positive");
  }
  return reward + multiplier * safety;
}

CriterionReport check_recovery_criterion(std::span<const StepOutcome> trajectory, double t_pf,
                                         const RecoveryEnvelope& envelope) {
  const double required = t_pf + envelope.thresholds.back().offset;
  if (trajectory.empty() || trajectory.back().t < required) {
    throw std::invalid_argument("check_recovery_criterion: insufficient horizon");
  }
  for (const auto& sample : trajectory) {
    if (!(sample.t > t_pf)) {
      continue;
    }
    const double bound = envelope.lower_bound_at(sample.t - t_pf);
    for (std::size_t i = 0; i < sample.voltages.size(); ++i) {
      const double v = sample.voltages[i];
      if (v < bound || v > envelope.upper_bound) {
        return {false, sample.t, static_cast<int>(i)};
      }
    }
  }
  return {true, 0.0, -1};
}

}  // namespace safeshed
