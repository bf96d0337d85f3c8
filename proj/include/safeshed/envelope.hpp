#pragma once

#include <span>
#include <vector>

namespace safeshed {

// One post-fault time window of the safety corridor. A voltage V is safe in
// this window iff radius^2 - (V - center)^2 >= 0, i.e. V stays inside
// [center - radius, center + radius].
struct SafetyWindow {
  double start = 0.0;  // offset after fault clearing, exclusive
  double end = 0.0;    // offset after fault clearing, inclusive; +inf for last
  double radius = 0.0;
  double center = 0.0;

  double lower() const { return center - radius; }
  double upper() const { return center + radius; }
};

struct SafetyWindowSpec {
  std::vector<SafetyWindow> windows;

  static SafetyWindowSpec defaults();
  void validate() const;

  // Window containing offset tau (tau in (start, end]). tau must be > 0.
  const SafetyWindow& window_at(double tau) const;
};

// Time-dependent lower voltage bound the post-fault trajectory must respect,
// plus the fixed 1.5 p.u. ceiling.
struct RecoveryEnvelope {
  struct Threshold {
    double offset = 0.0;       // window start, seconds after fault clearing
    double lower_bound = 0.0;  // p.u.
  };
  std::vector<Threshold> thresholds;
  double upper_bound = 1.5;

  static RecoveryEnvelope defaults();
  static RecoveryEnvelope from_safety_windows(const SafetyWindowSpec& spec);
  void validate() const;

  // Lower bound active at offset tau > 0 after fault clearing.
  double lower_bound_at(double tau) const;
};

struct RewardWeights {
  double voltage_weight = 1.0;  // weight on the voltage-deviation sum
  double shed_weight = 0.5;     // weight on the total shed amount
  double invalid_weight = 1.0;  // weight on the invalid-action count
  double blackout_penalty = -1000.0;
  double blackout_deadline = 4.0;  // seconds after fault clearing

  void validate() const;
};

// What the environment reports after one action step.
struct StepOutcome {
  double t = 0.0;                    // simulation time of the sample
  std::vector<double> voltages;      // monitored bus voltages, p.u.
  std::vector<double> shed_amounts;  // per load bus, p.u. shed this step
  int invalid_count = 0;             // shed requests against already-empty buses
  bool action_clipped = false;       // diagnostics: action arrived outside the box
};

struct RewardResult {
  double reward = 0.0;
  bool blackout = false;
};

struct CriterionReport {
  bool pass = true;
  double first_violation_time = 0.0;  // simulation time; meaningful when !pass
  int violating_bus = -1;             // index into the monitored-bus ordering
};

// Safety value at time t > t_pf: radius^2 minus the worst squared deviation
// of any monitored voltage from the window center. Nonnegative iff every
// voltage lies inside the window corridor.
double safety_value(std::span<const double> voltages, double t, double t_pf,
                    const SafetyWindowSpec& spec);

// Per-bus voltage deficit min(V - bound, 0) for the window containing t.
double delta_v(double voltage, double t, double t_pf, const RecoveryEnvelope& envelope);

// Eq-style step reward: blackout branch when any voltage is still below
// 0.95 p.u. past the deadline, otherwise the weighted sum of voltage
// deficits, shed amounts and invalid actions. Deficits only accrue after
// fault clearing.
RewardResult step_reward(const StepOutcome& outcome, double t_pf, const RewardWeights& weights,
                         const RecoveryEnvelope& envelope);

// reward + multiplier * safety; multiplier must be > 0.
double combined_reward(double reward, double safety, double multiplier);

// Checks every post-fault sample of a trajectory against the envelope.
// The trajectory must extend at least 1.5 s past fault clearing.
CriterionReport check_recovery_criterion(std::span<const StepOutcome> trajectory, double t_pf,
                                         const RecoveryEnvelope& envelope);

}  // namespace safeshed
