#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace safeshed {

// Minimal dense row-major matrix. Policies here are a single small weight
// matrix; nothing heavier is warranted.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

  double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

  bool same_shape(const Matrix& other) const {
    return rows == other.rows && cols == other.cols;
  }
};

// Linear shed-control policy: action = squash(weights * normalized_obs),
// squashed into [action_low, action_high] per component via tanh.
struct PolicyParams {
  Matrix weights;  // action_dim x obs_dim
  double action_low = -0.2;
  double action_high = 0.0;

  int action_dim() const { return weights.rows; }
  int obs_dim() const { return weights.cols; }
  void validate() const;
};

// Online mean / population standard deviation of observations, Welford form.
// Mergeable so per-rollout deltas can be reduced deterministically.
struct RunningStats {
  std::int64_t count = 0;
  std::vector<double> mean;
  std::vector<double> m2;  // sum of squared deviations from the mean

  RunningStats() = default;
  explicit RunningStats(int dim)
      : mean(static_cast<std::size_t>(dim), 0.0), m2(static_cast<std::size_t>(dim), 0.0) {}

  int dim() const { return static_cast<int>(mean.size()); }

  void update(std::span<const double> obs);
  void merge(const RunningStats& other);

  // Population standard deviation per component; 0 while count == 0.
  std::vector<double> std_dev() const;

  // (obs - mean) / std. Fresh stats (count == 0) pass observations through
  // unchanged; components with std below 1e-8 divide by 1 instead.
  std::vector<double> normalize(std::span<const double> obs) const;
};

// One antithetic exploration direction.
struct Perturbation {
  Matrix delta;
  int index = 0;
};

// Squashed linear policy evaluation on an already-normalized observation.
std::vector<double> act(const PolicyParams& params, std::span<const double> normalized_obs);

// weights + sign * scale * delta, leaving the original untouched.
PolicyParams perturb(const PolicyParams& params, const Matrix& delta, double scale, int sign);

// Fresh policy with i.i.d. normal(0, 0.01^2) weights.
PolicyParams init_policy(int action_dim, int obs_dim, double action_low, double action_high,
                         std::uint64_t seed);

}  // namespace safeshed
