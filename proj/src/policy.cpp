#include "safeshed/policy.hpp"

#include <cmath>
#include <stdexcept>

#include "safeshed/rng.hpp"

namespace safeshed {

void PolicyParams::validate() const {
  if (weights.rows <= 0 || weights.cols <= 0) {
    throw std::invalid_argument("policy: empty weight matrix");
  }
  for (double w : weights.data) {
    if (!std::isfinite(w)) {
      throw std::invalid_argument("policy: non-finite weight");
    }
  }
  if (!(action_low < action_high)) {
    throw std::invalid_argument("policy: action_low must be below action_high");
  }
}

void RunningStats::update(std::span<const double> obs) {
  if (static_cast<int>(obs.size()) != dim()) {
    throw std::invalid_argument("running stats: dimension mismatch");
  }
  for (double x : obs) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument("running stats: non-finite observation");
    }
  }
  ++count;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const double delta = obs[i] - mean[i];
    mean[i] += delta / static_cast<double>(count);
    m2[i] += delta * (obs[i] - mean[i]);
  }
}

void RunningStats::merge(const RunningStats& other) {
  if (other.dim() != dim()) {
    throw std::invalid_argument("running stats: merge dimension mismatch");
  }
  if (other.count == 0) {
    return;
  }
  if (count == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(count);
  const double nb = static_cast<double>(other.count);
  const double n = na + nb;
  for (std::size_t i = 0; i < mean.size(); ++i) {
    const double delta = other.mean[i] - mean[i];
    mean[i] += delta * (nb / n);
    m2[i] += other.m2[i] + delta * delta * (na * nb / n);
  }
  count += other.count;
}

std::vector<double> RunningStats::std_dev() const {
  std::vector<double> out(mean.size(), 0.0);
  if (count > 0) {
    for (std::size_t i = 0; i < m2.size(); ++i) {
      out[i] = std::sqrt(m2[i] / static_cast<double>(count));
    }
  }
  return out;
}

std::vector<double> RunningStats::normalize(std::span<const double> obs) const {
  if (static_cast<int>(obs.size()) != dim()) {
    throw std::invalid_argument("running stats: normalize dimension mismatch");
  }
  std::vector<double> out(obs.begin(), obs.end());
  if (count == 0) {
    return out;
  }
  const std::vector<double> sd = std_dev();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double denom = sd[i] < 1e-8 ? 1.0 : sd[i];
    out[i] = (obs[i] - mean[i]) / denom;
  }
  return out;
}

std::vector<double> act(const PolicyParams& params, std::span<const double> normalized_obs) {
  if (static_cast<int>(normalized_obs.size()) != params.obs_dim()) {
    throw std::invalid_argument("act: observation dimension mismatch");
  }
  std::vector<double> action(static_cast<std::size_t>(params.action_dim()), 0.0);
  const double half_span = 0.5 * (params.action_high - params.action_low);
  for (int r = 0; r < params.action_dim(); ++r) {
    double raw = 0.0;
    for (int c = 0; c < params.obs_dim(); ++c) {
      raw += params.weights(r, c) * normalized_obs[static_cast<std::size_t>(c)];
    }
    action[static_cast<std::size_t>(r)] = params.action_low + half_span * (std::tanh(raw) + 1.0);
  }
  return action;
}

PolicyParams perturb(const PolicyParams& params, const Matrix& delta, double scale, int sign) {
  if (!(scale > 0.0)) {
    throw std::invalid_argument("perturb: scale must be positive");
  }
  if (!params.weights.same_shape(delta)) {
    throw std::invalid_argument("perturb: shape mismatch");
  }
  if (sign != 1 && sign != -1) {
    throw std::invalid_argument("perturb: sign must be +1 or -1");
  }
  PolicyParams out = params;
  const double s = scale * sign;
  for (std::size_t i = 0; i < out.weights.data.size(); ++i) {
    out.weights.data[i] += s * delta.data[i];
  }
  return out;
}

PolicyParams init_policy(int action_dim, int obs_dim, double action_low, double action_high,
                         std::uint64_t seed) {
  PolicyParams params;
  params.weights = Matrix(action_dim, obs_dim);
  params.action_low = action_low;
  params.action_high = action_high;
  rng::NormalSampler sampler(rng::derive(seed, {rng::kPolicyInit}));
  for (double& w : params.weights.data) {
    w = 0.01 * sampler.next();
  }
  params.validate();
  return params;
}

}  // namespace safeshed
