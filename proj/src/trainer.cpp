#include "safeshed/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "safeshed/rng.hpp"

namespace safeshed {

void TrainerConfig::validate() const {
  if (num_directions < 1 || top_directions < 1 || top_directions > num_directions) {
    throw std::invalid_argument("trainer config: need 1 <= top_directions <= num_directions");
  }
  if (rollouts_per_direction < 1) {
    throw std::invalid_argument("trainer config: rollouts_per_direction must be >= 1");
  }
  if (!(decay_rate > 0.0) || decay_rate > 1.0) {
    throw std::invalid_argument("trainer config: decay_rate must be in (0, 1]");
  }
  if (!(step_size > 0.0) || !(noise_std > 0.0) || !(multiplier_init > 0.0)) {
    throw std::invalid_argument("trainer config: step_size, noise_std, multiplier_init > 0");
  }
  if (iterations < 0) {
    throw std::invalid_argument("trainer config: iterations must be >= 0");
  }
  if (!(multiplier_min > 0.0) || multiplier_max < multiplier_min) {
    throw std::invalid_argument("trainer config: bad multiplier clamps");
  }
  if (strategy == MultiplierStrategy::kDualGradient && !(dual_step > 0.0)) {
    throw std::invalid_argument("trainer config: dual_step must be positive");
  }
  if (checkpoint_interval < 1) {
    throw std::invalid_argument("trainer config: checkpoint_interval must be >= 1");
  }
}

TopDirections select_top_directions(std::span<const DirectionResult> results, int count) {
  if (results.empty()) {
    throw std::invalid_argument("select_top_directions: no results");
  }
  if (count < 1 || count > static_cast<int>(results.size())) {
    throw std::invalid_argument("select_top_directions: bad count");
  }
  std::vector<int> order(results.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double ka = std::max(results[a].mean_reward_plus, results[a].mean_reward_minus);
    const double kb = std::max(results[b].mean_reward_plus, results[b].mean_reward_minus);
    if (ka != kb) {
      return ka > kb;
    }
    return results[a].index < results[b].index;
  });
  order.resize(static_cast<std::size_t>(count));
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return results[a].index < results[b].index; });

  double sum = 0.0;
  for (int i : order) {
    sum += results[i].mean_reward_plus + results[i].mean_reward_minus;
  }
  const double n = 2.0 * count;
  const double mean = sum / n;
  double sq = 0.0;
  for (int i : order) {
    const double dp = results[i].mean_reward_plus - mean;
    const double dm = results[i].mean_reward_minus - mean;
    sq += dp * dp + dm * dm;
  }
  double std_dev = std::sqrt(sq / n);
  if (std_dev < 1e-8) {
    std_dev = 1.0;
  }

  TopDirections top;
  top.indices.assign(order.begin(), order.end());
  top.reward_std = std_dev;
  return top;
}

Matrix update_weights(const Matrix& weights, std::span<const DirectionResult> results,
                      std::span<const Matrix> deltas, const TopDirections& top,
                      double step_size) {
  if (!(top.reward_std > 0.0)) {
    throw std::invalid_argument("update_weights: reward_std must be positive");
  }
  const double scale =
      step_size / (static_cast<double>(top.indices.size()) * top.reward_std);
  Matrix out = weights;
  for (int i : top.indices) {
    const DirectionResult& r = results[i];
    if (!std::isfinite(r.mean_reward_plus) || !std::isfinite(r.mean_reward_minus)) {
      throw std::invalid_argument("update_weights: non-finite direction reward");
    }
    const Matrix& delta = deltas[i];
    if (!out.same_shape(delta)) {
      throw std::invalid_argument("update_weights: delta shape mismatch");
    }
    const double coeff = scale * (r.mean_reward_plus - r.mean_reward_minus);
    for (std::size_t k = 0; k < out.data.size(); ++k) {
      out.data[k] += coeff * delta.data[k];
    }
  }
  return out;
}

std::pair<double, double> decay_schedule(double step_size, double noise_std, double rate) {
  if (!(rate > 0.0) || rate > 1.0) {
    throw std::invalid_argument("decay_schedule: rate must be in (0, 1]");
  }
  return {rate * step_size, rate * noise_std};
}

double update_multiplier_heuristic(double multiplier, bool any_violation, double floor,
                                   double ceiling) {
  if (!(multiplier > 0.0)) {
    throw std::invalid_argument("update_multiplier_heuristic: multiplier must be positive");
  }
  const double next = any_violation ? 2.0 * multiplier : multiplier / 2.0;
  return std::clamp(next, floor, ceiling);
}

double update_multiplier_dual(double multiplier, double mean_safety, double step, double floor) {
  if (!(multiplier > 0.0) || !(step > 0.0)) {
    throw std::invalid_argument("update_multiplier_dual: multiplier and step must be positive");
  }
  return std::max(floor, multiplier - step * mean_safety);
}

Matrix GaussianDirectionSampler::sample(std::uint64_t master_seed, int iteration, int direction,
                                        int rows, int cols) {
  Matrix delta(rows, cols);
  rng::NormalSampler sampler(rng::derive(
      master_seed, {rng::kDirection, static_cast<std::uint64_t>(iteration),
                    static_cast<std::uint64_t>(direction)}));
  for (double& v : delta.data) {
    v = sampler.next();
  }
  return delta;
}

Trainer::Trainer(TrainerConfig config, const EnvironmentFactory& factory, RolloutBackend& backend,
                 std::unique_ptr<DirectionSampler> sampler)
    : config_(config),
      factory_(factory),
      backend_(backend),
      sampler_(sampler ? std::move(sampler) : std::make_unique<GaussianDirectionSampler>()) {
  config_.validate();
}

TrainerState Trainer::init_state() const {
  std::unique_ptr<Environment> probe = factory_.make(0);
  TrainerState state;
  state.iteration = 0;
  state.policy = init_policy(probe->action_dim(), probe->observation_dim(), probe->action_low(),
                             probe->action_high(), config_.seed);
  state.stats = RunningStats(probe->observation_dim());
  state.multiplier = config_.strategy == MultiplierStrategy::kNone ? 0.0 : config_.multiplier_init;
  state.step_size = config_.step_size;
  state.noise_std = config_.noise_std;
  state.master_seed = config_.seed;
  state.rng_cursor = 0;
  return state;
}

std::vector<int> Trainer::iteration_task_order(std::uint64_t master_seed, int iteration,
                                               int num_tasks) {
  std::vector<int> order(static_cast<std::size_t>(num_tasks));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 gen(
      rng::derive(master_seed, {rng::kTaskShuffle, static_cast<std::uint64_t>(iteration)}));
  // Fisher-Yates with explicit modulo draws; std::shuffle is not pinned
  // across standard library versions.
  for (std::size_t i = order.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(gen() % i);
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

std::uint64_t Trainer::rollout_seed(std::uint64_t master_seed, int iteration, int direction,
                                    int side, int rollout) {
  return rng::derive(master_seed,
                     {rng::kRollout, static_cast<std::uint64_t>(iteration),
                      static_cast<std::uint64_t>(direction), side > 0 ? 1ULL : 0ULL,
                      static_cast<std::uint64_t>(rollout)});
}

TrainOutcome Trainer::train(TrainerState state, int stop_after,
                            const IterationCallback& callback) const {
  const int last_iteration =
      stop_after < 0 ? config_.iterations
                     : std::min(config_.iterations, state.iteration + stop_after);
  TrainOutcome outcome;

  const int n = config_.num_directions;
  const int m = config_.rollouts_per_direction;

  for (int iter = state.iteration; iter < last_iteration; ++iter) {
    const auto start_time = std::chrono::steady_clock::now();

    std::vector<Matrix> deltas;
    deltas.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      deltas.push_back(sampler_->sample(state.master_seed, iter, i, state.policy.weights.rows,
                                        state.policy.weights.cols));
    }

    const std::vector<int> task_order =
        iteration_task_order(state.master_seed, iter, factory_.num_tasks());

    std::vector<RolloutSpec> specs;
    specs.reserve(static_cast<std::size_t>(2 * n * m));
    for (int i = 0; i < n; ++i) {
      for (int side : {+1, -1}) {
        for (int k = 0; k < m; ++k) {
          RolloutSpec spec;
          spec.iteration = iter;
          spec.direction = i;
          spec.side = side;
          spec.rollout = k;
          spec.task_index = task_order[static_cast<std::size_t>(k) % task_order.size()];
          spec.policy = perturb(state.policy, deltas[static_cast<std::size_t>(i)],
                                state.noise_std, side);
          spec.stats = state.stats;
          spec.multiplier = state.multiplier;
          spec.seed = rollout_seed(state.master_seed, iter, i, side, k);
          specs.push_back(std::move(spec));
        }
      }
    }

    const std::vector<RolloutResult> results = backend_.execute_batch(specs);
    if (results.size() != specs.size()) {
      throw std::runtime_error("trainer: backend returned wrong result count");
    }
    for (const RolloutResult& r : results) {
      if (r.failed) {
        throw std::runtime_error(
            "rollout failed (iteration " + std::to_string(r.iteration) + ", direction " +
            std::to_string(r.direction) + ", side " + (r.side > 0 ? "+" : "-") + ", rollout " +
            std::to_string(r.rollout) + "): " + r.error);
      }
    }

    // Results arrive keyed by spec position: direction-major, then side
    // (+ before -), then rollout index.
    std::vector<DirectionResult> directions(static_cast<std::size_t>(n));
    bool any_violation = false;
    int violation_count = 0;
    double plain_sum = 0.0;
    double safety_mean_sum = 0.0;
    for (int i = 0; i < n; ++i) {
      DirectionResult& dir = directions[static_cast<std::size_t>(i)];
      dir.index = i;
      for (int side_idx = 0; side_idx < 2; ++side_idx) {
        double sum = 0.0;
        for (int k = 0; k < m; ++k) {
          const std::size_t pos =
              static_cast<std::size_t>((i * 2 + side_idx) * m + k);
          const RolloutResult& r = results[pos];
          sum += r.combined_reward;
          dir.violations.push_back(r.violation);
          dir.mean_safety.push_back(r.mean_safety());
          any_violation = any_violation || r.violation;
          violation_count += r.violation ? 1 : 0;
          plain_sum += r.plain_reward;
          safety_mean_sum += r.mean_safety();
        }
        const double mean = sum / static_cast<double>(m);
        if (side_idx == 0) {
          dir.mean_reward_plus = mean;
        } else {
          dir.mean_reward_minus = mean;
        }
      }
    }

    const TopDirections top = select_top_directions(directions, config_.top_directions);
    state.policy.weights =
        update_weights(state.policy.weights, directions, deltas, top, state.step_size);

    for (const RolloutResult& r : results) {
      state.stats.merge(r.stats_delta);
    }

    const auto [next_alpha, next_nu] =
        decay_schedule(state.step_size, state.noise_std, config_.decay_rate);
    state.step_size = next_alpha;
    state.noise_std = next_nu;

    switch (config_.strategy) {
      case MultiplierStrategy::kHeuristic:
        state.multiplier = update_multiplier_heuristic(
            state.multiplier, any_violation, config_.multiplier_min, config_.multiplier_max);
        break;
      case MultiplierStrategy::kDualGradient: {
        const double mean_safety = safety_mean_sum / static_cast<double>(results.size());
        state.multiplier = update_multiplier_dual(state.multiplier, mean_safety,
                                                  config_.dual_step, config_.multiplier_min);
        break;
      }
      case MultiplierStrategy::kNone:
        break;
    }

    state.iteration = iter + 1;
    state.rng_cursor = static_cast<std::uint64_t>(state.iteration);

    IterationRecord record;
    record.iteration = state.iteration;
    record.multiplier = state.multiplier;
    record.step_size = state.step_size;
    record.noise_std = state.noise_std;
    double best = -std::numeric_limits<double>::infinity();
    double mean_sum = 0.0;
    for (const DirectionResult& dir : directions) {
      best = std::max({best, dir.mean_reward_plus, dir.mean_reward_minus});
      mean_sum += dir.mean_reward_plus + dir.mean_reward_minus;
    }
    record.best_combined = best;
    record.mean_combined = mean_sum / static_cast<double>(2 * n);
    record.mean_plain = plain_sum / static_cast<double>(results.size());
    record.violation_count = violation_count;
    record.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();

    outcome.records.push_back(record);
    if (callback) {
      callback(state, record);
    }
  }

  outcome.state = std::move(state);
  return outcome;
}

std::vector<EvaluationEpisode> evaluate_policy(const EnvironmentFactory& factory,
                                               std::span<const int> task_indices,
                                               const PolicyParams& policy,
                                               const RunningStats& stats) {
  std::vector<EvaluationEpisode> episodes;
  episodes.reserve(task_indices.size());
  EpisodeOptions options;
  options.collect_stats = false;
  for (int task : task_indices) {
    std::unique_ptr<Environment> env = factory.make(task);
    const EpisodeResult result = run_episode(*env, policy, stats, 0.0, options);
    EvaluationEpisode ep;
    ep.task_index = task;
    ep.plain_reward = result.plain_reward;
    ep.violation = result.violation;
    ep.blackout = result.blackout;
    episodes.push_back(ep);
  }
  return episodes;
}

}  // namespace safeshed
