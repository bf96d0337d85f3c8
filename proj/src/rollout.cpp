#include "safeshed/rollout.hpp"

#include <atomic>
#include <filesystem>
#include <limits>
#include <stdexcept>
#include <thread>

#include "safeshed/io.hpp"

namespace safeshed {

double RolloutResult::min_safety() const {
  double m = std::numeric_limits<double>::infinity();
  for (double f : safety_trace) {
    m = std::min(m, f);
  }
  return m;
}

double RolloutResult::mean_safety() const {
  if (safety_trace.empty()) {
    return 0.0;
  }
  double sum = 0.0;
  for (double f : safety_trace) {
    sum += f;
  }
  return sum / static_cast<double>(safety_trace.size());
}

EpisodeResult run_episode(Environment& env, const PolicyParams& policy,
                          const RunningStats& frozen_stats, double multiplier,
                          const EpisodeOptions& options) {
  if (policy.obs_dim() != env.observation_dim() || policy.action_dim() != env.action_dim()) {
    throw std::invalid_argument("run_episode: policy/environment dimension mismatch");
  }
  EpisodeResult result;
  result.stats_delta = RunningStats(env.observation_dim());

  std::vector<double> obs = env.reset();
  bool done = false;
  while (!done) {
    const std::vector<double> normalized = frozen_stats.normalize(obs);
    const std::vector<double> action = act(policy, normalized);
    EnvStep step = env.step(action);

    result.plain_reward += step.reward;
    for (double f : step.safety_samples) {
      result.safety_trace.push_back(f);
    }
    if (options.collect_stats) {
      result.stats_delta.update(step.observation);
    }
    if (options.record_trajectory) {
      TrajectoryRow row;
      row.t = step.time;
      row.observation = step.observation;
      row.action = action;
      row.reward = step.reward;
      if (!step.safety_samples.empty()) {
        row.safety = step.safety_samples.back();
      }
      result.rows.push_back(std::move(row));
    }
    result.blackout = result.blackout || step.blackout;
    obs = std::move(step.observation);
    done = step.done;
  }

  double safety_sum = 0.0;
  for (double f : result.safety_trace) {
    safety_sum += f;
    if (f < 0.0) {
      result.violation = true;
    }
  }
  result.combined_reward = result.plain_reward + multiplier * safety_sum;
  return result;
}

RolloutResult run_rollout(const RolloutSpec& spec, const EnvironmentFactory& factory,
                          const EpisodeOptions& options) {
  RolloutResult result;
  result.iteration = spec.iteration;
  result.direction = spec.direction;
  result.side = spec.side;
  result.rollout = spec.rollout;
  result.task_index = spec.task_index;
  try {
    std::unique_ptr<Environment> env = factory.make(spec.task_index);
    EpisodeResult episode = run_episode(*env, spec.policy, spec.stats, spec.multiplier, options);
    result.combined_reward = episode.combined_reward;
    result.plain_reward = episode.plain_reward;
    result.safety_trace = std::move(episode.safety_trace);
    result.violation = episode.violation;
    result.blackout = episode.blackout;
    result.stats_delta = std::move(episode.stats_delta);
    if (options.record_trajectory && !options.trajectory_dir.empty()) {
      const std::string path = options.trajectory_dir + "/iter" + std::to_string(spec.iteration) +
                               "_dir" + std::to_string(spec.direction) +
                               (spec.side > 0 ? "_plus" : "_minus") + "_r" +
                               std::to_string(spec.rollout) + ".csv";
      write_trajectory_csv(path, env->observation_labels(), env->action_labels(), episode.rows);
      result.trajectory_path = path;
    }
  } catch (const std::exception& e) {
    result.failed = true;
    result.error = e.what();
  }
  return result;
}

RolloutEngine::RolloutEngine(const EnvironmentFactory& factory, int parallelism,
                             std::optional<std::string> trajectory_dir)
    : factory_(factory), parallelism_(parallelism), trajectory_dir_(std::move(trajectory_dir)) {
  if (parallelism_ < 1) {
    throw std::invalid_argument("rollout engine: parallelism must be >= 1");
  }
  if (trajectory_dir_) {
    std::filesystem::create_directories(*trajectory_dir_);
  }
}

std::vector<RolloutResult> RolloutEngine::execute_batch(const std::vector<RolloutSpec>& specs) {
  std::vector<RolloutResult> results(specs.size());
  if (specs.empty()) {
    return results;
  }
  EpisodeOptions options;
  if (trajectory_dir_) {
    options.record_trajectory = true;
    options.trajectory_dir = *trajectory_dir_;
  }

  std::atomic<std::size_t> next{0};
  const int workers = std::min<int>(parallelism_, static_cast<int>(specs.size()));
  auto work = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= specs.size()) {
        return;
      }
      results[i] = run_rollout(specs[i], factory_, options);
    }
  };

  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back(work);
    }
    for (auto& t : pool) {
      t.join();
    }
  }
  return results;
}

}  // namespace safeshed
