#include "safeshed/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <stdexcept>

namespace safeshed {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw std::invalid_argument("config: " + where + ": " + what);
}

void reject_unknown_keys(const json& j, const std::string& where,
                         const std::set<std::string>& allowed) {
  if (!j.is_object()) {
    fail(where, "expected an object");
  }
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) {
      fail(where, "unknown key '" + key + "'");
    }
  }
}

template <typename T>
void read_field(const json& j, const std::string& where, const std::string& key, T& out) {
  if (!j.contains(key)) {
    return;  // missing keys keep their defaults
  }
  try {
    j.at(key).get_to(out);
  } catch (const json::exception& e) {
    fail(where + "." + key, e.what());
  }
}

std::string strategy_name(MultiplierStrategy s) {
  switch (s) {
    case MultiplierStrategy::kHeuristic:
      return "heuristic";
    case MultiplierStrategy::kDualGradient:
      return "dual-gradient";
    case MultiplierStrategy::kNone:
      return "none";
  }
  throw std::logic_error("unreachable");
}

MultiplierStrategy strategy_from_name(const std::string& name) {
  if (name == "heuristic") {
    return MultiplierStrategy::kHeuristic;
  }
  if (name == "dual-gradient") {
    return MultiplierStrategy::kDualGradient;
  }
  if (name == "none") {
    return MultiplierStrategy::kNone;
  }
  fail("trainer.multiplier_strategy", "must be heuristic, dual-gradient or none, got '" + name +
                                          "'");
}

json trainer_to_json(const TrainerConfig& t) {
  return json{{"step_size", t.step_size},
              {"num_directions", t.num_directions},
              {"noise_std", t.noise_std},
              {"top_directions", t.top_directions},
              {"rollouts_per_direction", t.rollouts_per_direction},
              {"decay_rate", t.decay_rate},
              {"iterations", t.iterations},
              {"multiplier_init", t.multiplier_init},
              {"multiplier_strategy", strategy_name(t.strategy)},
              {"dual_step", t.dual_step},
              {"multiplier_min", t.multiplier_min},
              {"multiplier_max", t.multiplier_max},
              {"discount", t.discount},
              {"seed", t.seed},
              {"checkpoint_interval", t.checkpoint_interval}};
}

TrainerConfig trainer_from_json(const json& j) {
  reject_unknown_keys(j, "trainer",
                      {"step_size", "num_directions", "noise_std", "top_directions",
                       "rollouts_per_direction", "decay_rate", "iterations", "multiplier_init",
                       "multiplier_strategy", "dual_step", "multiplier_min", "multiplier_max",
                       "discount", "seed", "checkpoint_interval"});
  TrainerConfig t;
  read_field(j, "trainer", "step_size", t.step_size);
  read_field(j, "trainer", "num_directions", t.num_directions);
  read_field(j, "trainer", "noise_std", t.noise_std);
  read_field(j, "trainer", "top_directions", t.top_directions);
  read_field(j, "trainer", "rollouts_per_direction", t.rollouts_per_direction);
  read_field(j, "trainer", "decay_rate", t.decay_rate);
  read_field(j, "trainer", "iterations", t.iterations);
  read_field(j, "trainer", "multiplier_init", t.multiplier_init);
  if (j.contains("multiplier_strategy")) {
    t.strategy = strategy_from_name(j.at("multiplier_strategy").get<std::string>());
  }
  read_field(j, "trainer", "dual_step", t.dual_step);
  read_field(j, "trainer", "multiplier_min", t.multiplier_min);
  read_field(j, "trainer", "multiplier_max", t.multiplier_max);
  read_field(j, "trainer", "discount", t.discount);
  read_field(j, "trainer", "seed", t.seed);
  read_field(j, "trainer", "checkpoint_interval", t.checkpoint_interval);
  return t;
}

json reward_to_json(const RewardWeights& w) {
  return json{{"voltage_weight", w.voltage_weight},
              {"shed_weight", w.shed_weight},
              {"invalid_weight", w.invalid_weight},
              {"blackout_penalty", w.blackout_penalty},
              {"blackout_deadline", w.blackout_deadline}};
}

RewardWeights reward_from_json(const json& j) {
  reject_unknown_keys(j, "reward",
                      {"voltage_weight", "shed_weight", "invalid_weight", "blackout_penalty",
                       "blackout_deadline"});
  RewardWeights w;
  read_field(j, "reward", "voltage_weight", w.voltage_weight);
  read_field(j, "reward", "shed_weight", w.shed_weight);
  read_field(j, "reward", "invalid_weight", w.invalid_weight);
  read_field(j, "reward", "blackout_penalty", w.blackout_penalty);
  read_field(j, "reward", "blackout_deadline", w.blackout_deadline);
  return w;
}

json safety_to_json(const SafetyWindowSpec& spec) {
  json arr = json::array();
  for (const auto& w : spec.windows) {
    json entry{{"start", w.start}, {"radius", w.radius}, {"center", w.center}};
    if (std::isinf(w.end)) {
      entry["end"] = nullptr;
    } else {
      entry["end"] = w.end;
    }
    arr.push_back(entry);
  }
  return arr;
}

SafetyWindowSpec safety_from_json(const json& arr) {
  if (!arr.is_array()) {
    fail("safety_windows", "expected an array");
  }
  SafetyWindowSpec spec;
  int index = 0;
  for (const auto& entry : arr) {
    const std::string where = "safety_windows[" + std::to_string(index++) + "]";
    reject_unknown_keys(entry, where, {"start", "end", "radius", "center"});
    SafetyWindow w;
    read_field(entry, where, "start", w.start);
    if (entry.contains("end") && !entry.at("end").is_null()) {
      read_field(entry, where, "end", w.end);
    } else {
      w.end = std::numeric_limits<double>::infinity();
    }
    read_field(entry, where, "radius", w.radius);
    read_field(entry, where, "center", w.center);
    spec.windows.push_back(w);
  }
  return spec;
}

json surrogate_to_json(const SurrogateParams& p) {
  json prox = json::object();
  for (const auto& [bus, row] : p.proximity) {
    prox[std::to_string(bus)] = row;
  }
  return json{{"proximity", prox},
              {"coupling", p.coupling},
              {"depression_gain", p.depression_gain},
              {"stall_gain", p.stall_gain},
              {"base_time_constant", p.base_time_constant},
              {"load_floor", p.load_floor},
              {"sim_step", p.sim_step},
              {"action_interval", p.action_interval},
              {"episode_length", p.episode_length},
              {"substep_safety", p.substep_safety}};
}

SurrogateParams surrogate_from_json(const json& j) {
  reject_unknown_keys(j, "environment.surrogate",
                      {"proximity", "coupling", "depression_gain", "stall_gain",
                       "base_time_constant", "load_floor", "sim_step", "action_interval",
                       "episode_length", "substep_safety"});
  SurrogateParams p = SurrogateParams::defaults();
  if (j.contains("proximity")) {
    const json& prox = j.at("proximity");
    if (!prox.is_object()) {
      fail("environment.surrogate.proximity", "expected an object keyed by bus id");
    }
    p.proximity.clear();
    for (const auto& [key, row] : prox.items()) {
      int bus = 0;
      try {
        bus = std::stoi(key);
      } catch (...) {
        fail("environment.surrogate.proximity", "bad bus id '" + key + "'");
      }
      p.proximity[bus] = row.get<std::array<double, 4>>();
    }
  }
  read_field(j, "environment.surrogate", "coupling", p.coupling);
  read_field(j, "environment.surrogate", "depression_gain", p.depression_gain);
  read_field(j, "environment.surrogate", "stall_gain", p.stall_gain);
  read_field(j, "environment.surrogate", "base_time_constant", p.base_time_constant);
  read_field(j, "environment.surrogate", "load_floor", p.load_floor);
  read_field(j, "environment.surrogate", "sim_step", p.sim_step);
  read_field(j, "environment.surrogate", "action_interval", p.action_interval);
  read_field(j, "environment.surrogate", "episode_length", p.episode_length);
  read_field(j, "environment.surrogate", "substep_safety", p.substep_safety);
  return p;
}

json tasks_to_json(const TaskSet& tasks) {
  json arr = json::array();
  for (const auto& s : tasks.scenarios) {
    arr.push_back({{"fault_bus", s.fault_bus},
                   {"fault_start", s.fault_start},
                   {"duration", s.duration}});
  }
  return arr;
}

TaskSet tasks_from_json(const json& arr) {
  if (!arr.is_array()) {
    fail("environment.tasks", "expected an array");
  }
  TaskSet tasks;
  int index = 0;
  for (const auto& entry : arr) {
    const std::string where = "environment.tasks[" + std::to_string(index++) + "]";
    reject_unknown_keys(entry, where, {"fault_bus", "fault_start", "duration"});
    FaultScenario s;
    read_field(entry, where, "fault_bus", s.fault_bus);
    read_field(entry, where, "fault_start", s.fault_start);
    read_field(entry, where, "duration", s.duration);
    tasks.scenarios.push_back(s);
  }
  return tasks;
}

json toy_to_json(const ToyParams& p) {
  return json{{"start", p.start},
              {"goal", p.goal},
              {"hazard_center", p.hazard_center},
              {"hazard_radius", p.hazard_radius},
              {"dt", p.dt},
              {"episode_steps", p.episode_steps},
              {"task_ring_radius", p.task_ring_radius},
              {"num_train_tasks", p.num_train_tasks},
              {"num_eval_tasks", p.num_eval_tasks}};
}

ToyParams toy_from_json(const json& j) {
  reject_unknown_keys(j, "environment.toy",
                      {"start", "goal", "hazard_center", "hazard_radius", "dt", "episode_steps",
                       "task_ring_radius", "num_train_tasks", "num_eval_tasks"});
  ToyParams p;
  read_field(j, "environment.toy", "start", p.start);
  read_field(j, "environment.toy", "goal", p.goal);
  read_field(j, "environment.toy", "hazard_center", p.hazard_center);
  read_field(j, "environment.toy", "hazard_radius", p.hazard_radius);
  read_field(j, "environment.toy", "dt", p.dt);
  read_field(j, "environment.toy", "episode_steps", p.episode_steps);
  read_field(j, "environment.toy", "task_ring_radius", p.task_ring_radius);
  read_field(j, "environment.toy", "num_train_tasks", p.num_train_tasks);
  read_field(j, "environment.toy", "num_eval_tasks", p.num_eval_tasks);
  return p;
}

}  // namespace

RunConfig RunConfig::defaults() {
  return RunConfig{};
}

void RunConfig::validate() const {
  trainer.validate();
  reward.validate();
  safety.validate();
  if (env_kind == EnvKind::kGrid) {
    surrogate.validate();
    tasks.validate();
    for (const auto& scenario : tasks.scenarios) {
      if (!surrogate.proximity.contains(scenario.fault_bus)) {
        throw std::invalid_argument("config: task fault bus " +
                                    std::to_string(scenario.fault_bus) +
                                    " missing from surrogate proximity table");
      }
    }
  } else {
    toy.validate();
  }
  if (parallelism < 1) {
    throw std::invalid_argument("config: parallelism must be >= 1");
  }
  if (out_dir.empty() || metrics_file.empty()) {
    throw std::invalid_argument("config: output paths must be non-empty");
  }
}

nlohmann::json run_config_to_json(const RunConfig& config) {
  json environment{{"type", config.env_kind == EnvKind::kGrid ? "grid" : "toy"},
                   {"surrogate", surrogate_to_json(config.surrogate)},
                   {"tasks", tasks_to_json(config.tasks)},
                   {"toy", toy_to_json(config.toy)}};
  return json{{"trainer", trainer_to_json(config.trainer)},
              {"reward", reward_to_json(config.reward)},
              {"safety_windows", safety_to_json(config.safety)},
              {"environment", environment},
              {"execution",
               {{"parallelism", config.parallelism},
                {"dump_trajectories", config.dump_trajectories}}},
              {"output", {{"dir", config.out_dir}, {"metrics_file", config.metrics_file}}}};
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  reject_unknown_keys(j, "(root)",
                      {"trainer", "reward", "safety_windows", "environment", "execution",
                       "output"});
  RunConfig config;
  if (j.contains("trainer")) {
    config.trainer = trainer_from_json(j.at("trainer"));
  }
  if (j.contains("reward")) {
    config.reward = reward_from_json(j.at("reward"));
  }
  if (j.contains("safety_windows")) {
    config.safety = safety_from_json(j.at("safety_windows"));
  }
  if (j.contains("environment")) {
    const json& env = j.at("environment");
    reject_unknown_keys(env, "environment", {"type", "surrogate", "tasks", "toy"});
    if (env.contains("type")) {
      const std::string type = env.at("type").get<std::string>();
      if (type == "grid") {
        config.env_kind = EnvKind::kGrid;
      } else if (type == "toy") {
        config.env_kind = EnvKind::kToy;
      } else {
        fail("environment.type", "must be 'grid' or 'toy', got '" + type + "'");
      }
    }
    if (env.contains("surrogate")) {
      config.surrogate = surrogate_from_json(env.at("surrogate"));
    }
    if (env.contains("tasks")) {
      config.tasks = tasks_from_json(env.at("tasks"));
    }
    if (env.contains("toy")) {
      config.toy = toy_from_json(env.at("toy"));
    }
  }
  if (j.contains("execution")) {
    const json& exec = j.at("execution");
    reject_unknown_keys(exec, "execution", {"parallelism", "dump_trajectories"});
    read_field(exec, "execution", "parallelism", config.parallelism);
    read_field(exec, "execution", "dump_trajectories", config.dump_trajectories);
  }
  if (j.contains("output")) {
    const json& output = j.at("output");
    reject_unknown_keys(output, "output", {"dir", "metrics_file"});
    read_field(output, "output", "dir", config.out_dir);
    read_field(output, "output", "metrics_file", config.metrics_file);
  }
  config.validate();
  return config;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("config: cannot open " + path);
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument("config: parse error in " + path + ": " + e.what());
  }
  return run_config_from_json(j);
}

std::uint64_t config_hash(const RunConfig& config) {
  const std::string dump = run_config_to_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::unique_ptr<EnvironmentFactory> make_env_factory(const RunConfig& config) {
  if (config.env_kind == EnvKind::kGrid) {
    return std::make_unique<GridEnvFactory>(config.tasks, config.surrogate, config.reward,
                                            config.safety);
  }
  return std::make_unique<ToyEnvFactory>(config.toy);
}

}  // namespace safeshed
