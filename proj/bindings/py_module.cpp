#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "safeshed/checkpoint.hpp"
#include "safeshed/config.hpp"
#include "safeshed/envelope.hpp"
#include "safeshed/grid_env.hpp"
#include "safeshed/policy.hpp"
#include "safeshed/rollout.hpp"
#include "safeshed/run.hpp"
#include "safeshed/toy_env.hpp"
#include "safeshed/trainer.hpp"

#define STRINGIFY(x) #x
#define MACRO_STRINGIFY(x) STRINGIFY(x)

namespace py = pybind11;
using namespace safeshed;

namespace {

RunConfig config_from_json_str(const std::string& text) {
  return run_config_from_json(nlohmann::json::parse(text));
}

std::string config_to_json_str(const RunConfig& config) {
  return run_config_to_json(config).dump(2);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Safety-constrained random-search load shedding toolkit";

  // --- envelope / reward ---------------------------------------------------
  py::class_<SafetyWindow>(m, "SafetyWindow")
      .def(py::init<>())
      .def_readwrite("start", &SafetyWindow::start)
      .def_readwrite("end", &SafetyWindow::end)
      .def_readwrite("radius", &SafetyWindow::radius)
      .def_readwrite("center", &SafetyWindow::center)
      .def("lower", &SafetyWindow::lower)
      .def("upper", &SafetyWindow::upper);

  py::class_<SafetyWindowSpec>(m, "SafetyWindowSpec")
      .def(py::init<>())
      .def_static("defaults", &SafetyWindowSpec::defaults)
      .def_readwrite("windows", &SafetyWindowSpec::windows);

  py::class_<RecoveryEnvelope>(m, "RecoveryEnvelope")
      .def(py::init<>())
      .def_static("defaults", &RecoveryEnvelope::defaults)
      .def_static("from_safety_windows", &RecoveryEnvelope::from_safety_windows)
      .def_readwrite("upper_bound", &RecoveryEnvelope::upper_bound)
      .def("lower_bound_at", &RecoveryEnvelope::lower_bound_at);

  py::class_<RewardWeights>(m, "RewardWeights")
      .def(py::init<>())
      .def_readwrite("voltage_weight", &RewardWeights::voltage_weight)
      .def_readwrite("shed_weight", &RewardWeights::shed_weight)
      .def_readwrite("invalid_weight", &RewardWeights::invalid_weight)
      .def_readwrite("blackout_penalty", &RewardWeights::blackout_penalty)
      .def_readwrite("blackout_deadline", &RewardWeights::blackout_deadline);

  py::class_<StepOutcome>(m, "StepOutcome")
      .def(py::init<>())
      .def_readwrite("t", &StepOutcome::t)
      .def_readwrite("voltages", &StepOutcome::voltages)
      .def_readwrite("shed_amounts", &StepOutcome::shed_amounts)
      .def_readwrite("invalid_count", &StepOutcome::invalid_count)
      .def_readwrite("action_clipped", &StepOutcome::action_clipped);

  py::class_<CriterionReport>(m, "CriterionReport")
      .def_readonly("pass_", &CriterionReport::pass)
      .def_readonly("first_violation_time", &CriterionReport::first_violation_time)
      .def_readonly("violating_bus", &CriterionReport::violating_bus);

  m.def(
      "safety_value",
      [](const std::vector<double>& voltages, double t, double t_pf,
         const SafetyWindowSpec& spec) { return safety_value(voltages, t, t_pf, spec); },
      py::arg("voltages"), py::arg("t"), py::arg("t_pf"),
      py::arg("spec") = SafetyWindowSpec::defaults());
  m.def(
      "delta_v",
      [](double voltage, double t, double t_pf, const RecoveryEnvelope& envelope) {
        return delta_v(voltage, t, t_pf, envelope);
      },
      py::arg("voltage"), py::arg("t"), py::arg("t_pf"),
      py::arg("envelope") = RecoveryEnvelope::defaults());
  m.def(
      "step_reward",
      [](const StepOutcome& outcome, double t_pf, const RewardWeights& weights,
         const RecoveryEnvelope& envelope) {
        const RewardResult r = step_reward(outcome, t_pf, weights, envelope);
        return py::make_tuple(r.reward, r.blackout);
      },
      py::arg("outcome"), py::arg("t_pf"), py::arg("weights") = RewardWeights{},
      py::arg("envelope") = RecoveryEnvelope::defaults());
  m.def("combined_reward", &combined_reward, py::arg("reward"), py::arg("safety"),
        py::arg("multiplier"));
  m.def(
      "check_recovery_criterion",
      [](const std::vector<StepOutcome>& trajectory, double t_pf,
         const RecoveryEnvelope& envelope) {
        return check_recovery_criterion(trajectory, t_pf, envelope);
      },
      py::arg("trajectory"), py::arg("t_pf"), py::arg("envelope") = RecoveryEnvelope::defaults());

  // --- policy ---------------------------------------------------------------
  py::class_<Matrix>(m, "Matrix")
      .def(py::init<int, int>())
      .def_readonly("rows", &Matrix::rows)
      .def_readonly("cols", &Matrix::cols)
      .def_readwrite("data", &Matrix::data);

  py::class_<PolicyParams>(m, "PolicyParams")
      .def(py::init<>())
      .def_readwrite("weights", &PolicyParams::weights)
      .def_readwrite("action_low", &PolicyParams::action_low)
      .def_readwrite("action_high", &PolicyParams::action_high);

  py::class_<RunningStats>(m, "RunningStats")
      .def(py::init<int>())
      .def_readwrite("count", &RunningStats::count)
      .def_readwrite("mean", &RunningStats::mean)
      .def_readwrite("m2", &RunningStats::m2)
      .def("update", [](RunningStats& s, const std::vector<double>& obs) { s.update(obs); })
      .def("merge", &RunningStats::merge)
      .def("std_dev", &RunningStats::std_dev)
      .def("normalize",
           [](const RunningStats& s, const std::vector<double>& obs) { return s.normalize(obs); });

  m.def(
      "act",
      [](const PolicyParams& params, const std::vector<double>& obs) { return act(params, obs); },
      py::arg("params"), py::arg("normalized_obs"));
  m.def("perturb", &perturb, py::arg("params"), py::arg("delta"), py::arg("scale"),
        py::arg("sign"));
  m.def("init_policy", &init_policy, py::arg("action_dim"), py::arg("obs_dim"),
        py::arg("action_low"), py::arg("action_high"), py::arg("seed"));

  // --- environments -----------------------------------------------------
  py::class_<FaultScenario>(m, "FaultScenario")
      .def(py::init<>())
      .def(py::init([](int bus, double start, double duration) {
             return FaultScenario{bus, start, duration};
           }),
           py::arg("fault_bus"), py::arg("fault_start") = 1.0, py::arg("duration") = 0.15)
      .def_readwrite("fault_bus", &FaultScenario::fault_bus)
      .def_readwrite("fault_start", &FaultScenario::fault_start)
      .def_readwrite("duration", &FaultScenario::duration)
      .def("clearing_time", &FaultScenario::clearing_time);

  py::class_<SurrogateParams>(m, "SurrogateParams")
      .def(py::init<>())
      .def_static("defaults", &SurrogateParams::defaults)
      .def_readwrite("depression_gain", &SurrogateParams::depression_gain)
      .def_readwrite("stall_gain", &SurrogateParams::stall_gain)
      .def_readwrite("base_time_constant", &SurrogateParams::base_time_constant)
      .def_readwrite("load_floor", &SurrogateParams::load_floor)
      .def_readwrite("sim_step", &SurrogateParams::sim_step)
      .def_readwrite("action_interval", &SurrogateParams::action_interval)
      .def_readwrite("episode_length", &SurrogateParams::episode_length);

  py::class_<EnvStep>(m, "EnvStep")
      .def_readonly("time", &EnvStep::time)
      .def_readonly("observation", &EnvStep::observation)
      .def_readonly("reward", &EnvStep::reward)
      .def_readonly("safety_samples", &EnvStep::safety_samples)
      .def_readonly("done", &EnvStep::done)
      .def_readonly("blackout", &EnvStep::blackout);

  py::class_<GridEnv>(m, "GridEnv")
      .def(py::init([](const FaultScenario& scenario, const SurrogateParams& params) {
             return GridEnv(scenario, params, RewardWeights{}, SafetyWindowSpec::defaults());
           }),
           py::arg("scenario"), py::arg("params") = SurrogateParams::defaults())
      .def("reset", &GridEnv::reset)
      .def("step",
           [](GridEnv& env, const std::vector<double>& action) { return env.step(action); })
      .def("observation_labels", &GridEnv::observation_labels)
      .def("action_labels", &GridEnv::action_labels)
      .def("trajectory", &GridEnv::trajectory);

  py::class_<ToyParams>(m, "ToyParams")
      .def(py::init<>())
      .def_readwrite("start", &ToyParams::start)
      .def_readwrite("goal", &ToyParams::goal)
      .def_readwrite("hazard_center", &ToyParams::hazard_center)
      .def_readwrite("hazard_radius", &ToyParams::hazard_radius)
      .def_readwrite("dt", &ToyParams::dt)
      .def_readwrite("episode_steps", &ToyParams::episode_steps);

  py::class_<ToyEnv>(m, "ToyEnv")
      .def(py::init<ToyParams, std::array<double, 2>>(), py::arg("params"), py::arg("start"))
      .def("reset", &ToyEnv::reset)
      .def("step",
           [](ToyEnv& env, const std::vector<double>& action) { return env.step(action); });

  // --- trainer ops -----------------------------------------------------
  py::class_<DirectionResult>(m, "DirectionResult")
      .def(py::init<>())
      .def_readwrite("index", &DirectionResult::index)
      .def_readwrite("mean_reward_plus", &DirectionResult::mean_reward_plus)
      .def_readwrite("mean_reward_minus", &DirectionResult::mean_reward_minus);

  py::class_<TopDirections>(m, "TopDirections")
      .def_readonly("indices", &TopDirections::indices)
      .def_readonly("reward_std", &TopDirections::reward_std);

  m.def(
      "select_top_directions",
      [](const std::vector<DirectionResult>& results, int count) {
        return select_top_directions(results, count);
      },
      py::arg("results"), py::arg("count"));
  m.def("decay_schedule", &decay_schedule, py::arg("step_size"), py::arg("noise_std"),
        py::arg("rate"));
  m.def("update_multiplier_heuristic", &update_multiplier_heuristic, py::arg("multiplier"),
        py::arg("any_violation"), py::arg("floor") = 1.0 / 64.0, py::arg("ceiling") = 1024.0);
  m.def("update_multiplier_dual", &update_multiplier_dual, py::arg("multiplier"),
        py::arg("mean_safety"), py::arg("step"), py::arg("floor") = 1.0 / 64.0);

  // --- whole runs --------------------------------------------------------
  m.def("default_config_json",
        [] { return run_config_to_json(RunConfig::defaults()).dump(2); });
  m.def(
      "train",
      [](const std::string& config_json, const std::string& out_dir) {
        RunConfig config = config_from_json_str(config_json);
        TrainRunOptions options;
        if (!out_dir.empty()) {
          options.out_dir_override = out_dir;
        }
        const TrainRunSummary summary = run_training(config, options);
        py::dict result;
        result["iterations_run"] = summary.iterations_run;
        result["final_iteration"] = summary.final_state.iteration;
        result["multiplier"] = summary.final_state.multiplier;
        result["checkpoint_path"] = summary.final_checkpoint_path;
        result["metrics_path"] = summary.metrics_path;
        return result;
      },
      py::arg("config_json"), py::arg("out_dir") = "",
      "Run training from a JSON config string; returns a summary dict.");
  m.def(
      "evaluate",
      [](const std::string& config_json, const std::string& checkpoint_path,
         const FaultScenario& scenario, const std::string& trajectory_csv) {
        const RunConfig config = config_from_json_str(config_json);
        const Checkpoint checkpoint = load_checkpoint(checkpoint_path);
        const EvaluateReport report =
            run_evaluation(config, checkpoint, scenario, trajectory_csv);
        py::dict result;
        result["plain_reward"] = report.plain_reward;
        result["total_shed"] = report.total_shed;
        result["min_safety"] = report.min_safety;
        result["any_violation"] = report.any_violation;
        result["criterion_pass"] = report.criterion.pass;
        result["first_violation_time"] = report.criterion.first_violation_time;
        result["violating_bus"] = report.criterion.violating_bus;
        return result;
      },
      py::arg("config_json"), py::arg("checkpoint_path"), py::arg("scenario"),
      py::arg("trajectory_csv") = "");
  m.def("config_to_json", &config_to_json_str);

#ifdef VERSION_INFO
  m.attr("__version__") = MACRO_STRINGIFY(VERSION_INFO);
#else
  m.attr("__version__") = "dev";
#endif
}
