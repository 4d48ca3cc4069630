// Command-line front end: optimize, train, experiment, summarize.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "otafl/airsim.hpp"
#include "otafl/convergence.hpp"
#include "otafl/harness.hpp"
#include "otafl/json_io.hpp"
#include "otafl/planner.hpp"
#include "otafl/ridge.hpp"

namespace {

using namespace otafl;

constexpr int kExitInfeasible = 2;

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << text;
  if (!out) throw Error("write failed: " + path);
}

/// Channel and dataset drawn from the config seed; mu/omega filled when unset.
struct Scenario {
  SystemConfig cfg;
  ChannelMatrix channel;
  RidgeDataset data;
};

Scenario scenario_from(const SystemConfig& cfg_in, double reg) {
  Scenario s;
  s.cfg = cfg_in;
  Rng rng(s.cfg.rng_seed);
  s.channel = generate_channel(s.cfg, rng);
  s.data = generate_ridge_dataset(s.cfg, reg, rng);
  if (!s.cfg.has_convexity()) fill_convexity(s.cfg, s.data);
  return s;
}

int cmd_optimize(const std::string& config_path, const std::string& out_path, double reg, bool no_dp) {
  Scenario s = scenario_from(config_from_json(read_json(config_path)), reg);
  const bool with_dp = !no_dp && s.cfg.dp_enabled();
  Rng init_rng = make_stream(s.cfg.rng_seed, {1});
  const TransceiverDesign init = initial_design(s.cfg, s.channel, init_rng, with_dp);
  const PlannerResult res = optimize_transceivers(s.cfg, s.channel, init, with_dp);
  const double f_star = loss(s.data, exact_minimizer(s.data));
  const double f0 = loss(s.data, Vec::Zero(s.data.dim()));
  Json out{{"config", config_to_json(s.cfg)},
           {"channel", channel_to_json(s.channel)},
           {"design", design_to_json(res.design)},
           {"trace", planner_trace_to_json(res.trace)},
           {"dp_report", dp_report_to_json(dp_report(res.design, s.channel, s.cfg))},
           {"bound", bound_report_to_json(bound_report(res.design, s.channel, s.cfg, f_star, f0))},
           {"max_residual", feasibility_check(res.design, s.cfg, s.channel).max_residual}};
  if (s.channel.antennas() == 1) out["miso"] = miso_solution_to_json(miso_optimal_design(s.cfg, s.channel));
  write_text(out_path, out.dump(2) + "\n");
  return 0;
}

int cmd_train(const std::string& config_path, const std::string& design_path, const std::string& out_path,
              const std::string& traj_path, double reg, std::uint64_t seed) {
  Scenario s = scenario_from(config_from_json(read_json(config_path)), reg);
  const Json dj = read_json(design_path);
  const TransceiverDesign design = design_from_json(dj.contains("design") ? dj.at("design") : dj);
  if (dj.contains("channel")) s.channel = channel_from_json(dj.at("channel"));
  if (design.devices() != s.channel.devices() || design.antennas() != s.channel.antennas())
    throw SchemaError("design dimensions do not match the channel");
  Rng rng = make_stream(seed, {2});
  const TrainResult tr = train(s.cfg, s.channel, design, s.data, rng);
  Json out = train_result_to_json(tr);
  out["normalized_gap"] = normalized_gap(tr, s.data);
  write_text(out_path, out.dump(2) + "\n");
  if (!traj_path.empty()) {
    std::ofstream t(traj_path);
    write_trajectory_csv(t, tr);
  }
  return 0;
}

int cmd_experiment(const std::string& figure, int trials, std::uint64_t seed, const std::string& out_path,
                   const std::vector<double>& sweep, const std::vector<std::string>& schemes) {
  ExperimentSpec spec = default_spec(figure_from_string(figure));
  spec.trials = trials;
  spec.seed = seed;
  if (!sweep.empty()) spec.sweep = sweep;
  if (!schemes.empty()) spec.schemes = schemes;
  const auto rows = run_experiment(spec);
  std::ofstream out(out_path);
  if (!out) throw Error("cannot write " + out_path);
  write_results_csv(out, rows);
  bool any_feasible = false;
  for (const auto& r : rows) any_feasible = any_feasible || r.feasible;
  return any_feasible ? 0 : kExitInfeasible;
}

int cmd_summarize(const std::string& in_path, const std::string& out_path) {
  std::ifstream in(in_path);
  if (!in) throw Error("cannot open " + in_path);
  const auto summary = aggregate_trials(read_results_csv(in));
  std::ofstream out(out_path);
  if (!out) throw Error("cannot write " + out_path);
  write_summary_csv(out, summary);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Private over-the-air federated learning: design, simulation and experiments"};
  app.require_subcommand(1);

  std::string config, out, design, traj, figure, in;
  double reg = kRidgeReg;
  bool no_dp = false;
  int trials = 500;
  std::uint64_t seed = 0;
  std::vector<double> sweep;
  std::vector<std::string> schemes;

  auto* opt = app.add_subcommand("optimize", "Design transceivers for a generated channel");
  opt->add_option("--config", config, "SystemConfig JSON")->required()->check(CLI::ExistingFile);
  opt->add_option("--out", out, "Output JSON")->required();
  opt->add_option("--reg", reg, "Ridge regularizer used to derive mu/omega");
  opt->add_flag("--no-dp", no_dp, "Drop the privacy constraints");

  auto* tr = app.add_subcommand("train", "Simulate training with a given design");
  tr->add_option("--config", config, "SystemConfig JSON")->required()->check(CLI::ExistingFile);
  tr->add_option("--design", design, "Design JSON (optimize output or bare design)")->required()->check(CLI::ExistingFile);
  tr->add_option("--out", out, "Output JSON")->required();
  tr->add_option("--trajectory", traj, "Optional CSV with round,loss,gap");
  tr->add_option("--reg", reg, "Ridge regularizer");
  tr->add_option("--seed", seed, "Seed of the transmission noise");

  auto* ex = app.add_subcommand("experiment", "Monte Carlo sweep for one figure");
  ex->add_option("--figure", figure, "extractors|gap_vs_epsilon|gap_vs_snr|gap_vs_T|gap_vs_N")->required();
  ex->add_option("--trials", trials, "Monte Carlo trials")->check(CLI::PositiveNumber);
  ex->add_option("--seed", seed, "Master seed");
  ex->add_option("--out", out, "Result CSV")->required();
  ex->add_option("--sweep", sweep, "Override the sweep grid");
  ex->add_option("--schemes", schemes, "Override the scheme list");

  auto* su = app.add_subcommand("summarize", "Mean and standard error per scheme and sweep point");
  su->add_option("--in", in, "Result CSV")->required()->check(CLI::ExistingFile);
  su->add_option("--out", out, "Summary CSV")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*opt) return cmd_optimize(config, out, reg, no_dp);
    if (*tr) return cmd_train(config, design, out, traj, reg, seed);
    if (*ex) return cmd_experiment(figure, trials, seed, out, sweep, schemes);
    if (*su) return cmd_summarize(in, out);
  } catch (const otafl::Infeasible& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
