#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "otafl/channel.hpp"
#include "otafl/config.hpp"
#include "otafl/ridge.hpp"

namespace otafl {

enum class FigureId { Extractors, GapVsEpsilon, GapVsSnr, GapVsT, GapVsN };

std::string to_string(FigureId f);
FigureId figure_from_string(const std::string& s);

/// Regularizer of the ridge experiment.
inline constexpr double kRidgeReg = 1e-3;

/// Base scenario for the experiments: M=10, N=20, d=20, T=30, K_m=100,
/// P=1, 15 dB, delta=1e-3, eps=30, clip level 3.
SystemConfig experiment_config();

struct ExperimentSpec {
  FigureId figure = FigureId::GapVsEpsilon;
  std::vector<std::string> schemes;
  std::vector<double> sweep;
  int trials = 500;
  std::uint64_t seed = 0;
  SystemConfig base = experiment_config();
  double reg_coefficient = kRidgeReg;

  std::string sweep_name() const;
  void validate() const;
};

/// Default schemes and sweep grid for a figure.
ExperimentSpec default_spec(FigureId figure);

struct ResultRow {
  int trial = 0;
  std::string scheme;
  std::string sweep_name;
  double sweep_value = 0.0;
  double gap = 0.0;
  double eps_bs_mean = 0.0;
  bool feasible = false;
  std::uint64_t seed = 0;
};

/// One Monte Carlo draw: a channel with `antennas` rows and a dataset, both
/// from the trial's stream, plus the config with mu/omega filled in.
struct TrialInstance {
  SystemConfig cfg;
  ChannelMatrix channel;
  RidgeDataset data;
  std::uint64_t seed = 0;
};

std::uint64_t trial_seed(std::uint64_t master, int trial);
TrialInstance make_instance(const SystemConfig& base, double reg_coefficient, std::uint64_t master, int trial,
                            int antennas);

/// Runs every (trial, scheme, sweep point) and returns rows sorted by
/// (scheme, sweep index, trial). Trials run in parallel.
std::vector<ResultRow> run_experiment(const ExperimentSpec& spec);

inline constexpr const char* kResultHeader = "trial,scheme,sweep_name,sweep_value,gap,eps_bs_mean,feasible,seed";
inline constexpr const char* kSummaryHeader =
    "scheme,sweep_name,sweep_value,gap_mean,gap_se,eps_bs_mean,eps_bs_se,trials,feasible";

void write_results_csv(std::ostream& os, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_results_csv(std::istream& is);

struct SummaryRow {
  std::string scheme;
  std::string sweep_name;
  double sweep_value = 0.0;
  double gap_mean = 0.0;
  double gap_se = 0.0;
  double eps_bs_mean = 0.0;
  double eps_bs_se = 0.0;
  int trials = 0;
  int feasible = 0;
};

/// Per (scheme, sweep point): mean and standard error over feasible rows
/// with finite values, in first-appearance order.
std::vector<SummaryRow> aggregate_trials(const std::vector<ResultRow>& rows);
void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows);

/// Looks up one summary entry; nullopt when absent.
std::optional<SummaryRow> find_summary(const std::vector<SummaryRow>& rows, const std::string& scheme,
                                       double sweep_value);

}  // namespace otafl
