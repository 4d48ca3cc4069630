#include "otafl/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "otafl/airsim.hpp"
#include "otafl/miso.hpp"
#include "otafl/planner.hpp"
#include "otafl/privacy.hpp"

namespace otafl {

namespace {

constexpr std::uint64_t kInitTag = 1;
constexpr std::uint64_t kTrainTag = 2;
constexpr std::uint64_t kProbeTag = 3;

const std::vector<std::string> kKnownSchemes = {"mimo_dp",        "miso_dp",      "mimo_nodp",       "miso_nodp",
                                                "extractor_mmse", "extractor_f0", "extractor_random"};

bool is_extractor_scheme(const std::string& s) { return s.rfind("extractor_", 0) == 0; }

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return kInf;
  if (s == "-inf") return -kInf;
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw SchemaError("not a number: '" + s + "'");
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double mean_eps(const TransceiverDesign& d, const ChannelMatrix& ch, const SystemConfig& cfg) {
  double acc = 0.0;
  for (int m = 0; m < ch.devices(); ++m) acc += epsilon_bs(d, ch, cfg, m);
  return acc / ch.devices();
}

double mean_eps_with(const std::vector<CVec>& fs, const TransceiverDesign& d, const ChannelMatrix& ch,
                     const SystemConfig& cfg) {
  double acc = 0.0;
  for (int m = 0; m < ch.devices(); ++m) acc += epsilon_bs_with(fs[static_cast<std::size_t>(m)], d, ch, cfg, m);
  return acc / ch.devices();
}

SystemConfig without_dp(SystemConfig cfg) {
  cfg.dp_epsilon.assign(cfg.dp_epsilon.size(), kInf);
  return cfg;
}

struct PointSetup {
  SystemConfig cfg;
  ChannelMatrix channel;
};

PointSetup apply_sweep(const ExperimentSpec& spec, const TrialInstance& inst, double v) {
  PointSetup p{inst.cfg, inst.channel};
  switch (spec.figure) {
    case FigureId::Extractors:
    case FigureId::GapVsEpsilon:
      p.cfg.dp_epsilon.assign(p.cfg.dp_epsilon.size(), v);
      break;
    case FigureId::GapVsSnr:
      p.cfg.set_snr_db(v);
      break;
    case FigureId::GapVsT:
      p.cfg.rounds = static_cast<int>(std::lround(v));
      break;
    case FigureId::GapVsN: {
      const int n = static_cast<int>(std::lround(v));
      p.cfg.num_antennas = n;
      p.channel = ChannelMatrix(inst.channel.entries.topRows(n));
      break;
    }
  }
  return p;
}

int scheme_index(const std::string& s) {
  const auto it = std::find(kKnownSchemes.begin(), kKnownSchemes.end(), s);
  return static_cast<int>(it - kKnownSchemes.begin());
}

/// Runs all schemes of one trial.
std::vector<ResultRow> run_trial(const ExperimentSpec& spec, int trial) {
  int n_max = spec.base.num_antennas;
  if (spec.figure == FigureId::GapVsN)
    for (double v : spec.sweep) n_max = std::max(n_max, static_cast<int>(std::lround(v)));
  const TrialInstance inst = make_instance(spec.base, spec.reg_coefficient, spec.seed, trial, n_max);

  const auto t = static_cast<std::uint64_t>(trial);
  std::map<int, TransceiverDesign> nodp_cache;  // keyed by antenna count
  std::vector<ResultRow> rows;

  for (std::size_t si = 0; si < spec.sweep.size(); ++si) {
    const double v = spec.sweep[si];
    const PointSetup pt = apply_sweep(spec, inst, v);
    const auto sw = static_cast<std::uint64_t>(si);

    // The MIMO DP design is shared by the extractor schemes.
    std::optional<PlannerResult> dp_plan;
    bool dp_failed = false;
    auto mimo_dp = [&]() -> const PlannerResult* {
      if (!dp_plan && !dp_failed) {
        const auto idx = static_cast<std::uint64_t>(scheme_index("mimo_dp"));
        Rng init_rng = make_stream(spec.seed, {t, idx, kInitTag});
        try {
          const TransceiverDesign init = initial_design(pt.cfg, pt.channel, init_rng, true);
          dp_plan = optimize_transceivers(pt.cfg, pt.channel, init, true);
        } catch (const Error&) {
          dp_failed = true;
        }
      }
      return dp_plan ? &*dp_plan : nullptr;
    };

    for (const std::string& scheme : spec.schemes) {
      const auto idx = static_cast<std::uint64_t>(scheme_index(scheme));
      ResultRow row;
      row.trial = trial;
      row.scheme = scheme;
      row.sweep_name = spec.sweep_name();
      row.sweep_value = v;
      row.seed = inst.seed;
      row.gap = std::nan("");
      row.eps_bs_mean = std::nan("");
      row.feasible = false;

      std::optional<TransceiverDesign> design;
      SystemConfig cfg = pt.cfg;
      ChannelMatrix channel = pt.channel;
      try {
        if (scheme == "mimo_dp") {
          if (const PlannerResult* p = mimo_dp()) design = p->design;
        } else if (scheme == "mimo_nodp") {
          cfg = without_dp(pt.cfg);
          auto it = nodp_cache.find(channel.antennas());
          if (it == nodp_cache.end()) {
            Rng init_rng = make_stream(spec.seed, {t, idx, kInitTag});
            const TransceiverDesign init = initial_design(cfg, channel, init_rng, false);
            it = nodp_cache.emplace(channel.antennas(), optimize_transceivers(cfg, channel, init, false).design).first;
          }
          design = it->second;
        } else if (scheme == "miso_dp" || scheme == "miso_nodp") {
          if (scheme == "miso_nodp") cfg = without_dp(pt.cfg);
          channel = pt.channel.antenna_row(0);
          cfg.num_antennas = 1;
          design = miso_optimal_design(cfg, channel).design;
        } else if (is_extractor_scheme(scheme)) {
          if (const PlannerResult* p = mimo_dp()) {
            const TransceiverDesign& d = p->design;
            std::vector<CVec> fs;
            if (scheme == "extractor_mmse") {
              fs = d.extractors;
            } else if (scheme == "extractor_f0") {
              fs.assign(static_cast<std::size_t>(channel.devices()), d.f0);
            } else {
              Rng probe = make_stream(spec.seed, {t, idx, sw, kProbeTag});
              for (int m = 0; m < channel.devices(); ++m)
                fs.push_back(complex_normal_matrix(probe, channel.antennas(), 1, 1.0 / channel.antennas())
                                 .col(0)
                                 .normalized());
            }
            row.eps_bs_mean = mean_eps_with(fs, d, channel, cfg);
            row.feasible = p->trace.final_report.all_feasible();
          }
          rows.push_back(row);
          continue;
        }
        if (design) {
          const DpReport rep = dp_report(*design, channel, cfg);
          row.eps_bs_mean = mean_eps(*design, channel, cfg);
          row.feasible = rep.all_feasible();
          Rng train_rng = make_stream(spec.seed, {t, idx, sw, kTrainTag});
          const TrainResult tr = train(cfg, channel, *design, inst.data, train_rng);
          row.gap = normalized_gap(tr, inst.data);
        }
      } catch (const Error&) {
        row.feasible = false;
        row.gap = std::nan("");
      }
      if (!row.feasible) row.gap = std::nan("");
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace

std::string to_string(FigureId f) {
  switch (f) {
    case FigureId::Extractors: return "extractors";
    case FigureId::GapVsEpsilon: return "gap_vs_epsilon";
    case FigureId::GapVsSnr: return "gap_vs_snr";
    case FigureId::GapVsT: return "gap_vs_T";
    case FigureId::GapVsN: return "gap_vs_N";
  }
  return "unknown";
}

FigureId figure_from_string(const std::string& s) {
  for (FigureId f : {FigureId::Extractors, FigureId::GapVsEpsilon, FigureId::GapVsSnr, FigureId::GapVsT,
                     FigureId::GapVsN})
    if (to_string(f) == s) return f;
  throw ConfigError("unknown figure id '" + s + "'");
}

SystemConfig experiment_config() {
  SystemConfig cfg;
  cfg.set_uniform(10, 100, 30.0, 1e-3);
  cfg.num_antennas = 20;
  cfg.model_dim = 20;
  cfg.rounds = 30;
  cfg.max_power = 1.0;
  cfg.set_snr_db(15.0);
  cfg.clip_level = 3.0;
  return cfg;
}

std::string ExperimentSpec::sweep_name() const {
  switch (figure) {
    case FigureId::Extractors:
    case FigureId::GapVsEpsilon: return "epsilon";
    case FigureId::GapVsSnr: return "snr_db";
    case FigureId::GapVsT: return "rounds";
    case FigureId::GapVsN: return "antennas";
  }
  return "unknown";
}

void ExperimentSpec::validate() const {
  if (sweep.empty()) throw ConfigError("experiment sweep is empty");
  if (trials < 1) throw ConfigError("experiment needs at least one trial");
  if (schemes.empty()) throw ConfigError("experiment needs at least one scheme");
  for (const auto& s : schemes)
    if (scheme_index(s) == static_cast<int>(kKnownSchemes.size())) throw ConfigError("unknown scheme '" + s + "'");
  base.validate();
}

ExperimentSpec default_spec(FigureId figure) {
  ExperimentSpec spec;
  spec.figure = figure;
  const std::vector<std::string> all = {"mimo_dp", "miso_dp", "mimo_nodp", "miso_nodp"};
  switch (figure) {
    case FigureId::Extractors:
      spec.schemes = {"extractor_mmse", "extractor_f0", "extractor_random"};
      spec.sweep = {1, 5, 10, 20, 30, 40, 50, 60};
      break;
    case FigureId::GapVsEpsilon:
      spec.schemes = all;
      spec.sweep = {1, 5, 10, 20, 30, 40, 60};
      break;
    case FigureId::GapVsSnr:
      spec.schemes = all;
      spec.sweep = {0, 10, 20, 30, 40};
      break;
    case FigureId::GapVsT:
      spec.schemes = all;
      spec.sweep = {10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
      break;
    case FigureId::GapVsN:
      spec.schemes = {"mimo_dp", "mimo_nodp"};
      spec.sweep = {1, 2, 4, 8, 16, 20, 32};
      break;
  }
  return spec;
}

std::uint64_t trial_seed(std::uint64_t master, int trial) {
  return derive_seed(master, {static_cast<std::uint64_t>(trial)});
}

TrialInstance make_instance(const SystemConfig& base, double reg_coefficient, std::uint64_t master, int trial,
                            int antennas) {
  TrialInstance inst;
  inst.seed = trial_seed(master, trial);
  inst.cfg = base;
  inst.cfg.num_antennas = antennas;
  inst.cfg.rng_seed = inst.seed;
  Rng rng(inst.seed);
  inst.channel = generate_channel(inst.cfg, rng);
  inst.data = generate_ridge_dataset(inst.cfg, reg_coefficient, rng);
  fill_convexity(inst.cfg, inst.data);
  inst.cfg.num_antennas = base.num_antennas;
  return inst;
}

std::vector<ResultRow> run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  std::vector<std::vector<ResultRow>> per_trial(static_cast<std::size_t>(spec.trials));
#pragma omp parallel for schedule(dynamic)
  for (int t = 0; t < spec.trials; ++t) per_trial[static_cast<std::size_t>(t)] = run_trial(spec, t);

  std::vector<ResultRow> rows;
  for (auto& v : per_trial) rows.insert(rows.end(), v.begin(), v.end());
  std::map<std::string, std::size_t> scheme_order;
  for (std::size_t i = 0; i < spec.schemes.size(); ++i) scheme_order.emplace(spec.schemes[i], i);
  auto sweep_index = [&](double v) {
    return static_cast<std::size_t>(std::find(spec.sweep.begin(), spec.sweep.end(), v) - spec.sweep.begin());
  };
  std::stable_sort(rows.begin(), rows.end(), [&](const ResultRow& a, const ResultRow& b) {
    const auto ka = std::make_tuple(scheme_order[a.scheme], sweep_index(a.sweep_value), a.trial);
    const auto kb = std::make_tuple(scheme_order[b.scheme], sweep_index(b.sweep_value), b.trial);
    return ka < kb;
  });
  return rows;
}

void write_results_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
  os << kResultHeader << '\n';
  for (const auto& r : rows)
    os << r.trial << ',' << r.scheme << ',' << r.sweep_name << ',' << format_double(r.sweep_value) << ','
       << format_double(r.gap) << ',' << format_double(r.eps_bs_mean) << ',' << (r.feasible ? "true" : "false")
       << ',' << r.seed << '\n';
}

std::vector<ResultRow> read_results_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw SchemaError("empty result file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kResultHeader) throw SchemaError("unexpected header: " + line);
  std::vector<ResultRow> rows;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 8) throw SchemaError("line " + std::to_string(lineno) + ": expected 8 fields");
    ResultRow r;
    try {
      r.trial = std::stoi(cells[0]);
      r.seed = std::stoull(cells[7]);
    } catch (const std::exception&) {
      throw SchemaError("line " + std::to_string(lineno) + ": bad integer field");
    }
    r.scheme = cells[1];
    r.sweep_name = cells[2];
    r.sweep_value = parse_double(cells[3]);
    r.gap = parse_double(cells[4]);
    r.eps_bs_mean = parse_double(cells[5]);
    if (cells[6] == "true") r.feasible = true;
    else if (cells[6] == "false") r.feasible = false;
    else throw SchemaError("line " + std::to_string(lineno) + ": feasible must be true/false");
    rows.push_back(r);
  }
  return rows;
}

std::vector<SummaryRow> aggregate_trials(const std::vector<ResultRow>& rows) {
  struct Acc {
    SummaryRow row;
    std::vector<double> gaps, eps;
  };
  std::vector<Acc> accs;
  std::map<std::tuple<std::string, std::string, double>, std::size_t> index;
  for (const auto& r : rows) {
    const auto key = std::make_tuple(r.scheme, r.sweep_name, r.sweep_value);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, accs.size()).first;
      Acc a;
      a.row.scheme = r.scheme;
      a.row.sweep_name = r.sweep_name;
      a.row.sweep_value = r.sweep_value;
      accs.push_back(std::move(a));
    }
    Acc& a = accs[it->second];
    ++a.row.trials;
    if (!r.feasible) continue;
    ++a.row.feasible;
    if (std::isfinite(r.gap)) a.gaps.push_back(r.gap);
    if (std::isfinite(r.eps_bs_mean)) a.eps.push_back(r.eps_bs_mean);
  }
  auto mean_se = [](const std::vector<double>& v, double& mean, double& se) {
    if (v.empty()) {
      mean = se = std::nan("");
      return;
    }
    double m = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {  // Welford
      const double delta = v[i] - m;
      m += delta / static_cast<double>(i + 1);
      m2 += delta * (v[i] - m);
    }
    mean = m;
    se = v.size() > 1 ? std::sqrt(m2 / static_cast<double>(v.size() - 1) / static_cast<double>(v.size())) : 0.0;
  };
  std::vector<SummaryRow> out;
  for (auto& a : accs) {
    mean_se(a.gaps, a.row.gap_mean, a.row.gap_se);
    mean_se(a.eps, a.row.eps_bs_mean, a.row.eps_bs_se);
    out.push_back(a.row);
  }
  return out;
}

void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
  os << kSummaryHeader << '\n';
  for (const auto& r : rows)
    os << r.scheme << ',' << r.sweep_name << ',' << format_double(r.sweep_value) << ',' << format_double(r.gap_mean)
       << ',' << format_double(r.gap_se) << ',' << format_double(r.eps_bs_mean) << ','
       << format_double(r.eps_bs_se) << ',' << r.trials << ',' << r.feasible << '\n';
}

std::optional<SummaryRow> find_summary(const std::vector<SummaryRow>& rows, const std::string& scheme,
                                       double sweep_value) {
  for (const auto& r : rows)
    if (r.scheme == scheme && r.sweep_value == sweep_value) return r;
  return std::nullopt;
}

}  // namespace otafl
