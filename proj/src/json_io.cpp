#include "otafl/json_io.hpp"

#include <cmath>
#include <ostream>
#include <set>

namespace otafl {

namespace {

Json real_vec(const Vec& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

Json complex_vec(const CVec& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back({v(i).real(), v(i).imag()});
  return out;
}

CVec complex_vec_from(const Json& j) {
  if (!j.is_array()) throw SchemaError("expected an array of [re, im] pairs");
  CVec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    const Json& e = j[i];
    if (!e.is_array() || e.size() != 2) throw SchemaError("complex entries must be [re, im]");
    v(static_cast<Eigen::Index>(i)) = cd(e[0].get<double>(), e[1].get<double>());
  }
  return v;
}

Json epsilon_json(double e) { return std::isinf(e) ? Json("inf") : Json(e); }

double epsilon_from(const Json& j) {
  if (j.is_null()) return kInf;
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return kInf;
    throw ConfigError("dp_epsilon entries must be numbers, \"inf\" or null");
  }
  return j.get<double>();
}

}  // namespace

Json config_to_json(const SystemConfig& cfg) {
  Json eps = Json::array();
  for (double e : cfg.dp_epsilon) eps.push_back(epsilon_json(e));
  return Json{{"num_devices", cfg.num_devices},
              {"num_antennas", cfg.num_antennas},
              {"model_dim", cfg.model_dim},
              {"rounds", cfg.rounds},
              {"samples_per_device", cfg.samples_per_device},
              {"max_power", cfg.max_power},
              {"noise_var", cfg.noise_var},
              {"clip_level", cfg.clip_level},
              {"dp_epsilon", eps},
              {"dp_delta", cfg.dp_delta},
              {"strong_convexity", cfg.strong_convexity},
              {"smoothness", cfg.smoothness},
              {"penalty", cfg.penalty},
              {"mm_iters", cfg.mm_iters},
              {"outer_iters", cfg.outer_iters},
              {"early_stop_tol", cfg.early_stop_tol},
              {"rng_seed", cfg.rng_seed}};
}

SystemConfig config_from_json(const Json& j) {
  static const std::set<std::string> known = {
      "num_devices", "num_antennas", "model_dim",  "rounds",         "samples_per_device", "max_power",
      "noise_var",   "snr_db",       "clip_level", "dp_epsilon",     "dp_delta",           "strong_convexity",
      "smoothness",  "learning_rate", "penalty",   "mm_iters",       "outer_iters",        "early_stop_tol",
      "rng_seed"};
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw ConfigError("unknown config field '" + it.key() + "'");
  if (j.contains("noise_var") && j.contains("snr_db")) throw ConfigError("give noise_var or snr_db, not both");

  SystemConfig cfg;
  try {
    if (j.contains("num_devices")) {
      // Per-device lists default to uniform values for the given M.
      const int m = j.at("num_devices").get<int>();
      cfg.set_uniform(m, cfg.samples_per_device.front(), cfg.dp_epsilon.front(), cfg.dp_delta.front());
    }
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("num_antennas", cfg.num_antennas);
    get("model_dim", cfg.model_dim);
    get("rounds", cfg.rounds);
    get("samples_per_device", cfg.samples_per_device);
    get("max_power", cfg.max_power);
    get("noise_var", cfg.noise_var);
    get("clip_level", cfg.clip_level);
    get("dp_delta", cfg.dp_delta);
    get("strong_convexity", cfg.strong_convexity);
    get("smoothness", cfg.smoothness);
    get("penalty", cfg.penalty);
    get("mm_iters", cfg.mm_iters);
    get("outer_iters", cfg.outer_iters);
    get("early_stop_tol", cfg.early_stop_tol);
    get("rng_seed", cfg.rng_seed);
    if (j.contains("snr_db")) cfg.set_snr_db(j.at("snr_db").get<double>());
    if (j.contains("dp_epsilon")) {
      cfg.dp_epsilon.clear();
      for (const auto& e : j.at("dp_epsilon")) cfg.dp_epsilon.push_back(epsilon_from(e));
    }
    if (j.contains("learning_rate")) {
      // Only accepted when consistent with the smoothness constant.
      const double lr = j.at("learning_rate").get<double>();
      if (cfg.smoothness > 0.0 && std::abs(lr * cfg.smoothness - 1.0) > 1e-9)
        throw ConfigError("learning_rate must equal 1/smoothness");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config field has the wrong type: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

Json channel_to_json(const ChannelMatrix& ch) {
  Json cols = Json::array();
  for (int m = 0; m < ch.devices(); ++m) cols.push_back(complex_vec(ch.column(m)));
  return Json{{"antennas", ch.antennas()}, {"devices", ch.devices()}, {"columns", cols}};
}

ChannelMatrix channel_from_json(const Json& j) {
  const int n = j.at("antennas").get<int>();
  const int m = j.at("devices").get<int>();
  const Json& cols = j.at("columns");
  if (static_cast<int>(cols.size()) != m) throw SchemaError("channel: column count mismatch");
  CMat h(n, m);
  for (int k = 0; k < m; ++k) {
    const CVec c = complex_vec_from(cols[static_cast<std::size_t>(k)]);
    if (c.size() != n) throw SchemaError("channel: column length mismatch");
    h.col(k) = c;
  }
  if (!h.allFinite()) throw SchemaError("channel: non-finite entry");
  return ChannelMatrix(h);
}

Json design_to_json(const TransceiverDesign& d) {
  Json ex = Json::array();
  for (const auto& f : d.extractors) ex.push_back(complex_vec(f));
  return Json{{"s1", complex_vec(d.s1)}, {"s2", real_vec(d.s2)}, {"eta", d.eta}, {"f0", complex_vec(d.f0)},
              {"extractors", ex}};
}

TransceiverDesign design_from_json(const Json& j) {
  TransceiverDesign d;
  try {
    d.s1 = complex_vec_from(j.at("s1"));
    const auto s2 = j.at("s2").get<std::vector<double>>();
    d.s2 = Eigen::Map<const Vec>(s2.data(), static_cast<Eigen::Index>(s2.size()));
    d.eta = j.at("eta").get<double>();
    d.f0 = complex_vec_from(j.at("f0"));
    for (const auto& f : j.at("extractors")) d.extractors.push_back(complex_vec_from(f));
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("design: ") + e.what());
  }
  if (d.s2.size() != d.s1.size() || d.extractors.size() != static_cast<std::size_t>(d.s1.size()))
    throw SchemaError("design: per-device sizes disagree");
  if (!(d.eta > 0.0)) throw SchemaError("design: eta must be positive");
  return d;
}

Json dp_report_to_json(const DpReport& r) {
  return Json{{"phi", real_vec(r.phi)},
              {"sensitivity", real_vec(r.sensitivity)},
              {"eps_bs", real_vec(r.eps_bs)},
              {"feasible", r.feasible}};
}

Json bound_report_to_json(const BoundReport& r) {
  return Json{{"contraction", r.contraction},   {"noise_term", r.noise_term},
              {"mismatch_terms", real_vec(r.mismatch_terms)}, {"optimal_loss", r.optimal_loss},
              {"initial_gap", r.initial_gap},   {"bound_value", r.bound_value}};
}

Json miso_solution_to_json(const MisoSolution& s) {
  return Json{{"design", design_to_json(s.design)},
              {"t0_threshold", std::isinf(s.t0_threshold) ? Json("inf") : Json(s.t0_threshold)},
              {"regime", to_string(s.regime)}};
}

Json planner_trace_to_json(const PlannerTrace& t) {
  Json j{{"objective", t.objective},
         {"max_residual", t.max_residual},
         {"mm_iterations", t.mm_iterations},
         {"trace_gap_ratio", t.trace_gap_ratio},
         {"best_iteration", t.best_iteration},
         {"degenerate_retries", t.degenerate_retries},
         {"rank_fallbacks", t.rank_fallbacks},
         {"termination", t.termination},
         {"final_report", dp_report_to_json(t.final_report)}};
  j["early_stop_iteration"] = t.early_stop_iteration ? Json(*t.early_stop_iteration) : Json(nullptr);
  return j;
}

Json train_result_to_json(const TrainResult& r) {
  return Json{{"loss_trajectory", real_vec(r.loss_trajectory)},
              {"gap_trajectory", real_vec(r.gap_trajectory)},
              {"gradient_error_norms", real_vec(r.gradient_error_norms)},
              {"final_w", real_vec(r.final_w)},
              {"diverged", r.diverged}};
}

void write_trajectory_csv(std::ostream& os, const TrainResult& r) {
  os << "round,loss,gap\n";
  for (Eigen::Index t = 0; t < r.loss_trajectory.size(); ++t)
    os << t << ',' << r.loss_trajectory(t) << ',' << r.gap_trajectory(t) << '\n';
}

}  // namespace otafl
