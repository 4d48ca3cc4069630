#include "otafl/config.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "otafl/types.hpp"

namespace otafl {

int SystemConfig::total_samples() const {
  return std::accumulate(samples_per_device.begin(), samples_per_device.end(), 0);
}

int SystemConfig::max_samples() const {
  int k = 0;
  for (int v : samples_per_device) k = std::max(k, v);
  return k;
}

bool SystemConfig::dp_enabled() const {
  for (double e : dp_epsilon)
    if (std::isfinite(e)) return true;
  return false;
}

void SystemConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("invalid config: " + what); };
  if (num_devices < 1) fail("num_devices must be >= 1");
  if (num_antennas < 1) fail("num_antennas must be >= 1");
  if (model_dim < 1) fail("model_dim must be >= 1");
  if (rounds < 1) fail("rounds must be >= 1");
  const auto m = static_cast<std::size_t>(num_devices);
  if (samples_per_device.size() != m) fail("samples_per_device must have num_devices entries");
  if (dp_epsilon.size() != m) fail("dp_epsilon must have num_devices entries");
  if (dp_delta.size() != m) fail("dp_delta must have num_devices entries");
  for (int k : samples_per_device)
    if (k < 1) fail("samples_per_device entries must be positive");
  if (!(max_power > 0.0) || !std::isfinite(max_power)) fail("max_power must be positive");
  if (!(noise_var > 0.0) || !std::isfinite(noise_var)) fail("noise_var must be positive");
  if (!(clip_level > 0.0) || !std::isfinite(clip_level)) fail("clip_level must be positive");
  for (double e : dp_epsilon)
    if (!(e > 0.0)) fail("dp_epsilon entries must be positive or inf");
  for (double d : dp_delta)
    if (!(d > 0.0 && d < 1.0)) fail("dp_delta entries must lie in (0,1)");
  const bool derive = strong_convexity == 0.0 && smoothness == 0.0;
  if (!derive && !(strong_convexity > 0.0 && strong_convexity <= smoothness))
    fail("need 0 < strong_convexity <= smoothness");
  if (!(penalty > 0.0)) fail("penalty must be positive");
  if (mm_iters < 1) fail("mm_iters must be >= 1");
  if (outer_iters < 1) fail("outer_iters must be >= 1");
  if (!(early_stop_tol > 0.0)) fail("early_stop_tol must be positive");
}

void SystemConfig::set_uniform(int m, int samples, double epsilon, double delta) {
  num_devices = m;
  samples_per_device.assign(static_cast<std::size_t>(m), samples);
  dp_epsilon.assign(static_cast<std::size_t>(m), epsilon);
  dp_delta.assign(static_cast<std::size_t>(m), delta);
}

void SystemConfig::set_snr_db(double snr_db) { noise_var = max_power / std::pow(10.0, snr_db / 10.0); }

double SystemConfig::snr_db() const { return 10.0 * std::log10(max_power / noise_var); }

}  // namespace otafl
