#include "otafl/channel.hpp"

namespace otafl {

ChannelMatrix generate_channel(const SystemConfig& cfg, Rng& rng) {
  return ChannelMatrix(complex_normal_matrix(rng, cfg.num_antennas, cfg.num_devices, 1.0));
}

}  // namespace otafl
