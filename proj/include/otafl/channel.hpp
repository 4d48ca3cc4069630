#pragma once

#include "otafl/config.hpp"
#include "otafl/rng.hpp"
#include "otafl/types.hpp"

namespace otafl {

/// Uplink channel, N antennas by M devices; column m is h_m.
struct ChannelMatrix {
  CMat entries;

  ChannelMatrix() = default;
  explicit ChannelMatrix(CMat h) : entries(std::move(h)) {}

  int antennas() const { return static_cast<int>(entries.rows()); }
  int devices() const { return static_cast<int>(entries.cols()); }
  auto column(int m) const { return entries.col(m); }

  /// The single-antenna channel seen by antenna `row` alone.
  ChannelMatrix antenna_row(int row) const { return ChannelMatrix(entries.row(row)); }
};

/// Rayleigh fading: i.i.d. CN(0,1) entries.
ChannelMatrix generate_channel(const SystemConfig& cfg, Rng& rng);

}  // namespace otafl
