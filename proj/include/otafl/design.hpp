#pragma once

#include <vector>

#include "otafl/types.hpp"

namespace otafl {

/// Decision variables of one transceiver configuration.
///
/// s2 holds the magnitudes |s_{m,2}|: the artificial-noise phase never
/// enters any metric, so it is not stored.
struct TransceiverDesign {
  CVec s1;                       // M gradient scalars
  Vec s2;                        // M artificial-noise magnitudes, >= 0
  double eta = 1.0;              // aggregation normalizer
  CVec f0;                       // unit-norm aggregation combiner
  std::vector<CVec> extractors;  // M unit-norm information extractors

  int devices() const { return static_cast<int>(s1.size()); }
  int antennas() const { return static_cast<int>(f0.size()); }

  /// Per-device transmit power |s1|^2 + s2^2.
  Vec powers() const { return s1.cwiseAbs2() + s2.cwiseAbs2(); }
};

}  // namespace otafl
