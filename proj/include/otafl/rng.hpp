#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "otafl/types.hpp"

namespace otafl {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

/// Counter-based split: hashes a master seed together with a path of
/// indices (trial, scheme, sweep point, ...) into an independent seed.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);

inline Rng make_stream(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  return Rng(derive_seed(master, path));
}

/// Fills a matrix with i.i.d. real Normal(0, var) entries (column-major order).
Mat normal_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double var = 1.0);

/// Circularly-symmetric CN(0, var): independent real/imag parts of variance var/2.
CMat complex_normal_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double var = 1.0);

}  // namespace otafl
