#include "otafl/rng.hpp"

#include <cmath>

namespace otafl {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = splitmix64(master);
  for (std::uint64_t p : path) h = splitmix64(h ^ splitmix64(p + 0x632BE59BD9B4E019ULL));
  return h;
}

Mat normal_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double var) {
  std::normal_distribution<double> nd(0.0, std::sqrt(var));
  Mat out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = nd(rng);
  return out;
}

CMat complex_normal_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double var) {
  std::normal_distribution<double> nd(0.0, std::sqrt(var / 2.0));
  CMat out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double re = nd(rng);
      const double im = nd(rng);
      out(i, j) = cd(re, im);
    }
  return out;
}

}  // namespace otafl
