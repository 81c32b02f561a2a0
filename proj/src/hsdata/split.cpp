#include <cmath>
#include <numeric>

#include "s5dscr/hsdata.hpp"
#include "s5dscr/rng.hpp"

namespace s5dscr::hsdata {

SplitAssignment split(std::size_t n_tiles, std::array<double, 3> fractions, std::uint64_t seed) {
  S5DSCR_CHECK(n_tiles >= 3, ErrorCode::TooFewTiles, "split needs at least 3 tiles");
  const double total = fractions[0] + fractions[1] + fractions[2];
  S5DSCR_CHECK(std::abs(total - 1.0) <= 1e-9, ErrorCode::InvalidArgument, "split fractions must sum to 1");
  for (double f : fractions) S5DSCR_CHECK(f >= 0.0, ErrorCode::InvalidArgument, "negative split fraction");

  std::vector<std::size_t> order(n_tiles);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  shuffle<std::size_t>(order, rng);

  // The epsilon keeps exact products such as 0.2 * 10 from flooring to 1.
  auto count = [n_tiles](double f) {
    return static_cast<std::size_t>(std::floor(f * static_cast<double>(n_tiles) + 1e-9));
  };
  const std::size_t n_val = count(fractions[1]);
  const std::size_t n_test = count(fractions[2]);
  const std::size_t n_train = n_tiles - n_val - n_test;

  SplitAssignment s;
  s.seed = seed;
  s.fractions = fractions;
  s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
               order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
  return s;
}

}  // namespace s5dscr::hsdata
