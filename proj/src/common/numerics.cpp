#include "spot/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spot/errors.hpp"

namespace spot {

double log_sum_exp(std::span<const double> x) {
  if (x.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(x.begin(), x.end());
  if (!std::isfinite(m)) return m;
  double total = 0.0;
  for (double v : x) total += std::exp(v - m);
  return m + std::log(total);
}

double mean(std::span<const double> x) {
  if (x.empty()) throw ContractError("mean of an empty sample");
  double total = 0.0;
  for (double v : x) total += v;
  return total / static_cast<double>(x.size());
}

double standard_error(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  const double n = static_cast<double>(x.size());
  return std::sqrt(ss / (n - 1.0) / n);
}

double percentile_nearest_rank(std::vector<double> x, double p) {
  if (x.empty()) throw ContractError("percentile of an empty sample");
  if (p < 0.0 || p > 100.0) throw ContractError("percentile outside [0, 100]");
  const auto n = static_cast<double>(x.size());
  std::size_t rank = static_cast<std::size_t>(std::ceil(p / 100.0 * n));
  rank = std::max<std::size_t>(rank, 1);
  std::nth_element(x.begin(), x.begin() + (rank - 1), x.end());
  return x[rank - 1];
}

}  // namespace spot
