#pragma once

#include <span>
#include <vector>

namespace spot {

// log(sum(exp(x))) without overflow; -inf for an empty input.
double log_sum_exp(std::span<const double> x);

double mean(std::span<const double> x);
// Sample standard error of the mean (n - 1 denominator); 0 for n < 2.
double standard_error(std::span<const double> x);

// Nearest-rank percentile: the ceil(p/100 * n)-th smallest value (1-based),
// the smallest value for p = 0. Throws ContractError on empty input.
double percentile_nearest_rank(std::vector<double> x, double p);

}  // namespace spot
