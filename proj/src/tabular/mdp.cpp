#include "spot/tabular/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "spot/errors.hpp"

namespace spot::tabular {

namespace {

constexpr double kRowTolerance = 1e-12;

void check_distribution(const std::vector<double>& rows, std::size_t width,
                        const char* what) {
  for (std::size_t start = 0; start < rows.size(); start += width) {
    double total = 0.0;
    for (std::size_t j = 0; j < width; ++j) {
      const double v = rows[start + j];
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw ContractError(std::string(what) + " has a negative or non-finite entry");
      }
      total += v;
    }
    if (std::abs(total - 1.0) > kRowTolerance) {
      throw ContractError(std::string(what) + " row " +
                          std::to_string(start / width) + " sums to " +
                          std::to_string(total));
    }
  }
}

// Per-state maximum of q over actions allowed by `allowed`.
template <typename Allowed>
std::vector<double> state_max(const QTable& q, Allowed allowed) {
  std::vector<double> best(q.num_states);
  for (std::size_t s = 0; s < q.num_states; ++s) {
    double m = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t a = 0; a < q.num_actions; ++a) {
      if (!allowed(s, a)) continue;
      m = any ? std::max(m, q.at(s, a)) : q.at(s, a);
      any = true;
    }
    if (!any) {
      throw EmptySupportError(s, "no supported action at state " +
                                     std::to_string(s));
    }
    best[s] = m;
  }
  return best;
}

QTable backup_with(const std::vector<double>& next_value,
                   const TabularMdp& mdp) {
  QTable out(mdp.num_states, mdp.num_actions);
  for (std::size_t s = 0; s < mdp.num_states; ++s) {
    for (std::size_t a = 0; a < mdp.num_actions; ++a) {
      double expected = 0.0;
      for (std::size_t n = 0; n < mdp.num_states; ++n) {
        expected += mdp.p(s, a, n) * next_value[n];
      }
      out.at(s, a) = mdp.r(s, a) + mdp.gamma * expected;
    }
  }
  return out;
}

void check_q(const QTable& q, const TabularMdp& mdp) {
  if (q.num_states != mdp.num_states || q.num_actions != mdp.num_actions ||
      q.values.size() != mdp.num_states * mdp.num_actions) {
    throw ShapeError("Q table shape does not match the MDP");
  }
}

template <typename Backup>
FixedPoint iterate(const TabularMdp& mdp, const FixedPointOptions& options,
                   Backup backup) {
  mdp.validate();
  FixedPoint result{QTable(mdp.num_states, mdp.num_actions), 0};
  const double factor = mdp.gamma / (1.0 - mdp.gamma);
  while (result.iterations < options.max_iterations) {
    QTable next = backup(result.q);
    ++result.iterations;
    const double step = sup_norm_distance(next, result.q);
    result.q = std::move(next);
    if (factor * step <= options.tolerance) return result;
  }
  throw NumericError("value iteration did not converge in " +
                     std::to_string(options.max_iterations) + " iterations");
}

}  // namespace

void TabularMdp::validate() const {
  if (num_states == 0 || num_actions == 0) {
    throw ContractError("MDP needs at least one state and one action");
  }
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw ContractError("discount must lie in (0, 1)");
  }
  if (transition.size() != num_states * num_actions * num_states ||
      reward.size() != num_states * num_actions ||
      behavior.size() != num_states * num_actions) {
    throw ShapeError("MDP tables have inconsistent sizes");
  }
  for (double v : reward) {
    if (!std::isfinite(v)) throw ContractError("non-finite reward");
  }
  check_distribution(transition, num_states, "transition kernel");
  check_distribution(behavior, num_actions, "behavior policy");
}

double QTable::max_over(std::size_t s) const {
  double m = at(s, 0);
  for (std::size_t a = 1; a < num_actions; ++a) m = std::max(m, at(s, a));
  return m;
}

double sup_norm_distance(const QTable& a, const QTable& b) {
  if (a.values.size() != b.values.size()) {
    throw ShapeError("Q tables differ in size");
  }
  double d = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    d = std::max(d, std::abs(a.values[i] - b.values[i]));
  }
  return d;
}

QTable bellman_backup(const QTable& q, const TabularMdp& mdp) {
  check_q(q, mdp);
  return backup_with(state_max(q, [](std::size_t, std::size_t) { return true; }),
                     mdp);
}

QTable supported_backup(const QTable& q, const TabularMdp& mdp, double eps) {
  check_q(q, mdp);
  return backup_with(
      state_max(q, [&](std::size_t s, std::size_t a) {
        return mdp.pi_beta(s, a) > eps;
      }),
      mdp);
}

FixedPoint optimal_q(const TabularMdp& mdp, const FixedPointOptions& options) {
  return iterate(mdp, options,
                 [&](const QTable& q) { return bellman_backup(q, mdp); });
}

FixedPoint supported_optimal_q(const TabularMdp& mdp, double eps,
                               const FixedPointOptions& options) {
  return iterate(mdp, options,
                 [&](const QTable& q) { return supported_backup(q, mdp, eps); });
}

GapReport suboptimality_gap(const TabularMdp& mdp, double eps,
                            const FixedPointOptions& options) {
  const QTable q_star = optimal_q(mdp, options).q;
  const QTable q_eps = supported_optimal_q(mdp, eps, options).q;
  GapReport report;
  report.gap = sup_norm_distance(q_star, q_eps);
  report.alpha = sup_norm_distance(bellman_backup(q_star, mdp),
                                   supported_backup(q_star, mdp, eps));
  report.bound = report.alpha / (1.0 - mdp.gamma);
  return report;
}

std::vector<std::size_t> supported_optimal_policy(
    const TabularMdp& mdp, double eps, const FixedPointOptions& options) {
  const QTable q = supported_optimal_q(mdp, eps, options).q;
  std::vector<std::size_t> policy(mdp.num_states);
  for (std::size_t s = 0; s < mdp.num_states; ++s) {
    bool any = false;
    for (std::size_t a = 0; a < mdp.num_actions; ++a) {
      if (!(mdp.pi_beta(s, a) > eps)) continue;
      if (!any || q.at(s, a) > q.at(s, policy[s])) policy[s] = a;
      any = true;
    }
  }
  return policy;
}

TabularMdp random_mdp(std::size_t num_states, std::size_t num_actions,
                      double gamma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  // Dirichlet(1) is a normalised vector of Exp(1) draws.
  std::exponential_distribution<double> exp1(1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto dirichlet_rows = [&](std::size_t rows, std::size_t width) {
    std::vector<double> out(rows * width);
    for (std::size_t r = 0; r < rows; ++r) {
      double total = 0.0;
      for (std::size_t j = 0; j < width; ++j) {
        out[r * width + j] = exp1(rng);
        total += out[r * width + j];
      }
      for (std::size_t j = 0; j < width; ++j) out[r * width + j] /= total;
    }
    return out;
  };
  TabularMdp mdp;
  mdp.num_states = num_states;
  mdp.num_actions = num_actions;
  mdp.gamma = gamma;
  mdp.transition = dirichlet_rows(num_states * num_actions, num_states);
  mdp.reward.resize(num_states * num_actions);
  for (double& v : mdp.reward) v = unit(rng);
  mdp.behavior = dirichlet_rows(num_states, num_actions);
  mdp.validate();
  return mdp;
}

}  // namespace spot::tabular
