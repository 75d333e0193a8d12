#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

// Finite MDPs with an explicit behavior policy, and the (supported) Bellman
// optimality operators over them.
namespace spot::tabular {

struct TabularMdp {
  std::size_t num_states = 0;
  std::size_t num_actions = 0;
  // p(s'|s,a) at [(s * A + a) * S + s'].
  std::vector<double> transition;
  // r(s,a) at [s * A + a].
  std::vector<double> reward;
  double gamma = 0.9;
  // pi_beta(a|s) at [s * A + a].
  std::vector<double> behavior;

  double p(std::size_t s, std::size_t a, std::size_t next) const {
    return transition[(s * num_actions + a) * num_states + next];
  }
  double r(std::size_t s, std::size_t a) const {
    return reward[s * num_actions + a];
  }
  double pi_beta(std::size_t s, std::size_t a) const {
    return behavior[s * num_actions + a];
  }

  // Throws ContractError unless every row is a distribution (to 1e-12),
  // rewards are finite and gamma is in (0, 1).
  void validate() const;
};

struct QTable {
  std::size_t num_states = 0;
  std::size_t num_actions = 0;
  std::vector<double> values;

  QTable() = default;
  QTable(std::size_t states, std::size_t actions, double fill = 0.0)
      : num_states(states), num_actions(actions),
        values(states * actions, fill) {}

  double& at(std::size_t s, std::size_t a) { return values[s * num_actions + a]; }
  double at(std::size_t s, std::size_t a) const {
    return values[s * num_actions + a];
  }
  double max_over(std::size_t s) const;
};

double sup_norm_distance(const QTable& a, const QTable& b);

// (TQ)(s,a) = r(s,a) + gamma * sum_s' p(s'|s,a) max_a' Q(s',a').
QTable bellman_backup(const QTable& q, const TabularMdp& mdp);

// As bellman_backup with the inner max over {a' : pi_beta(a'|s') > eps}.
// Throws EmptySupportError naming the first state whose set is empty.
QTable supported_backup(const QTable& q, const TabularMdp& mdp, double eps);

struct FixedPointOptions {
  // Iteration stops once the guaranteed sup-norm distance to the fixed
  // point, gamma / (1 - gamma) * ||Q_{k+1} - Q_k||, is at most this.
  double tolerance = 1e-10;
  std::size_t max_iterations = 1'000'000;
};

struct FixedPoint {
  QTable q;
  std::size_t iterations = 0;
};

FixedPoint optimal_q(const TabularMdp& mdp, const FixedPointOptions& options = {});
FixedPoint supported_optimal_q(const TabularMdp& mdp, double eps,
                               const FixedPointOptions& options = {});

struct GapReport {
  double gap = 0.0;    // ||Q* - Q*_eps||
  double alpha = 0.0;  // ||T Q* - T_eps Q*||
  double bound = 0.0;  // alpha / (1 - gamma)
};

GapReport suboptimality_gap(const TabularMdp& mdp, double eps,
                            const FixedPointOptions& options = {});

// Greedy over supported actions on Q*_eps; ties go to the lowest index.
std::vector<std::size_t> supported_optimal_policy(
    const TabularMdp& mdp, double eps, const FixedPointOptions& options = {});

// Dirichlet(1) transition and behavior rows, rewards uniform on [0, 1].
TabularMdp random_mdp(std::size_t num_states, std::size_t num_actions,
                      double gamma, std::uint64_t seed);

}  // namespace spot::tabular
