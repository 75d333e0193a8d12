#include "spot/envs/pendulum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace spot::envs {

namespace pendulum {

double wrap_angle(double theta) {
  const double two_pi = 2.0 * std::numbers::pi;
  double wrapped = std::fmod(theta + std::numbers::pi, two_pi);
  if (wrapped < 0.0) wrapped += two_pi;
  return wrapped - std::numbers::pi;
}

}  // namespace pendulum

PendulumStep pendulum_step(double theta, double theta_dot, double torque) {
  using namespace pendulum;
  const double u = std::clamp(torque, -kMaxTorque, kMaxTorque);
  const double th = wrap_angle(theta);
  PendulumStep out;
  out.reward = -(th * th + 0.1 * theta_dot * theta_dot + 0.001 * u * u);
  const double accel = 3.0 * kGravity / (2.0 * kLength) * std::sin(theta) +
                       3.0 / (kMass * kLength * kLength) * u;
  out.theta_dot = std::clamp(theta_dot + accel * kDt, -kMaxSpeed, kMaxSpeed);
  out.theta = theta + out.theta_dot * kDt;
  return out;
}

EnvSpec pendulum_spec() {
  EnvSpec spec;
  spec.name = "pendulum";
  spec.state_dim = 3;
  spec.action_dim = 1;
  spec.action_low = {-pendulum::kMaxTorque};
  spec.action_high = {pendulum::kMaxTorque};
  spec.max_episode_steps = pendulum::kHorizon;
  spec.reward_kind = RewardKind::kDense;
  return spec;
}

std::vector<double> Pendulum::observe(double theta, double theta_dot) {
  return {std::cos(theta), std::sin(theta), theta_dot};
}

std::unique_ptr<Env> Pendulum::clone() const {
  return std::make_unique<Pendulum>(*this);
}

std::vector<double> Pendulum::sample_initial_state(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> angle(-std::numbers::pi,
                                               std::numbers::pi);
  std::uniform_real_distribution<double> speed(-1.0, 1.0);
  const double theta = angle(rng);
  const double theta_dot = speed(rng);
  return observe(theta, theta_dot);
}

StepResult Pendulum::transition(std::span<const double> state,
                                std::span<const double> action) const {
  const double theta = std::atan2(state[1], state[0]);
  const PendulumStep s = pendulum_step(theta, state[2], action[0]);
  StepResult r;
  r.next_state = observe(s.theta, s.theta_dot);
  r.reward = s.reward;
  return r;
}

std::vector<double> PendulumSwingUpController::act(
    std::span<const double> observation) {
  using namespace pendulum;
  const double theta = std::atan2(observation[1], observation[0]);
  const double theta_dot = observation[2];
  // Dynamics are theta_ddot = 15 sin(theta) + 3 u, so E = 0.5 w^2 + 15 cos
  // is conserved at u = 0 and equals 15 upright at rest.
  const double energy = 0.5 * theta_dot * theta_dot + 15.0 * std::cos(theta);
  double u = 0.0;
  if (std::cos(theta) > std::cos(0.6) && std::abs(theta_dot) < 4.0) {
    u = -(10.0 * theta + 2.0 * theta_dot);
  } else {
    u = 0.5 * (15.0 - energy) * theta_dot;
    if (std::abs(theta_dot) < 1e-3) u = kMaxTorque;
  }
  return {std::clamp(u, -kMaxTorque, kMaxTorque)};
}

}  // namespace spot::envs
