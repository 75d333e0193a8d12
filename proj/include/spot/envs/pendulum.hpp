#pragma once

#include <span>

#include "spot/envs/env.hpp"

// Torque-limited rigid pendulum, observation (cos theta, sin theta,
// theta_dot) with theta = 0 upright.
namespace spot::envs {

namespace pendulum {

inline constexpr double kDt = 0.05;
inline constexpr double kGravity = 10.0;
inline constexpr double kMass = 1.0;
inline constexpr double kLength = 1.0;
inline constexpr double kMaxSpeed = 8.0;
inline constexpr double kMaxTorque = 2.0;
inline constexpr int kHorizon = 200;

double wrap_angle(double theta);

}  // namespace pendulum

struct PendulumStep {
  double theta = 0.0;
  double theta_dot = 0.0;
  double reward = 0.0;
};

// Semi-implicit Euler step; the reward scores the pre-step state and torque.
PendulumStep pendulum_step(double theta, double theta_dot, double torque);

EnvSpec pendulum_spec();

class Pendulum final : public Env {
 public:
  Pendulum() : Env(pendulum_spec()) {}
  std::unique_ptr<Env> clone() const override;

  static std::vector<double> observe(double theta, double theta_dot);

 protected:
  std::vector<double> sample_initial_state(std::mt19937_64& rng) const override;
  StepResult transition(std::span<const double> state,
                        std::span<const double> action) const override;
};

// Energy pumping far from upright, PD stabilisation near it.
class PendulumSwingUpController final : public Controller {
 public:
  std::vector<double> act(std::span<const double> observation) override;
};

}  // namespace spot::envs
