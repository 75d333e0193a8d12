#include "spot/envs/pointmaze.hpp"

#include <algorithm>
#include <cmath>

namespace spot::envs {

namespace maze {

bool blocked(Point p) {
  if (p.x < 0.0 || p.x > kArenaSize || p.y < 0.0 || p.y > kArenaSize) {
    return true;
  }
  return p.x <= 2.0 && p.y >= 1.0 && p.y <= 2.0;
}

bool in_goal(Point p) {
  return std::hypot(p.x - kGoal.x, p.y - kGoal.y) <= kGoalRadius;
}

bool in_start_region(Point p) {
  return std::hypot(p.x - kStart.x, p.y - kStart.y) <= kGoalRadius;
}

int corridor_index(Point p) {
  const int cx = std::clamp(static_cast<int>(std::floor(p.x)), 0, 2);
  const int cy = std::clamp(static_cast<int>(std::floor(p.y)), 0, 2);
  if (cy == 0) return cx;
  if (cy == 1) return 3;
  return 6 - cx;
}

}  // namespace maze

MazeStep pointmaze_step(Point state, std::span<const double> action) {
  Point p = state;
  const Point try_x{p.x + maze::kStepSize * action[0], p.y};
  if (!maze::blocked(try_x)) p = try_x;
  const Point try_y{p.x, p.y + maze::kStepSize * action[1]};
  if (!maze::blocked(try_y)) p = try_y;
  MazeStep out;
  out.next = p;
  out.done = maze::in_goal(p);
  out.reward = out.done ? 1.0 : 0.0;
  return out;
}

EnvSpec pointmaze_spec() {
  EnvSpec spec;
  spec.name = "pointmaze";
  spec.state_dim = 2;
  spec.action_dim = 2;
  spec.action_low = {-1.0, -1.0};
  spec.action_high = {1.0, 1.0};
  spec.max_episode_steps = maze::kMaxEpisodeSteps;
  spec.reward_kind = RewardKind::kSparse;
  return spec;
}

std::unique_ptr<Env> PointMaze::clone() const {
  return std::make_unique<PointMaze>(*this);
}

std::vector<double> PointMaze::sample_initial_state(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> jitter(-maze::kStartJitter,
                                                maze::kStartJitter);
  const double x = maze::kStart.x + jitter(rng);
  const double y = maze::kStart.y + jitter(rng);
  return {x, y};
}

StepResult PointMaze::transition(std::span<const double> state,
                                 std::span<const double> action) const {
  const MazeStep s = pointmaze_step(Point{state[0], state[1]}, action);
  StepResult r;
  r.next_state = {s.next.x, s.next.y};
  r.reward = s.reward;
  r.terminal = s.done;
  return r;
}

bool MazeWaypointController::at_target(Point p, double tolerance) const {
  return std::hypot(p.x - target_.x, p.y - target_.y) <= tolerance;
}

std::vector<double> MazeWaypointController::act(
    std::span<const double> observation) {
  const Point p{observation[0], observation[1]};
  const int here = maze::corridor_index(p);
  const int there = maze::corridor_index(target_);
  Point aim = target_;
  if (here != there) {
    aim = maze::kCorridor[here + (there > here ? 1 : -1)];
  }
  const double gain = 1.0 / maze::kStepSize;
  return {std::clamp(gain * (aim.x - p.x), -1.0, 1.0),
          std::clamp(gain * (aim.y - p.y), -1.0, 1.0)};
}

}  // namespace spot::envs
