#pragma once

#include <array>
#include <span>

#include "spot/envs/env.hpp"

// U-shaped point maze: a 3 x 3 arena whose left two thirds of the middle row
// is a wall. The agent starts bottom-left and must reach the goal top-left by
// going around through the right column.
namespace spot::envs {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

namespace maze {

inline constexpr double kArenaSize = 3.0;
inline constexpr double kStepSize = 0.2;
inline constexpr double kGoalRadius = 0.5;
inline constexpr int kMaxEpisodeSteps = 150;
inline constexpr Point kStart{0.5, 0.5};
inline constexpr Point kGoal{0.5, 2.5};
inline constexpr double kStartJitter = 0.1;

// Corridor cells along the U from start (0) to goal (6).
inline constexpr std::array<Point, 7> kCorridor{{{0.5, 0.5},
                                                 {1.5, 0.5},
                                                 {2.5, 0.5},
                                                 {2.5, 1.5},
                                                 {2.5, 2.5},
                                                 {1.5, 2.5},
                                                 {0.5, 2.5}}};

bool blocked(Point p);
bool in_goal(Point p);
bool in_start_region(Point p);
// Index into kCorridor of the cell containing p (p must be free space).
int corridor_index(Point p);

}  // namespace maze

struct MazeStep {
  Point next;
  double reward = 0.0;
  bool done = false;
};

// One noise-free maze transition. Axis-wise sliding: x moves first, then y;
// a component whose move would enter a wall or leave the arena is dropped.
MazeStep pointmaze_step(Point state, std::span<const double> action);

EnvSpec pointmaze_spec();

class PointMaze final : public Env {
 public:
  PointMaze() : Env(pointmaze_spec()) {}
  std::unique_ptr<Env> clone() const override;

 protected:
  std::vector<double> sample_initial_state(std::mt19937_64& rng) const override;
  StepResult transition(std::span<const double> state,
                        std::span<const double> action) const override;
};

// Follows corridor cells toward a target point, heading for the centre of
// the next cell until it reaches the target's cell.
class MazeWaypointController final : public Controller {
 public:
  explicit MazeWaypointController(Point target = maze::kGoal) : target_(target) {}
  void set_target(Point target) { target_ = target; }
  std::vector<double> act(std::span<const double> observation) override;
  bool at_target(Point p, double tolerance = 0.1) const;

 private:
  Point target_;
};

}  // namespace spot::envs
