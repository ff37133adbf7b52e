#pragma once

#include "metaadapt/common/rng.hpp"

#include <Eigen/Dense>

#include <array>

namespace metaadapt::envs {

using Eigen::Vector2d;
using Vec = Eigen::VectorXd;

struct DiskBody {
  double mass = 1.0;
  double force_scale = 1.0;
  double damping = 0.92;  // per-step velocity retention, < 1 contracts
};

// Two point-mass disks in a circular ring. Both act with planar forces; a
// disk whose center leaves the ring loses. Episodes that hit the step cap
// (or where both leave at once) are draws.
struct SumoConfig {
  double ring_radius = 1.0;
  double agent_radius = 0.15;
  double dt = 0.1;
  int episode_length = 500;
  double restitution = 0.1;
  double spawn_distance = 0.45;
  double spawn_jitter = 0.05;
  double obs_force_clip = 100.0;
  // Per-step shaping coefficients and terminal rewards.
  double c_center = 1e-3;
  double c_toward = 1e-3;
  double c_hit = 1e-4;
  double c_ctrl = 1e-3;
  double win_reward = 2000.0;
  double loss_reward = -2000.0;
  double draw_reward = -1000.0;
  std::array<DiskBody, 2> bodies{};
};

struct SumoState {
  std::array<Vector2d, 2> pos;
  std::array<Vector2d, 2> vel;
  // Momentum transferred to each agent in the latest step's contact.
  std::array<Vector2d, 2> impulse;
  int t = 0;
  bool done = false;
  std::array<int, 2> outcome{0, 0};  // +1 win, -1 loss, 0 draw/none
};

SumoState sumo_reset(const SumoConfig& cfg, Rng& rng);

struct SumoStepResult {
  std::array<double, 2> reward{0.0, 0.0};
  bool done = false;
  std::array<int, 2> outcome{0, 0};
};

SumoStepResult sumo_step(SumoState& s, const Vec& action0, const Vec& action1,
                         const SumoConfig& cfg);

constexpr int kSumoObsDim = 10;
constexpr int kSumoActDim = 2;

// Own position and velocity, opponent position, squared-and-clipped contact
// impulses (received and exerted). Opponent velocity is deliberately absent.
Vec sumo_observation(const SumoState& s, int agent, const SumoConfig& cfg);

// Scripted pursuit controller with exploration noise. Identical on both
// sides it makes outcomes reflect body parameters alone, which is what
// calibration needs; the noise keeps the clinched pair drifting so episodes
// actually resolve instead of deadlocking at the center.
Vec sumo_charger_action(const SumoState& s, int agent, Rng& rng,
                        double noise = 0.7, double kp = 1.0, double kd = 0.3);

}  // namespace metaadapt::envs
