#pragma once

#include "metaadapt/envs/task.hpp"

#include <Eigen/Dense>

#include <array>
#include <span>

namespace metaadapt::envs {

// Planar kinematic crawler. Velocity responds directly to the actuator
// vector through a fixed mixing matrix; a designated actuator pair loses
// effectiveness over the episodes of a chain. Reward is forward progress
// along the target direction minus a quadratic control cost.
struct CrawlerConfig {
  int n_actuators = 6;
  int episodes_per_chain = 7;
  int horizon = 40;
  double control_cost = 0.05;
  Eigen::Vector2d target{1.0, 0.0};
  uint64_t mixing_seed = 7;
  // Test hook: mixing becomes [I2 | 0], so the first two actuators drive the
  // two velocity components directly.
  bool identity_mixing = false;
};

// Linear decay from 1 at the first episode to 0 at the last. Errors outside
// [0, total) or for degenerate chain lengths.
double effectiveness(int episode_index, int total);

// 2 x n mixing with orthonormal rows, a deterministic function of the seed.
Eigen::MatrixXd crawler_mixing(const CrawlerConfig& cfg);

class CrawlerTask : public Task {
 public:
  CrawlerTask(const CrawlerConfig& cfg, std::array<int, 2> weak_pair,
              int episode_index);

  int obs_dim() const override { return 2 + cfg_.n_actuators; }
  int act_dim() const override { return cfg_.n_actuators; }
  int max_steps() const override { return cfg_.horizon; }
  Vec reset(Rng& rng) override;
  Step step(const Vec& action) override;
  std::string id() const override;

  double task_effectiveness() const { return effectiveness_; }

 private:
  CrawlerConfig cfg_;
  std::array<int, 2> weak_pair_;
  int episode_index_;
  double effectiveness_;
  Eigen::MatrixXd mixing_;
  Vec mask_;
  Eigen::Vector2d position_{0, 0};
  Eigen::Vector2d velocity_{0, 0};
  Vec last_action_;
  int t_ = 0;
};

}  // namespace metaadapt::envs
