#pragma once

#include <Eigen/Core>

#include <vector>

namespace metaadapt {

using Vec = Eigen::VectorXd;

// One episode of interaction. `obs` holds the observations exactly as the
// policy consumed them (normalized), `raw_obs` what the environment emitted;
// `log_probs` are per-step action log densities under the generating policy,
// recorded at sampling time so later importance ratios need no replay.
struct Trajectory {
  std::vector<Vec> raw_obs;
  std::vector<Vec> obs;
  std::vector<Vec> actions;
  std::vector<double> rewards;
  std::vector<double> log_probs;
  bool terminated = false;  // the environment ended the episode itself
  int outcome = 0;          // +1 win, -1 loss, 0 otherwise (two-agent tasks)

  int length() const { return static_cast<int>(actions.size()); }

  double total_reward() const {
    double s = 0.0;
    for (double r : rewards) s += r;
    return s;
  }

  double discounted_return(double gamma) const {
    double s = 0.0, g = 1.0;
    for (double r : rewards) {
      s += g * r;
      g *= gamma;
    }
    return s;
  }

  double log_prob_sum() const {
    double s = 0.0;
    for (double lp : log_probs) s += lp;
    return s;
  }
};

}  // namespace metaadapt
