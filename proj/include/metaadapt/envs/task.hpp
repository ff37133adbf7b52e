#pragma once

#include "metaadapt/common/rng.hpp"
#include "metaadapt/common/trajectory.hpp"

#include <memory>
#include <string>
#include <vector>

namespace metaadapt::envs {

// Episodic single-agent view of an environment. Two-agent environments are
// exposed through adapters that embed the opponent. Deterministic given the
// rng handed to reset and the action stream.
class Task {
 public:
  virtual ~Task() = default;

  virtual int obs_dim() const = 0;
  virtual int act_dim() const = 0;
  virtual int max_steps() const = 0;

  virtual Vec reset(Rng& rng) = 0;

  struct Step {
    Vec obs;
    double reward = 0.0;
    bool done = false;
    int outcome = 0;  // +1 win, -1 loss, 0 otherwise; valid when done
  };
  virtual Step step(const Vec& action) = 0;

  virtual std::string id() const = 0;
};

using TaskPtr = std::shared_ptr<Task>;

// Ordered sequence of related tasks an agent faces one after another.
struct TaskChain {
  std::string provenance;
  std::vector<TaskPtr> tasks;
};

}  // namespace metaadapt::envs
