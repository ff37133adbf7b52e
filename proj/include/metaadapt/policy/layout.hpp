#pragma once

#include <string>
#include <vector>

namespace metaadapt::policy {

struct PolicySpec {
  int obs_dim = 0;
  int act_dim = 0;
  std::vector<int> hidden{64, 64};
};

// One named contiguous segment of a flat parameter vector. Matrices are
// stored row-major; rows == 0 marks plain vectors (biases, log_std).
struct ParamBlock {
  std::string name;
  int offset = 0;
  int size = 0;
  int rows = 0;
  int cols = 0;
  int group = 0;  // 0 = policy parameters, 1 = value-function parameters
};

// Flat layout of a tanh MLP with a linear output layer, optionally followed
// by a state-independent log standard deviation vector.
struct MlpLayout {
  std::vector<int> widths;  // input, hidden..., output
  bool has_log_std = false;
  std::vector<ParamBlock> blocks;
  int total = 0;

  static MlpLayout make(int in, const std::vector<int>& hidden, int out,
                        bool log_std, int group, const std::string& prefix);

  const ParamBlock& log_std_block() const;
};

// Policy and value parameters live in one flat vector, policy first. The two
// networks share no parameters; the value function is its own MLP with a
// scalar head.
struct AgentLayout {
  PolicySpec spec;
  MlpLayout policy;
  MlpLayout value;

  static AgentLayout make(const PolicySpec& s);

  int total() const { return policy.total + value.total; }
  // Blocks of both networks with offsets into the combined vector.
  std::vector<ParamBlock> combined_blocks() const;
};

}  // namespace metaadapt::policy
