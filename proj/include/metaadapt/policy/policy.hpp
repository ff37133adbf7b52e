#pragma once

#include "metaadapt/common/rng.hpp"
#include "metaadapt/common/trajectory.hpp"
#include "metaadapt/diffcore/graph.hpp"
#include "metaadapt/policy/layout.hpp"

namespace metaadapt::policy {

using diffcore::Bindings;
using diffcore::Graph;
using diffcore::NodeRef;

// Parameter blocks of one MLP as graph nodes, aligned with layout.blocks.
// The nodes may be leaves (plain parameters) or derived expressions (adapted
// parameters); the forward builders do not care which.
struct ParamNodes {
  std::vector<NodeRef> blocks;
};

ParamNodes make_param_leaves(Graph& g, const MlpLayout& layout,
                             const std::string& prefix);
void bind_params(const MlpLayout& layout, const ParamNodes& nodes,
                 const Vec& flat, Bindings& b);

// Deterministic tanh MLP forward pass; log_std (if present) is not part of
// the returned head.
Vec mlp_forward(const MlpLayout& layout, const Vec& params, const Vec& input);
NodeRef mlp_graph(Graph& g, const MlpLayout& layout, const ParamNodes& nodes,
                  NodeRef input);

Vec init_mlp_params(const MlpLayout& layout, Rng& rng,
                    double out_scale = 0.01, double log_std_init = -0.5);

// Diagonal Gaussian head over the MLP mean with state-independent log_std.
struct ActResult {
  Vec action;
  double log_prob = 0.0;
};
ActResult policy_act(const MlpLayout& layout, const Vec& params,
                     const Vec& obs, Rng& rng);
Vec policy_mean(const MlpLayout& layout, const Vec& params, const Vec& obs);
double policy_log_prob(const MlpLayout& layout, const Vec& params,
                       const Vec& obs, const Vec& action);
// Sum of per-step action log densities along a whole episode.
double trajectory_log_prob(const MlpLayout& layout, const Vec& params,
                           const Trajectory& traj);
// Same quantity as a differentiable expression; errors on empty episodes.
NodeRef trajectory_log_prob_graph(Graph& g, const MlpLayout& layout,
                                  const ParamNodes& nodes,
                                  const Trajectory& traj);

// Closed-form entropy of the Gaussian head.
double gaussian_entropy(const Vec& log_std);

// Scalar value head evaluated on one observation.
double value_forward(const MlpLayout& layout, const Vec& params,
                     const Vec& obs);

}  // namespace metaadapt::policy
