#include "metaadapt/policy/policy.hpp"

#include <cmath>

namespace metaadapt::policy {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

using RowMat = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic,
                                              Eigen::Dynamic, Eigen::RowMajor>>;

double gaussian_log_density_value(const Vec& x, const Vec& mean,
                                  const Vec& log_std) {
  const Vec z = (x - mean).cwiseProduct((-log_std.array()).exp().matrix());
  return -0.5 * z.squaredNorm() - log_std.sum() -
         0.5 * static_cast<double>(x.size()) * kLog2Pi;
}

}  // namespace

ParamNodes make_param_leaves(Graph& g, const MlpLayout& layout,
                             const std::string& prefix) {
  ParamNodes nodes;
  nodes.blocks.reserve(layout.blocks.size());
  for (const ParamBlock& b : layout.blocks)
    nodes.blocks.push_back(g.leaf(prefix + b.name, b.size));
  return nodes;
}

void bind_params(const MlpLayout& layout, const ParamNodes& nodes,
                 const Vec& flat, Bindings& b) {
  for (size_t i = 0; i < layout.blocks.size(); ++i) {
    const ParamBlock& blk = layout.blocks[i];
    b.set(nodes.blocks[i], flat.segment(blk.offset, blk.size));
  }
}

Vec mlp_forward(const MlpLayout& layout, const Vec& params, const Vec& input) {
  Vec h = input;
  const size_t n_layers = layout.widths.size() - 1;
  for (size_t i = 0; i < n_layers; ++i) {
    const ParamBlock& w = layout.blocks[2 * i];
    const ParamBlock& b = layout.blocks[2 * i + 1];
    Vec z = RowMat(params.data() + w.offset, w.rows, w.cols) * h +
            params.segment(b.offset, b.size);
    h = (i + 1 < n_layers) ? Vec(z.array().tanh()) : z;
  }
  return h;
}

NodeRef mlp_graph(Graph& g, const MlpLayout& layout, const ParamNodes& nodes,
                  NodeRef input) {
  NodeRef h = input;
  const size_t n_layers = layout.widths.size() - 1;
  for (size_t i = 0; i < n_layers; ++i) {
    const ParamBlock& w = layout.blocks[2 * i];
    NodeRef z = g.add(g.matvec(nodes.blocks[2 * i], w.rows, w.cols, h),
                      nodes.blocks[2 * i + 1]);
    h = (i + 1 < n_layers) ? g.tanh(z) : z;
  }
  return h;
}

Vec init_mlp_params(const MlpLayout& layout, Rng& rng, double out_scale,
                    double log_std_init) {
  Vec params = Vec::Zero(layout.total);
  const size_t n_layers = layout.widths.size() - 1;
  for (size_t i = 0; i < n_layers; ++i) {
    const ParamBlock& w = layout.blocks[2 * i];
    const double scale =
        (i + 1 == n_layers ? out_scale : 1.0) / std::sqrt(double(w.cols));
    for (int k = 0; k < w.size; ++k)
      params[w.offset + k] = scale * rng.normal();
  }
  if (layout.has_log_std) {
    const ParamBlock& s = layout.log_std_block();
    params.segment(s.offset, s.size).setConstant(log_std_init);
  }
  return params;
}

Vec policy_mean(const MlpLayout& layout, const Vec& params, const Vec& obs) {
  return mlp_forward(layout, params, obs);
}

ActResult policy_act(const MlpLayout& layout, const Vec& params,
                     const Vec& obs, Rng& rng) {
  const ParamBlock& s = layout.log_std_block();
  const Vec log_std = params.segment(s.offset, s.size);
  const Vec mean = mlp_forward(layout, params, obs);
  Vec action(mean.size());
  for (int i = 0; i < mean.size(); ++i)
    action[i] = mean[i] + std::exp(log_std[i]) * rng.normal();
  return {action, gaussian_log_density_value(action, mean, log_std)};
}

double policy_log_prob(const MlpLayout& layout, const Vec& params,
                       const Vec& obs, const Vec& action) {
  const ParamBlock& s = layout.log_std_block();
  return gaussian_log_density_value(action,
                                    mlp_forward(layout, params, obs),
                                    params.segment(s.offset, s.size));
}

double trajectory_log_prob(const MlpLayout& layout, const Vec& params,
                           const Trajectory& traj) {
  double sum = 0.0;
  for (int t = 0; t < traj.length(); ++t)
    sum += policy_log_prob(layout, params, traj.obs[t], traj.actions[t]);
  return sum;
}

NodeRef trajectory_log_prob_graph(Graph& g, const MlpLayout& layout,
                                  const ParamNodes& nodes,
                                  const Trajectory& traj) {
  if (traj.length() == 0)
    throw diffcore::GraphError("trajectory_log_prob_graph: empty episode");
  NodeRef log_std = nodes.blocks[layout.blocks.size() - 1];
  NodeRef total;
  for (int t = 0; t < traj.length(); ++t) {
    NodeRef mean = mlp_graph(g, layout, nodes, g.constant(traj.obs[t]));
    NodeRef lp =
        g.gaussian_log_density(g.constant(traj.actions[t]), mean, log_std);
    total = total.valid() ? g.add(total, lp) : lp;
  }
  return total;
}

double gaussian_entropy(const Vec& log_std) {
  return 0.5 * static_cast<double>(log_std.size()) * (1.0 + kLog2Pi) +
         log_std.sum();
}

double value_forward(const MlpLayout& layout, const Vec& params,
                     const Vec& obs) {
  return mlp_forward(layout, params, obs)[0];
}

}  // namespace metaadapt::policy
