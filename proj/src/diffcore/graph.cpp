#include "metaadapt/diffcore/graph.hpp"

#include <cmath>

namespace metaadapt::diffcore {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

int broadcast_dim(int da, int db, const char* what) {
  if (da == db) return da;
  if (da == 1) return db;
  if (db == 1) return da;
  throw GraphError(std::string(what) + ": incompatible dimensions " +
                   std::to_string(da) + " vs " + std::to_string(db));
}

// Maps a broadcast operand's value to the output width.
Vec widen(const Vec& v, int dim) {
  if (v.size() == dim) return v;
  return Vec::Constant(dim, v[0]);
}

using RowMat = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic,
                                              Eigen::Dynamic, Eigen::RowMajor>>;

RowMat as_matrix(const Vec& flat, int rows, int cols) {
  return RowMat(flat.data(), rows, cols);
}

}  // namespace

void Bindings::set(NodeRef leaf, Vec v) {
  if (!leaf.valid()) throw GraphError("Bindings::set: invalid node");
  if (leaf.graph->node(leaf.id).op != Op::kLeaf)
    throw GraphError("Bindings::set: node is not a leaf");
  if (v.size() != leaf.graph->node(leaf.id).dim)
    throw GraphError("Bindings::set: value size does not match leaf '" +
                     leaf.graph->node(leaf.id).name + "'");
  values_[leaf.id] = std::move(v);
}

const Vec* Bindings::find(int32_t leaf_id) const {
  auto it = values_.find(leaf_id);
  return it == values_.end() ? nullptr : &it->second;
}

int32_t Graph::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<int32_t>(nodes_.size()) - 1;
}

void Graph::check_mine(NodeRef r, const char* what) const {
  if (!r.valid() || r.graph != this || r.id >= size())
    throw GraphError(std::string(what) + ": node does not belong to this graph");
}

NodeRef Graph::leaf(std::string name, int dim) {
  if (dim <= 0) throw GraphError("leaf: dimension must be positive");
  Node n;
  n.op = Op::kLeaf;
  n.dim = dim;
  n.name = std::move(name);
  return ref(push(std::move(n)));
}

NodeRef Graph::constant(Vec v) {
  if (v.size() == 0) throw GraphError("constant: empty value");
  Node n;
  n.op = Op::kConst;
  n.dim = static_cast<int32_t>(v.size());
  n.value = std::move(v);
  return ref(push(std::move(n)));
}

NodeRef Graph::constant(double x) { return constant(Vec::Constant(1, x)); }

NodeRef Graph::add(NodeRef a, NodeRef b) {
  check_mine(a, "add");
  check_mine(b, "add");
  Node n;
  n.op = Op::kAdd;
  n.dim = broadcast_dim(node(a.id).dim, node(b.id).dim, "add");
  n.a = a.id;
  n.b = b.id;
  return ref(push(std::move(n)));
}

NodeRef Graph::mul(NodeRef a, NodeRef b) {
  check_mine(a, "mul");
  check_mine(b, "mul");
  Node n;
  n.op = Op::kMul;
  n.dim = broadcast_dim(node(a.id).dim, node(b.id).dim, "mul");
  n.a = a.id;
  n.b = b.id;
  return ref(push(std::move(n)));
}

NodeRef Graph::matvec(NodeRef m, int rows, int cols, NodeRef x) {
  check_mine(m, "matvec");
  check_mine(x, "matvec");
  if (node(m.id).dim != rows * cols)
    throw GraphError("matvec: matrix node size != rows*cols");
  if (node(x.id).dim != cols) throw GraphError("matvec: vector size != cols");
  Node n;
  n.op = Op::kMatVec;
  n.dim = rows;
  n.a = m.id;
  n.b = x.id;
  n.rows = rows;
  n.cols = cols;
  return ref(push(std::move(n)));
}

NodeRef Graph::mat_t_vec(NodeRef m, int rows, int cols, NodeRef u) {
  check_mine(m, "mat_t_vec");
  check_mine(u, "mat_t_vec");
  if (node(m.id).dim != rows * cols)
    throw GraphError("mat_t_vec: matrix node size != rows*cols");
  if (node(u.id).dim != rows) throw GraphError("mat_t_vec: vector size != rows");
  Node n;
  n.op = Op::kMatTVec;
  n.dim = cols;
  n.a = m.id;
  n.b = u.id;
  n.rows = rows;
  n.cols = cols;
  return ref(push(std::move(n)));
}

NodeRef Graph::outer(NodeRef u, NodeRef v) {
  check_mine(u, "outer");
  check_mine(v, "outer");
  Node n;
  n.op = Op::kOuter;
  n.rows = node(u.id).dim;
  n.cols = node(v.id).dim;
  n.dim = n.rows * n.cols;
  n.a = u.id;
  n.b = v.id;
  return ref(push(std::move(n)));
}

NodeRef Graph::tanh(NodeRef x) {
  check_mine(x, "tanh");
  Node n;
  n.op = Op::kTanh;
  n.dim = node(x.id).dim;
  n.a = x.id;
  return ref(push(std::move(n)));
}

NodeRef Graph::exp(NodeRef x) {
  check_mine(x, "exp");
  Node n;
  n.op = Op::kExp;
  n.dim = node(x.id).dim;
  n.a = x.id;
  return ref(push(std::move(n)));
}

NodeRef Graph::log(NodeRef x) {
  check_mine(x, "log");
  Node n;
  n.op = Op::kLog;
  n.dim = node(x.id).dim;
  n.a = x.id;
  return ref(push(std::move(n)));
}

NodeRef Graph::sum(NodeRef x) {
  check_mine(x, "sum");
  Node n;
  n.op = Op::kSum;
  n.dim = 1;
  n.a = x.id;
  return ref(push(std::move(n)));
}

NodeRef Graph::clip(NodeRef x, double lo, double hi) {
  check_mine(x, "clip");
  if (!(lo < hi)) throw GraphError("clip: requires lo < hi");
  Node n;
  n.op = Op::kClip;
  n.dim = node(x.id).dim;
  n.a = x.id;
  n.lo = lo;
  n.hi = hi;
  return ref(push(std::move(n)));
}

NodeRef Graph::neg(NodeRef x) { return scale(-1.0, x); }

NodeRef Graph::sub(NodeRef a, NodeRef b) { return add(a, neg(b)); }

NodeRef Graph::scale(double s, NodeRef x) { return mul(constant(s), x); }

NodeRef Graph::dot(NodeRef a, NodeRef b) { return sum(mul(a, b)); }

NodeRef Graph::mean(NodeRef x) {
  check_mine(x, "mean");
  return scale(1.0 / node(x.id).dim, sum(x));
}

NodeRef Graph::minimum(NodeRef a, NodeRef b) {
  check_mine(a, "minimum");
  check_mine(b, "minimum");
  if (node(a.id).dim != node(b.id).dim)
    throw GraphError("minimum: dimensions differ");
  Node m;
  m.op = Op::kLeMask;
  m.dim = node(a.id).dim;
  m.a = a.id;
  m.b = b.id;
  NodeRef mask = ref(push(std::move(m)));
  NodeRef ones = constant(Vec::Ones(node(a.id).dim));
  // a*mask + b*(1-mask)
  return add(mul(mask, a), mul(sub(ones, mask), b));
}

NodeRef Graph::gaussian_log_density(NodeRef x, NodeRef m, NodeRef log_std) {
  check_mine(x, "gaussian_log_density");
  check_mine(m, "gaussian_log_density");
  check_mine(log_std, "gaussian_log_density");
  const int d = node(x.id).dim;
  if (node(m.id).dim != d || node(log_std.id).dim != d)
    throw GraphError("gaussian_log_density: dimensions differ");
  NodeRef diff = sub(x, m);
  NodeRef inv_var = exp(scale(-2.0, log_std));
  NodeRef quad = sum(mul(mul(diff, diff), inv_var));
  NodeRef log_det = sum(log_std);
  NodeRef c = constant(-0.5 * d * kLog2Pi);
  return add(c, add(neg(log_det), scale(-0.5, quad)));
}

std::vector<uint8_t> Graph::mark_ancestors(
    std::span<const int32_t> roots) const {
  std::vector<uint8_t> needed(nodes_.size(), 0);
  std::vector<int32_t> stack(roots.begin(), roots.end());
  while (!stack.empty()) {
    int32_t id = stack.back();
    stack.pop_back();
    if (needed[id]) continue;
    needed[id] = 1;
    const Node& n = nodes_[id];
    if (n.a >= 0 && !needed[n.a]) stack.push_back(n.a);
    if (n.b >= 0 && !needed[n.b]) stack.push_back(n.b);
  }
  return needed;
}

void Graph::forward_values(const std::vector<uint8_t>& needed,
                           const Bindings& b, std::vector<Vec>& vals) const {
  vals.assign(nodes_.size(), Vec());
  for (int32_t id = 0; id < size(); ++id) {
    if (!needed[id]) continue;
    const Node& n = nodes_[id];
    switch (n.op) {
      case Op::kLeaf: {
        const Vec* v = b.find(id);
        if (!v)
          throw GraphError("evaluate: leaf '" + n.name + "' is not bound");
        vals[id] = *v;
        break;
      }
      case Op::kConst:
        vals[id] = n.value;
        break;
      case Op::kAdd:
        vals[id] = widen(vals[n.a], n.dim) + widen(vals[n.b], n.dim);
        break;
      case Op::kMul:
        vals[id] = widen(vals[n.a], n.dim).cwiseProduct(widen(vals[n.b], n.dim));
        break;
      case Op::kMatVec:
        vals[id] = as_matrix(vals[n.a], n.rows, n.cols) * vals[n.b];
        break;
      case Op::kMatTVec:
        vals[id] = as_matrix(vals[n.a], n.rows, n.cols).transpose() * vals[n.b];
        break;
      case Op::kOuter: {
        Vec out(n.dim);
        const Vec& u = vals[n.a];
        const Vec& v = vals[n.b];
        for (int i = 0; i < n.rows; ++i)
          out.segment(static_cast<Eigen::Index>(i) * n.cols, n.cols) =
              u[i] * v;
        vals[id] = std::move(out);
        break;
      }
      case Op::kTanh:
        vals[id] = vals[n.a].array().tanh();
        break;
      case Op::kExp:
        vals[id] = vals[n.a].array().exp();
        break;
      case Op::kLog:
        vals[id] = vals[n.a].array().log();
        break;
      case Op::kSum:
        vals[id] = Vec::Constant(1, vals[n.a].sum());
        break;
      case Op::kClip:
        vals[id] = clip_vector(vals[n.a], n.lo, n.hi);
        break;
      case Op::kClipMask: {
        const Vec& x = vals[n.a];
        Vec out(n.dim);
        for (int i = 0; i < n.dim; ++i)
          out[i] = (x[i] >= n.lo && x[i] <= n.hi) ? 1.0 : 0.0;
        vals[id] = std::move(out);
        break;
      }
      case Op::kLeMask: {
        const Vec a = widen(vals[n.a], n.dim);
        const Vec bb = widen(vals[n.b], n.dim);
        Vec out(n.dim);
        for (int i = 0; i < n.dim; ++i) out[i] = a[i] <= bb[i] ? 1.0 : 0.0;
        vals[id] = std::move(out);
        break;
      }
    }
  }
}

Vec Graph::evaluate(NodeRef root, const Bindings& b) const {
  check_mine(root, "evaluate");
  int32_t r = root.id;
  auto needed = mark_ancestors(std::span<const int32_t>(&r, 1));
  std::vector<Vec> vals;
  forward_values(needed, b, vals);
  return vals[root.id];
}

std::vector<Vec> Graph::evaluate_many(std::span<const NodeRef> roots,
                                      const Bindings& b) const {
  std::vector<int32_t> ids;
  ids.reserve(roots.size());
  for (NodeRef r : roots) {
    check_mine(r, "evaluate_many");
    ids.push_back(r.id);
  }
  auto needed = mark_ancestors(ids);
  std::vector<Vec> vals;
  forward_values(needed, b, vals);
  std::vector<Vec> out;
  out.reserve(ids.size());
  for (int32_t id : ids) out.push_back(vals[id]);
  return out;
}

std::vector<Vec> Graph::backward(NodeRef root, const Bindings& b,
                                 std::span<const NodeRef> wrt) const {
  check_mine(root, "backward");
  if (node(root.id).dim != 1)
    throw GraphError("backward: root must be scalar");
  for (NodeRef w : wrt) check_mine(w, "backward");

  int32_t r = root.id;
  auto needed = mark_ancestors(std::span<const int32_t>(&r, 1));
  std::vector<Vec> vals;
  forward_values(needed, b, vals);

  std::vector<Vec> adj(nodes_.size());
  adj[root.id] = Vec::Ones(1);

  auto accumulate = [&](int32_t id, const Vec& contrib) {
    if (adj[id].size() == 0)
      adj[id] = contrib;
    else
      adj[id] += contrib;
  };
  // Reduces an output-shaped adjoint onto an operand that may be broadcast.
  auto fit = [&](int32_t operand, const Vec& contrib) -> Vec {
    if (nodes_[operand].dim == contrib.size()) return contrib;
    return Vec::Constant(1, contrib.sum());
  };

  for (int32_t id = root.id; id >= 0; --id) {
    if (!needed[id] || adj[id].size() == 0) continue;
    const Node& n = nodes_[id];
    const Vec& a = adj[id];
    switch (n.op) {
      case Op::kLeaf:
      case Op::kConst:
      case Op::kClipMask:
      case Op::kLeMask:
        break;
      case Op::kAdd:
        accumulate(n.a, fit(n.a, a));
        accumulate(n.b, fit(n.b, a));
        break;
      case Op::kMul:
        accumulate(n.a, fit(n.a, a.cwiseProduct(widen(vals[n.b], n.dim))));
        accumulate(n.b, fit(n.b, a.cwiseProduct(widen(vals[n.a], n.dim))));
        break;
      case Op::kMatVec: {
        Vec ga(n.rows * n.cols);
        const Vec& x = vals[n.b];
        for (int i = 0; i < n.rows; ++i)
          ga.segment(static_cast<Eigen::Index>(i) * n.cols, n.cols) = a[i] * x;
        accumulate(n.a, ga);
        accumulate(n.b, as_matrix(vals[n.a], n.rows, n.cols).transpose() * a);
        break;
      }
      case Op::kMatTVec: {
        Vec ga(n.rows * n.cols);
        const Vec& u = vals[n.b];
        for (int i = 0; i < n.rows; ++i)
          ga.segment(static_cast<Eigen::Index>(i) * n.cols, n.cols) = u[i] * a;
        accumulate(n.a, ga);
        accumulate(n.b, as_matrix(vals[n.a], n.rows, n.cols) * a);
        break;
      }
      case Op::kOuter: {
        Vec gu(n.rows), gv = Vec::Zero(n.cols);
        const Vec& u = vals[n.a];
        const Vec& v = vals[n.b];
        for (int i = 0; i < n.rows; ++i) {
          auto seg = a.segment(static_cast<Eigen::Index>(i) * n.cols, n.cols);
          gu[i] = seg.dot(v);
          gv += u[i] * seg;
        }
        accumulate(n.a, gu);
        accumulate(n.b, gv);
        break;
      }
      case Op::kTanh: {
        const Vec& t = vals[id];
        accumulate(n.a, (a.array() * (1.0 - t.array().square())).matrix());
        break;
      }
      case Op::kExp:
        accumulate(n.a, a.cwiseProduct(vals[id]));
        break;
      case Op::kLog:
        accumulate(n.a, a.cwiseQuotient(vals[n.a]));
        break;
      case Op::kSum:
        accumulate(n.a, Vec::Constant(nodes_[n.a].dim, a[0]));
        break;
      case Op::kClip: {
        const Vec& x = vals[n.a];
        Vec g(n.dim);
        for (int i = 0; i < n.dim; ++i)
          g[i] = (x[i] >= n.lo && x[i] <= n.hi) ? a[i] : 0.0;
        accumulate(n.a, g);
        break;
      }
    }
  }

  std::vector<Vec> out;
  out.reserve(wrt.size());
  for (NodeRef w : wrt) {
    if (adj[w.id].size() == 0)
      out.push_back(Vec::Zero(node(w.id).dim));
    else
      out.push_back(adj[w.id]);
  }
  return out;
}

NodeRef Graph::gradient(NodeRef root, NodeRef wrt) {
  NodeRef w[1] = {wrt};
  return gradient_multi(root, w)[0];
}

std::vector<NodeRef> Graph::gradient_multi(NodeRef root,
                                           std::span<const NodeRef> wrt) {
  check_mine(root, "gradient");
  if (node(root.id).dim != 1)
    throw GraphError("gradient: root must be scalar");
  for (NodeRef w : wrt) check_mine(w, "gradient");

  int32_t r = root.id;
  auto needed = mark_ancestors(std::span<const int32_t>(&r, 1));

  // Adjoint expressions indexed by node id. Only nodes between the root and
  // the requested targets ever get one; identifiers above the root id are
  // nodes appended by this very sweep and never revisited.
  std::vector<NodeRef> adj(root.id + 1);
  adj[root.id] = constant(1.0);

  auto accumulate = [&](int32_t id, NodeRef contrib) {
    if (!adj[id].valid())
      adj[id] = contrib;
    else
      adj[id] = add(adj[id], contrib);
  };
  auto fit = [&](int32_t operand, NodeRef contrib) -> NodeRef {
    if (nodes_[operand].dim == node(contrib.id).dim) return contrib;
    return sum(contrib);
  };

  for (int32_t id = root.id; id >= 0; --id) {
    if (id >= static_cast<int32_t>(needed.size()) || !needed[id]) continue;
    if (!adj[id].valid()) continue;
    const Op op = nodes_[id].op;
    if (op == Op::kLeaf || op == Op::kConst || op == Op::kClipMask ||
        op == Op::kLeMask)
      continue;
    // Copy plain fields: builder calls below may reallocate nodes_.
    struct {
      int32_t dim, a, b, rows, cols;
      double lo, hi;
    } n{nodes_[id].dim, nodes_[id].a,    nodes_[id].b, nodes_[id].rows,
        nodes_[id].cols, nodes_[id].lo, nodes_[id].hi};
    NodeRef a = adj[id];
    NodeRef self = ref(id);
    NodeRef na = n.a >= 0 ? ref(n.a) : NodeRef{};
    NodeRef nb = n.b >= 0 ? ref(n.b) : NodeRef{};
    switch (op) {
      case Op::kLeaf:
      case Op::kConst:
      case Op::kClipMask:
      case Op::kLeMask:
        break;
      case Op::kAdd:
        accumulate(n.a, fit(n.a, a));
        accumulate(n.b, fit(n.b, a));
        break;
      case Op::kMul:
        accumulate(n.a, fit(n.a, mul(a, nb)));
        accumulate(n.b, fit(n.b, mul(a, na)));
        break;
      case Op::kMatVec:
        accumulate(n.a, outer(a, nb));
        accumulate(n.b, mat_t_vec(na, n.rows, n.cols, a));
        break;
      case Op::kMatTVec:
        accumulate(n.a, outer(nb, a));
        accumulate(n.b, matvec(na, n.rows, n.cols, a));
        break;
      case Op::kOuter:
        accumulate(n.a, matvec(a, n.rows, n.cols, nb));
        accumulate(n.b, mat_t_vec(a, n.rows, n.cols, na));
        break;
      case Op::kTanh: {
        // d tanh = 1 - tanh^2, reusing the forward output node.
        NodeRef ones = constant(Vec::Ones(n.dim));
        accumulate(n.a, mul(a, sub(ones, mul(self, self))));
        break;
      }
      case Op::kExp:
        accumulate(n.a, mul(a, self));
        break;
      case Op::kLog:
        // 1/x = exp(-log x), valid on the domain of log.
        accumulate(n.a, mul(a, exp(neg(self))));
        break;
      case Op::kSum:
        accumulate(n.a, mul(a, constant(Vec::Ones(nodes_[n.a].dim))));
        break;
      case Op::kClip: {
        Node m;
        m.op = Op::kClipMask;
        m.dim = n.dim;
        m.a = n.a;
        m.lo = n.lo;
        m.hi = n.hi;
        NodeRef mask = ref(push(std::move(m)));
        accumulate(n.a, mul(a, mask));
        break;
      }
    }
  }

  std::vector<NodeRef> out;
  out.reserve(wrt.size());
  for (NodeRef w : wrt) {
    if (w.id <= root.id && adj[w.id].valid())
      out.push_back(adj[w.id]);
    else
      out.push_back(constant(Vec::Zero(node(w.id).dim)));
  }
  return out;
}

Vec clip_vector(const Vec& v, double lo, double hi) {
  if (!(lo < hi)) throw GraphError("clip_vector: requires lo < hi");
  Vec out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    // NaN passes through untouched; clamping would silently hide it.
    const double x = v[i];
    out[i] = std::isnan(x) ? x : std::min(hi, std::max(lo, x));
  }
  return out;
}

}  // namespace metaadapt::diffcore
