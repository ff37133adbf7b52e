#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace metaadapt::diffcore {

using Vec = Eigen::VectorXd;

// Structural misuse of the graph API: unbound leaves, dimension mismatches,
// mixing nodes across graphs, non-scalar roots where a scalar is required.
class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Graph;

struct NodeRef {
  const Graph* graph = nullptr;
  int32_t id = -1;
  bool valid() const { return graph != nullptr && id >= 0; }
};

enum class Op : uint8_t {
  kLeaf,
  kConst,
  kAdd,      // elementwise; one operand may be length 1 (broadcast)
  kMul,      // elementwise; one operand may be length 1 (broadcast)
  kMatVec,   // row-major (rows x cols) flat matrix times vector
  kMatTVec,  // transpose of the above
  kOuter,    // flat row-major outer product u v^T
  kTanh,
  kExp,
  kLog,
  kSum,      // reduce to length 1
  kClip,     // elementwise clamp to [lo, hi]
  kClipMask, // 1 where lo <= x <= hi else 0; derivative defined as zero
  kLeMask,   // 1 where a <= b else 0; derivative defined as zero
};

struct Node {
  Op op;
  int32_t dim = 0;
  int32_t a = -1;
  int32_t b = -1;
  int32_t rows = 0, cols = 0;  // kMatVec / kMatTVec / kOuter
  double lo = 0.0, hi = 0.0;   // kClip / kClipMask
  Vec value;                   // kConst payload
  std::string name;            // kLeaf label
};

// Leaf values for one evaluation.
class Bindings {
 public:
  void set(NodeRef leaf, Vec v);
  const Vec* find(int32_t leaf_id) const;

 private:
  std::unordered_map<int32_t, Vec> values_;
};

// Append-only DAG of vector-valued expressions over double precision values.
// Nodes are immutable once created; evaluating with fresh Bindings re-binds
// the leaves without touching the structure. Operand ids always precede the
// node id, so ascending id order is a topological order.
class Graph {
 public:
  NodeRef leaf(std::string name, int dim);
  NodeRef constant(Vec v);
  NodeRef constant(double x);

  NodeRef add(NodeRef a, NodeRef b);
  NodeRef mul(NodeRef a, NodeRef b);
  NodeRef matvec(NodeRef m, int rows, int cols, NodeRef x);
  NodeRef mat_t_vec(NodeRef m, int rows, int cols, NodeRef u);
  NodeRef outer(NodeRef u, NodeRef v);
  NodeRef tanh(NodeRef x);
  NodeRef exp(NodeRef x);
  NodeRef log(NodeRef x);
  NodeRef sum(NodeRef x);
  NodeRef clip(NodeRef x, double lo, double hi);

  // Composed helpers.
  NodeRef neg(NodeRef x);
  NodeRef sub(NodeRef a, NodeRef b);
  NodeRef scale(double s, NodeRef x);
  NodeRef dot(NodeRef a, NodeRef b);
  NodeRef mean(NodeRef x);
  NodeRef minimum(NodeRef a, NodeRef b);
  // log N(x; mean, diag(exp(log_std))^2), summed over dimensions.
  NodeRef gaussian_log_density(NodeRef x, NodeRef mean, NodeRef log_std);

  // Builds the expression for d(root)/d(wrt) by a symbolic reverse sweep.
  // root must be scalar. The result is a node of wrt's dimension and can be
  // differentiated again. wrt may be any node of this graph; parts of the
  // graph wrt does not influence contribute nothing.
  NodeRef gradient(NodeRef root, NodeRef wrt);
  std::vector<NodeRef> gradient_multi(NodeRef root,
                                      std::span<const NodeRef> wrt);

  Vec evaluate(NodeRef root, const Bindings& b) const;
  std::vector<Vec> evaluate_many(std::span<const NodeRef> roots,
                                 const Bindings& b) const;

  // Numeric reverse-mode pass: adjoints of wrt nodes for a scalar root.
  // Unlike gradient(), this does not grow the graph.
  std::vector<Vec> backward(NodeRef root, const Bindings& b,
                            std::span<const NodeRef> wrt) const;

  int size() const { return static_cast<int>(nodes_.size()); }
  const Node& node(int32_t id) const { return nodes_[id]; }

 private:
  int32_t push(Node n);
  NodeRef ref(int32_t id) const { return NodeRef{this, id}; }
  void check_mine(NodeRef r, const char* what) const;
  // Marks ancestors of the given roots; returns flags indexed by node id.
  std::vector<uint8_t> mark_ancestors(std::span<const int32_t> roots) const;
  void forward_values(const std::vector<uint8_t>& needed, const Bindings& b,
                      std::vector<Vec>& vals) const;

  std::vector<Node> nodes_;
};

// Elementwise clamp on plain vectors; requires lo < hi.
Vec clip_vector(const Vec& v, double lo, double hi);

inline bool all_finite(const Vec& v) { return v.allFinite(); }

}  // namespace metaadapt::diffcore
