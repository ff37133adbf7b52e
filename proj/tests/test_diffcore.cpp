#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fd_check.hpp"
#include "metaadapt/common/rng.hpp"
#include "metaadapt/diffcore/graph.hpp"

#include <cmath>

using namespace metaadapt;
using namespace metaadapt::diffcore;
using testutil::central_diff;
using testutil::max_rel_err;
using testutil::rel_err;

namespace {

Vec random_vec(Rng& rng, int n, double lo = -2.0, double hi = 2.0) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.uniform(lo, hi);
  return v;
}

// Checks both gradient routes (symbolic expression and numeric reverse pass)
// of a scalar graph against central differences on one leaf.
void check_grad(Graph& g, NodeRef root, NodeRef leaf, const Vec& at,
                const std::function<void(Bindings&)>& bind_rest,
                double tol = 1e-6) {
  auto f = [&](const Vec& x) {
    Bindings b;
    b.set(leaf, x);
    bind_rest(b);
    return g.evaluate(root, b)[0];
  };
  Vec fd = central_diff(f, at);

  Bindings b;
  b.set(leaf, at);
  bind_rest(b);

  NodeRef sym = g.gradient(root, leaf);
  Vec got_sym = g.evaluate(sym, b);
  CHECK(max_rel_err(got_sym, fd) < tol);

  NodeRef wrt[1] = {leaf};
  Vec got_num = g.backward(root, b, wrt)[0];
  CHECK(max_rel_err(got_num, fd) < tol);

  // The two routes should agree with each other far more tightly than with
  // the finite-difference oracle.
  CHECK((got_sym - got_num).cwiseAbs().maxCoeff() < 1e-12);
}

void no_extra(Bindings&) {}

}  // namespace

TEST_CASE("evaluate computes sum of squares") {
  Graph g;
  NodeRef x = g.leaf("x", 3);
  NodeRef root = g.sum(g.mul(x, x));
  Bindings b;
  Vec v(3);
  v << 1, 2, 3;
  b.set(x, v);
  CHECK(g.evaluate(root, b)[0] == doctest::Approx(14.0));
}

TEST_CASE("evaluate is pure and bitwise repeatable") {
  Graph g;
  NodeRef x = g.leaf("x", 4);
  NodeRef root = g.sum(g.tanh(g.mul(x, g.exp(x))));
  Rng rng(11);
  Vec v = random_vec(rng, 4);
  Bindings b;
  b.set(x, v);
  double first = g.evaluate(root, b)[0];

  Bindings other;
  other.set(x, random_vec(rng, 4));
  (void)g.evaluate(root, other);

  double again = g.evaluate(root, b)[0];
  CHECK(first == again);
}

TEST_CASE("unbound leaf is an error") {
  Graph g;
  NodeRef x = g.leaf("x", 2);
  NodeRef y = g.leaf("y", 2);
  NodeRef root = g.sum(g.add(x, y));
  Bindings b;
  b.set(x, Vec::Zero(2));
  CHECK_THROWS_AS(g.evaluate(root, b), GraphError);
}

TEST_CASE("gradient rejects nodes from another graph and non-scalar roots") {
  Graph g, h;
  NodeRef x = g.leaf("x", 2);
  NodeRef other = h.leaf("x", 2);
  NodeRef root = g.sum(x);
  CHECK_THROWS_AS(g.gradient(root, other), GraphError);
  CHECK_THROWS_AS(g.gradient(x, x), GraphError);  // root has dimension 2
}

TEST_CASE("gradient of an unreached node is zero") {
  Graph g;
  NodeRef x = g.leaf("x", 2);
  NodeRef y = g.leaf("y", 3);
  NodeRef root = g.sum(g.mul(x, x));
  NodeRef dy = g.gradient(root, y);
  Bindings b;
  b.set(x, Vec::Ones(2));
  Vec v = g.evaluate(dy, b);
  CHECK(v.size() == 3);
  CHECK(v.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("finite differences: elementwise and reduction primitives") {
  Rng rng(101);
  for (int trial = 0; trial < 5; ++trial) {
    Graph g;
    NodeRef x = g.leaf("x", 6);
    NodeRef c = g.constant(random_vec(rng, 6));
    SUBCASE("") {}
    // One scalar composite per primitive; the weighting constant makes the
    // adjoint non-uniform.
    auto weighted = [&](NodeRef n) { return g.sum(g.mul(c, n)); };

    check_grad(g, weighted(g.add(x, c)), x, random_vec(rng, 6), no_extra);
    check_grad(g, weighted(g.mul(x, c)), x, random_vec(rng, 6), no_extra);
    check_grad(g, weighted(g.tanh(x)), x, random_vec(rng, 6), no_extra);
    check_grad(g, weighted(g.exp(x)), x, random_vec(rng, 6), no_extra);
    check_grad(g, weighted(g.log(x)), x, random_vec(rng, 6, 0.5, 2.5),
               no_extra);
    check_grad(g, g.sum(x), x, random_vec(rng, 6), no_extra);
    check_grad(g, g.mean(x), x, random_vec(rng, 6), no_extra);
  }
}

TEST_CASE("finite differences: broadcast operands") {
  Rng rng(102);
  Graph g;
  NodeRef s = g.leaf("s", 1);
  NodeRef v = g.leaf("v", 5);
  NodeRef c = g.constant(random_vec(rng, 5));
  NodeRef root = g.sum(g.mul(c, g.add(g.mul(s, v), s)));
  Vec sv = random_vec(rng, 1);
  Vec vv = random_vec(rng, 5);
  check_grad(g, root, s, sv, [&](Bindings& b) { b.set(v, vv); });
  check_grad(g, root, v, vv, [&](Bindings& b) { b.set(s, sv); });
}

TEST_CASE("finite differences: matrix-vector product") {
  Rng rng(103);
  const int rows = 3, cols = 4;
  Graph g;
  NodeRef m = g.leaf("m", rows * cols);
  NodeRef x = g.leaf("x", cols);
  NodeRef w = g.constant(random_vec(rng, rows));
  NodeRef root = g.sum(g.mul(w, g.tanh(g.matvec(m, rows, cols, x))));
  Vec mv = random_vec(rng, rows * cols);
  Vec xv = random_vec(rng, cols);
  check_grad(g, root, m, mv, [&](Bindings& b) { b.set(x, xv); });
  check_grad(g, root, x, xv, [&](Bindings& b) { b.set(m, mv); });
}

TEST_CASE("finite differences: transposed product and outer product") {
  Rng rng(104);
  const int rows = 3, cols = 2;
  Graph g;
  NodeRef m = g.leaf("m", rows * cols);
  NodeRef u = g.leaf("u", rows);
  NodeRef w = g.constant(random_vec(rng, cols));
  NodeRef root = g.sum(g.mul(w, g.mat_t_vec(m, rows, cols, u)));
  Vec mv = random_vec(rng, rows * cols);
  Vec uv = random_vec(rng, rows);
  check_grad(g, root, m, mv, [&](Bindings& b) { b.set(u, uv); });
  check_grad(g, root, u, uv, [&](Bindings& b) { b.set(m, mv); });

  Graph g2;
  NodeRef a = g2.leaf("a", 3);
  NodeRef bb = g2.leaf("b", 4);
  NodeRef w2 = g2.constant(random_vec(rng, 12));
  NodeRef root2 = g2.sum(g2.mul(w2, g2.outer(a, bb)));
  Vec av = random_vec(rng, 3);
  Vec bv = random_vec(rng, 4);
  check_grad(g2, root2, a, av, [&](Bindings& b) { b.set(bb, bv); });
  check_grad(g2, root2, bb, bv, [&](Bindings& b) { b.set(a, av); });
}

TEST_CASE("finite differences: clip away from its boundaries") {
  Rng rng(105);
  Graph g;
  NodeRef x = g.leaf("x", 6);
  NodeRef c = g.constant(random_vec(rng, 6));
  NodeRef root = g.sum(g.mul(c, g.clip(x, -0.1, 0.1)));
  // Sample inputs at least 1e-3 away from the clip thresholds so the
  // difference stencil never straddles a kink.
  Vec at(6);
  for (int i = 0; i < 6; ++i) {
    double v;
    do {
      v = rng.uniform(-2.0, 2.0);
    } while (std::abs(std::abs(v) - 0.1) < 1e-3);
    at[i] = v;
  }
  check_grad(g, root, x, at, no_extra);
}

TEST_CASE("clip gradient is zero outside and identity inside the range") {
  Graph g;
  NodeRef x = g.leaf("x", 3);
  NodeRef root = g.sum(g.clip(x, -0.1, 0.1));
  NodeRef grad = g.gradient(root, x);
  Bindings b;
  Vec v(3);
  v << 0.05, 0.5, -2.0;
  b.set(x, v);
  Vec got = g.evaluate(grad, b);
  CHECK(got[0] == 1.0);
  CHECK(got[1] == 0.0);
  CHECK(got[2] == 0.0);
}

TEST_CASE("finite differences: minimum away from ties") {
  Rng rng(106);
  Graph g;
  NodeRef x = g.leaf("x", 4);
  NodeRef c = g.constant(random_vec(rng, 4));
  NodeRef root = g.sum(g.minimum(x, c));
  Vec at(4);
  for (int i = 0; i < 4; ++i) {
    double v;
    do {
      v = rng.uniform(-2.0, 2.0);
    } while (std::abs(v - g.node(c.id).value[i]) < 1e-3);
    at[i] = v;
  }
  check_grad(g, root, x, at, no_extra);

  Bindings b;
  Vec lo = g.node(c.id).value.array() - 1.0;
  b.set(x, lo);
  CHECK(g.evaluate(root, b)[0] == doctest::Approx(lo.sum()));
}

TEST_CASE("gaussian log density value and gradients") {
  // Standard normal at the mean integrates the constant term only.
  Graph g;
  const int d = 3;
  NodeRef x = g.leaf("x", d);
  NodeRef mu = g.leaf("mu", d);
  NodeRef ls = g.leaf("ls", d);
  NodeRef root = g.gaussian_log_density(x, mu, ls);
  Bindings b;
  b.set(x, Vec::Zero(d));
  b.set(mu, Vec::Zero(d));
  b.set(ls, Vec::Zero(d));
  const double expect = -0.5 * d * std::log(2.0 * M_PI);
  CHECK(g.evaluate(root, b)[0] == doctest::Approx(expect).epsilon(1e-12));

  Rng rng(107);
  Vec xv = random_vec(rng, d), mv = random_vec(rng, d),
      lv = random_vec(rng, d, -1.0, 1.0);
  check_grad(g, root, x, xv, [&](Bindings& bb) {
    bb.set(mu, mv);
    bb.set(ls, lv);
  });
  check_grad(g, root, mu, mv, [&](Bindings& bb) {
    bb.set(x, xv);
    bb.set(ls, lv);
  });
  check_grad(g, root, ls, lv, [&](Bindings& bb) {
    bb.set(x, xv);
    bb.set(mu, mv);
  });
}

TEST_CASE("gradient expressions can be differentiated again") {
  // Take one gradient step inside the graph and differentiate through it:
  //   inner(t)  = t^2, step(t) = t - a * d inner/d t = t (1 - 2a)
  //   outer(t)  = step(t)^2 = t^2 (1 - 2a)^2
  // At a = 0.1 the slope at t = 1 is 2 * 0.64 = 1.28 and the curvature is
  // the constant 1.28 as well.
  Graph g;
  NodeRef t = g.leaf("t", 1);
  NodeRef inner = g.sum(g.mul(t, t));
  NodeRef dinner = g.gradient(inner, t);
  NodeRef stepped = g.add(t, g.scale(-0.1, dinner));
  NodeRef outer = g.sum(g.mul(stepped, stepped));

  Bindings b;
  b.set(t, Vec::Ones(1));

  NodeRef d1 = g.gradient(outer, t);
  CHECK(rel_err(g.evaluate(d1, b)[0], 1.28) < 1e-8);

  NodeRef wrt[1] = {t};
  CHECK(rel_err(g.backward(outer, b, wrt)[0][0], 1.28) < 1e-8);

  NodeRef d2 = g.gradient(d1, t);
  CHECK(rel_err(g.evaluate(d2, b)[0], 1.28) < 1e-8);
  Bindings b2;
  b2.set(t, Vec::Constant(1, -0.7));
  CHECK(rel_err(g.evaluate(d2, b2)[0], 1.28) < 1e-8);

  auto f = [&](const Vec& x) {
    Bindings bb;
    bb.set(t, x);
    return g.evaluate(outer, bb)[0];
  };
  Vec fd = central_diff(f, Vec::Ones(1));
  CHECK(rel_err(fd[0], 1.28) < 1e-6);
}

TEST_CASE("gradient_multi agrees with separate sweeps") {
  Rng rng(108);
  Graph g;
  NodeRef a = g.leaf("a", 3);
  NodeRef b = g.leaf("b", 3);
  NodeRef root = g.sum(g.tanh(g.mul(a, g.exp(b))));
  Vec av = random_vec(rng, 3), bv = random_vec(rng, 3, -1.0, 1.0);

  NodeRef wrt[2] = {a, b};
  auto grads = g.gradient_multi(root, wrt);
  Bindings bind;
  bind.set(a, av);
  bind.set(b, bv);
  Vec ga = g.evaluate(grads[0], bind);
  Vec gb = g.evaluate(grads[1], bind);

  check_grad(g, root, a, av, [&](Bindings& bb) { bb.set(b, bv); });
  check_grad(g, root, b, bv, [&](Bindings& bb) { bb.set(a, av); });

  Vec ga2 = g.evaluate(g.gradient(root, a), bind);
  Vec gb2 = g.evaluate(g.gradient(root, b), bind);
  CHECK((ga - ga2).cwiseAbs().maxCoeff() == 0.0);
  CHECK((gb - gb2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("clip_vector clamps and propagates NaN") {
  Vec v(2);
  v << 2.0, -4.0;
  Vec got = clip_vector(v, -0.1, 0.1);
  CHECK(got[0] == 0.1);
  CHECK(got[1] == -0.1);

  CHECK_THROWS_AS(clip_vector(v, 0.1, 0.1), GraphError);

  Vec w(3);
  w << 0.0, std::nan(""), 5.0;
  Vec c = clip_vector(w, -1.0, 1.0);
  CHECK(c[0] == 0.0);
  CHECK(std::isnan(c[1]));
  CHECK(c[2] == 1.0);
}
