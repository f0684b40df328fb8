#pragma once

// Tree-structure dynamic programming over a discrete control set: forward
// tree construction with geometric node merging, backward value iteration,
// and greedy feedback synthesis along the stored branches. The node state
// is an arbitrary flattened vector; for the flow problems it carries the
// reduced velocity coordinates (optionally with a trailing pressure block
// excluded from the merge distance via prune_dim).

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nsrom/grid.hpp"

namespace nsrom {

struct ControlGrid {
  std::vector<double> values;

  static ControlGrid uniform(double lo, double hi, int M) {
    if (M < 1) throw std::invalid_argument("ControlGrid: M must be >= 1");
    if (hi < lo) throw std::invalid_argument("ControlGrid: empty interval");
    ControlGrid g;
    if (M == 1) {
      g.values.push_back(0.5 * (lo + hi));
    } else {
      for (int i = 0; i < M; ++i)
        g.values.push_back(lo + (hi - lo) * i / (M - 1));
    }
    return g;
  }
  static ControlGrid of(std::vector<double> vals) {
    ControlGrid g;
    g.values = std::move(vals);
    for (size_t i = 1; i < g.values.size(); ++i)
      if (g.values[i] <= g.values[i - 1])
        throw std::invalid_argument("ControlGrid: values must be sorted and distinct");
    if (g.values.empty()) throw std::invalid_argument("ControlGrid: empty set");
    return g;
  }
  int M() const { return static_cast<int>(values.size()); }
};

struct TreeNode {
  Vec state;
  int level = 0;
  int parent = -1;         // node whose step created this node
  int parent_control = -1; // control index of that step
  std::vector<int> children;  // M entries once expanded (merged ids allowed)
};

struct Tree {
  std::vector<TreeNode> nodes;
  std::vector<std::vector<int>> levels;
  double dt = 0.0;
  double epsT = 0.0;
  double t0 = 0.0;
  int M = 0;
  int n_t = 0;
  int merges = 0;

  double levelTime(int n) const { return t0 + n * dt; }
  int size() const { return static_cast<int>(nodes.size()); }
};

// one-step discrete dynamics: x_{n+1} = dyn(x_n, a, t_n)
using TreeDynamics = std::function<Vec(const Vec&, double, double)>;

namespace detail {

inline std::string controlPath(const Tree& t, int node) {
  std::string p;
  for (int id = node; id >= 0 && t.nodes[id].parent >= 0; id = t.nodes[id].parent)
    p = std::to_string(t.nodes[id].parent_control) + (p.empty() ? "" : ",") + p;
  return p.empty() ? "(root)" : p;
}

}  // namespace detail

inline Tree build_tree(const TreeDynamics& dyn, const Vec& x0, const ControlGrid& controls,
                       double dt, int n_t, double eps_T, int prune_dim = -1,
                       double t0 = 0.0) {
  if (dt <= 0) throw std::invalid_argument("build_tree: dt must be positive");
  if (n_t < 1) throw std::invalid_argument("build_tree: n_t must be >= 1");
  if (eps_T < 0) throw std::invalid_argument("build_tree: eps_T must be >= 0");
  const int pd = prune_dim >= 0 ? std::min<int>(prune_dim, static_cast<int>(x0.size()))
                                : static_cast<int>(x0.size());

  Tree t;
  t.dt = dt;
  t.epsT = eps_T;
  t.t0 = t0;
  t.M = controls.M();
  t.n_t = n_t;
  t.nodes.push_back({x0, 0, -1, -1, {}});
  t.levels.push_back({0});

  for (int n = 0; n < n_t; ++n) {
    const double tn = t.levelTime(n);
    std::vector<int> next;
    for (int pid : t.levels[n]) {
      t.nodes[pid].children.resize(t.M, -1);
      for (int j = 0; j < t.M; ++j) {
        Vec z = dyn(t.nodes[pid].state, controls.values[j], tn);
        if (!z.allFinite())
          throw std::runtime_error("build_tree: non-finite state at level " +
                                   std::to_string(n + 1) + " via controls " +
                                   detail::controlPath(t, pid) + "," + std::to_string(j));
        // merge with the first existing same-level node within eps_T
        int hit = -1;
        for (int q : next)
          if ((z.head(pd) - t.nodes[q].state.head(pd)).norm() <= eps_T) {
            hit = q;
            break;
          }
        if (hit >= 0) {
          t.nodes[pid].children[j] = hit;
          ++t.merges;
        } else {
          int id = t.size();
          t.nodes.push_back({std::move(z), n + 1, pid, j, {}});
          next.push_back(id);
          t.nodes[pid].children[j] = id;
        }
      }
    }
    t.levels.push_back(std::move(next));
  }
  return t;
}

// running cost L(x, a, t), terminal cost g(x)
using RunningCost = std::function<double(const Vec&, double, double)>;
using TerminalCost = std::function<double(const Vec&)>;

struct ValueTable {
  std::vector<double> value;  // indexed by node id
};

inline ValueTable backward_dp(const Tree& t, const RunningCost& L, const TerminalCost& g,
                              const ControlGrid& controls, double lambda, double dt) {
  ValueTable vt;
  vt.value.assign(t.nodes.size(), 0.0);
  for (int id : t.levels[t.n_t]) vt.value[id] = g(t.nodes[id].state);
  const double disc = std::exp(-lambda * dt);
  for (int n = t.n_t - 1; n >= 0; --n) {
    const double tn = t.levelTime(n);
    for (int id : t.levels[n]) {
      const TreeNode& nd = t.nodes[id];
      double best = std::numeric_limits<double>::infinity();
      for (int j = 0; j < t.M; ++j) {
        double c = dt * L(nd.state, controls.values[j], tn) +
                   disc * vt.value[nd.children[j]];
        if (c < best) best = c;
      }
      vt.value[id] = best;
    }
  }
  return vt;
}

struct SynthesizedControl {
  std::vector<double> controls;       // alpha*_0 .. alpha*_{n_t-1}
  std::vector<int> control_indices;
  std::vector<int> path;              // node ids, root first (n_t + 1 entries)
};

inline SynthesizedControl synthesize_control(const Tree& t, const ValueTable& vt,
                                             const RunningCost& L,
                                             const ControlGrid& controls, double lambda,
                                             double dt) {
  SynthesizedControl out;
  const double disc = std::exp(-lambda * dt);
  int cur = t.levels[0][0];
  out.path.push_back(cur);
  for (int n = 0; n < t.n_t; ++n) {
    const TreeNode& nd = t.nodes[cur];
    const double tn = t.levelTime(n);
    int bestj = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < t.M; ++j) {
      double c = dt * L(nd.state, controls.values[j], tn) +
                 disc * vt.value[nd.children[j]];
      if (c < best) {  // strict: ties keep the lowest control index
        best = c;
        bestj = j;
      }
    }
    out.controls.push_back(controls.values[bestj]);
    out.control_indices.push_back(bestj);
    cur = nd.children[bestj];
    out.path.push_back(cur);
  }
  return out;
}

// cardinality of the unpruned tree with the same M and depth
inline double full_tree_count(int M, int n_t) {
  if (M == 1) return n_t + 1;
  return (std::pow(static_cast<double>(M), n_t + 1) - 1.0) / (M - 1);
}

inline double pruning_ratio(const Tree& t) {
  return full_tree_count(t.M, t.n_t) / t.size();
}

// node id, level, parent id, control index, value
inline void dump_tree_csv(const Tree& t, const ValueTable& vt, std::ostream& os) {
  os << "id,level,parent,control,value\n";
  for (int id = 0; id < t.size(); ++id) {
    const TreeNode& nd = t.nodes[id];
    os << id << ',' << nd.level << ',' << nd.parent << ',' << nd.parent_control << ','
       << (id < static_cast<int>(vt.value.size()) ? vt.value[id] : 0.0) << '\n';
  }
}

}  // namespace nsrom
