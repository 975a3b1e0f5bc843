// Copyright 2026 The RWDE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RWDE_FLOW_HPP_
#define RWDE_FLOW_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "rwde/graph.hpp"

namespace rwde {

// Flow toward the cemetery: nonnegative mass per edge id, conserved at every
// vertex except the source.  The cemetery absorbs whatever arrives.
struct Flow {
  std::unordered_map<int, double> theta;
  int source = -1;

  double at(int edge_id) const {
    auto it = theta.find(edge_id);
    return it == theta.end() ? 0.0 : it->second;
  }
};

inline double flow_divergence(const DirectedMultigraph& g, const Flow& f, int v) {
  double s = 0.0;
  for (int e : g.out_edges(v)) s += f.at(g.edge(e).id);
  for (int e : g.in_edges(v)) s -= f.at(g.edge(e).id);
  return s;
}

inline double strength(const DirectedMultigraph& g, const Flow& f) {
  return flow_divergence(g, f, f.source);
}

inline double energy(const Flow& f) {
  double s = 0.0;
  for (const auto& [id, v] : f.theta) s += v * v;
  return s;
}

inline void validate_flow(const DirectedMultigraph& g, const Flow& f,
                          double tol = 1e-10) {
  if (f.source < 0 || f.source >= g.vertex_count())
    throw std::invalid_argument("validate_flow: bad source");
  for (const auto& [id, v] : f.theta) {
    g.index_of_edge(id);
    if (v < -1e-12) throw std::invalid_argument("validate_flow: negative mass");
  }
  for (int v = 0; v < g.vertex_count(); ++v) {
    if (g.is_cemetery(v)) continue;
    const double d = flow_divergence(g, f, v);
    if (v == f.source) {
      if (d < -tol) throw std::invalid_argument("validate_flow: source absorbs mass");
    } else if (std::abs(d) > tol) {
      throw std::invalid_argument("validate_flow: mass not conserved at " +
                                  g.vertex_name(v));
    }
  }
}

struct Cutset {
  std::vector<int> edges;  // edge ids, sorted
  bool certified = false;  // removal verified to disconnect source from sink
};

struct KappaResult {
  double value = 0.0;
  std::vector<std::string> minimizer;  // vertex names of the optimal subset
  bool loop_at_root = false;
  bool attained_at_cap = false;
};

template <typename Num>
struct MaxFlowResult {
  Num value{};
  std::vector<Num> flow;  // by edge index; loops always carry zero
  Cutset cut;
  Num cut_value{};
  std::vector<char> source_side;  // by vertex index
};

// Highest-label push-relabel with the gap heuristic.  Num may be double,
// an integer type, or boost::rational; arithmetic stays within Num, so
// integral and rational capacities give exact flow values.
template <typename Num>
MaxFlowResult<Num> max_flow_min_cut(const DirectedMultigraph& g,
                                    const std::vector<Num>& cap, int s, int t) {
  const int n = g.vertex_count();
  if (s < 0 || s >= n || t < 0 || t >= n || s == t)
    throw std::invalid_argument("max_flow_min_cut: bad terminals");
  if (cap.size() != static_cast<std::size_t>(g.edge_count()))
    throw std::invalid_argument("max_flow_min_cut: one capacity per edge required");
  for (const Num& c : cap)
    if (c < Num(0))
      throw std::invalid_argument("max_flow_min_cut: negative capacity");

  struct Arc {
    int to;
    int rev;
    Num cap;
    int edge;  // original edge index, -1 for residual partners
  };
  std::vector<std::vector<Arc>> adj(n);
  for (int i = 0; i < g.edge_count(); ++i) {
    const Edge& e = g.edge(i);
    if (e.tail == e.head) continue;
    adj[e.tail].push_back(Arc{e.head, static_cast<int>(adj[e.head].size()),
                              cap[i], i});
    adj[e.head].push_back(Arc{e.tail, static_cast<int>(adj[e.tail].size()) - 1,
                              Num(0), -1});
  }

  // Distance-to-sink heights make the first phase behave like shortest
  // augmentation on sparse graphs.
  const int kMax = 2 * n + 1;
  std::vector<int> h(n, -1);
  {
    std::deque<int> q{t};
    h[t] = 0;
    while (!q.empty()) {
      const int v = q.front();
      q.pop_front();
      for (const Arc& a : adj[v]) {
        if (h[a.to] >= 0) continue;
        if (adj[a.to][a.rev].cap > Num(0)) {
          h[a.to] = h[v] + 1;
          q.push_back(a.to);
        }
      }
    }
    for (int v = 0; v < n; ++v)
      if (h[v] < 0) h[v] = n;
    h[s] = n;
  }

  std::vector<Num> ex(n, Num(0));
  std::vector<int> cnt(kMax + 2, 0);
  for (int v = 0; v < n; ++v) ++cnt[h[v]];
  std::vector<std::vector<int>> bucket(kMax + 2);
  std::vector<int> cur(n, 0);
  int hi = 0;

  auto activate = [&](int v) {
    if (v == s || v == t || h[v] > kMax) return;
    bucket[h[v]].push_back(v);
    if (h[v] > hi) hi = h[v];
  };

  for (Arc& a : adj[s]) {
    if (a.cap <= Num(0)) continue;
    const Num d = a.cap;
    a.cap = Num(0);
    adj[a.to][a.rev].cap += d;
    ex[a.to] += d;
    ex[s] -= d;
    activate(a.to);
  }

  while (hi >= 0) {
    if (bucket[hi].empty()) {
      --hi;
      continue;
    }
    const int v = bucket[hi].back();
    bucket[hi].pop_back();
    if (v == s || v == t || h[v] != hi || !(ex[v] > Num(0))) continue;

    bool relabeled = false;
    while (ex[v] > Num(0)) {
      if (cur[v] == static_cast<int>(adj[v].size())) {
        int nh = kMax + 1;
        for (const Arc& a : adj[v])
          if (a.cap > Num(0)) nh = std::min(nh, h[a.to] + 1);
        const int oh = h[v];
        --cnt[oh];
        if (cnt[oh] == 0 && oh < n) {
          // Gap: nothing sits at height oh anymore, so heights in (oh, n)
          // cannot route to the sink; lift them past n.
          for (int u = 0; u < n; ++u) {
            if (u == s || u == t) continue;
            if (h[u] > oh && h[u] < n) {
              --cnt[h[u]];
              h[u] = n + 1;
              ++cnt[n + 1];
              cur[u] = 0;
              if (ex[u] > Num(0)) activate(u);
            }
          }
          if (nh > oh && nh < n) nh = n + 1;
        }
        h[v] = std::min(nh, kMax + 1);
        if (h[v] <= kMax) ++cnt[h[v]];
        cur[v] = 0;
        relabeled = true;
        break;
      }
      Arc& a = adj[v][cur[v]];
      if (a.cap > Num(0) && h[v] == h[a.to] + 1) {
        const Num d = ex[v] < a.cap ? ex[v] : a.cap;
        a.cap -= d;
        adj[a.to][a.rev].cap += d;
        ex[a.to] += d;
        ex[v] -= d;
        activate(a.to);
      } else {
        ++cur[v];
      }
    }
    if (relabeled && ex[v] > Num(0)) activate(v);
  }

  MaxFlowResult<Num> r;
  r.value = ex[t];
  r.flow.assign(g.edge_count(), Num(0));
  for (int v = 0; v < n; ++v)
    for (const Arc& a : adj[v])
      if (a.edge >= 0) r.flow[a.edge] = cap[a.edge] - a.cap;

  r.source_side.assign(n, 0);
  {
    std::deque<int> q{s};
    r.source_side[s] = 1;
    while (!q.empty()) {
      const int v = q.front();
      q.pop_front();
      for (const Arc& a : adj[v])
        if (a.cap > Num(0) && !r.source_side[a.to]) {
          r.source_side[a.to] = 1;
          q.push_back(a.to);
        }
    }
  }
  if (r.source_side[t])
    throw std::runtime_error("max_flow_min_cut: sink still reachable after run");
  r.cut_value = Num(0);
  for (int i = 0; i < g.edge_count(); ++i) {
    const Edge& e = g.edge(i);
    if (r.source_side[e.tail] && !r.source_side[e.head]) {
      r.cut.edges.push_back(e.id);
      r.cut_value += cap[i];
    }
  }
  std::sort(r.cut.edges.begin(), r.cut.edges.end());
  {
    // Certify the cut: the graph minus the cut edges must disconnect s, t.
    std::unordered_set<int> cut_ids(r.cut.edges.begin(), r.cut.edges.end());
    std::vector<char> seen(n, 0);
    std::deque<int> q{s};
    seen[s] = 1;
    while (!q.empty()) {
      const int v = q.front();
      q.pop_front();
      for (int e : g.out_edges(v)) {
        if (cut_ids.count(g.edge(e).id)) continue;
        const int u = g.edge(e).head;
        if (!seen[u]) {
          seen[u] = 1;
          q.push_back(u);
        }
      }
    }
    r.cut.certified = !seen[t];
  }
  if (!r.cut.certified)
    throw std::runtime_error("max_flow_min_cut: cut failed certification");
  return r;
}

inline std::vector<double> capacities_by_index(const DirectedMultigraph& g,
                                               const EdgeWeights& w) {
  std::vector<double> c(g.edge_count());
  for (int i = 0; i < g.edge_count(); ++i) c[i] = w.at(g.edge(i).id);
  return c;
}

inline Flow to_flow(const DirectedMultigraph& g,
                    const MaxFlowResult<double>& r, int source) {
  Flow f;
  f.source = source;
  for (int i = 0; i < g.edge_count(); ++i)
    if (r.flow[i] > 0.0) f.theta[g.edge(i).id] = r.flow[i];
  return f;
}

// Closed-form critical exponent on the lattice: twice the total weight minus
// the heaviest direction pair, attained by the origin plus that neighbor.
inline KappaResult kappa_zd(const std::vector<double>& w, int d) {
  if (d < 1) throw std::invalid_argument("kappa_zd: dimension must be positive");
  if (w.size() != static_cast<std::size_t>(2 * d))
    throw std::invalid_argument("kappa_zd: need one weight per direction");
  double total = 0.0;
  for (double x : w) {
    if (!(x > 0.0)) throw std::invalid_argument("kappa_zd: weights must be positive");
    total += x;
  }
  int i0 = 0;
  double best_pair = -1.0;
  for (int i = 0; i < d; ++i) {
    const double pair = w[i] + w[d + i];
    if (pair > best_pair) {
      best_pair = pair;
      i0 = i;
    }
  }
  KappaResult r;
  r.value = 2.0 * total - best_pair;
  std::vector<int> origin(d, 0), step(d, 0);
  step[i0] = 1;
  r.minimizer = {builders::coord_name(origin), builders::coord_name(step)};
  return r;
}

namespace detail {

inline std::vector<std::string> subset_names(const DirectedMultigraph& g,
                                             const VertexSubset& k) {
  std::vector<std::string> names;
  names.reserve(k.size());
  for (int v : k) names.push_back(g.vertex_name(v));
  return names;
}

}  // namespace detail

// Minimum boundary weight over connected vertex sets containing x0, up to
// the size cap.  The singleton is admissible only when x0 carries a loop.
// attained_at_cap flags a minimizer of maximal size: the enumeration cannot
// rule out larger, cheaper sets.
inline KappaResult kappa_min_cut(const DirectedMultigraph& g,
                                 const EdgeWeights& alpha, int x0, int max_size) {
  if (max_size < 1) throw std::invalid_argument("kappa_min_cut: max_size < 1");
  bool loop_at_root = false;
  for (int e : g.out_edges(x0))
    if (g.edge(e).head == x0) loop_at_root = true;

  KappaResult r;
  r.loop_at_root = loop_at_root;
  r.value = std::numeric_limits<double>::infinity();
  VertexSubset best;
  for_each_connected_subset(g, x0, max_size, [&](const VertexSubset& k) {
    if (k.size() == 1 && !loop_at_root) return;
    const double v = boundary_weight(g, alpha, k);
    if (v < r.value) {
      r.value = v;
      best = k;
    }
  });
  if (best.empty())
    throw std::invalid_argument("kappa_min_cut: no admissible vertex set");
  r.minimizer = detail::subset_names(g, best);
  r.attained_at_cap = best.size() == static_cast<std::size_t>(max_size);
  return r;
}

// Diagnostic variant restricted to boundaries that spare at least one exit
// of x0, i.e. cutsets not containing every edge out of x0.
inline KappaResult kappa_min_cut_excluding_full_exit(const DirectedMultigraph& g,
                                                     const EdgeWeights& alpha,
                                                     int x0, int max_size) {
  if (max_size < 1)
    throw std::invalid_argument("kappa_min_cut_excluding_full_exit: max_size < 1");
  KappaResult r;
  r.value = std::numeric_limits<double>::infinity();
  for (int e : g.out_edges(x0))
    if (g.edge(e).head == x0) r.loop_at_root = true;
  VertexSubset best;
  for_each_connected_subset(g, x0, max_size, [&](const VertexSubset& k) {
    bool spares_exit = false;
    for (int e : g.out_edges(x0)) {
      const int head = g.edge(e).head;
      if (head == x0) continue;
      if (std::binary_search(k.begin(), k.end(), head)) spares_exit = true;
    }
    if (!spares_exit) return;
    const double v = boundary_weight(g, alpha, k);
    if (v < r.value) {
      r.value = v;
      best = k;
    }
  });
  if (best.empty())
    throw std::invalid_argument(
        "kappa_min_cut_excluding_full_exit: no admissible vertex set");
  r.minimizer = detail::subset_names(g, best);
  r.attained_at_cap = best.size() == static_cast<std::size_t>(max_size);
  return r;
}

namespace detail {

// Graph distance from x0 skipping the cemetery; the cemetery itself and
// anything only reachable through it get "infinity" (-1).
inline std::vector<int> interior_distances(const DirectedMultigraph& g, int x0) {
  std::vector<int> dist(g.vertex_count(), -1);
  std::deque<int> q{x0};
  dist[x0] = 0;
  while (!q.empty()) {
    const int v = q.front();
    q.pop_front();
    auto visit = [&](int u) {
      if (g.is_cemetery(u) || dist[u] >= 0) return;
      dist[u] = dist[v] + 1;
      q.push_back(u);
    };
    for (int e : g.out_edges(v)) visit(g.edge(e).head);
    for (int e : g.in_edges(v)) visit(g.edge(e).tail);
  }
  return dist;
}

inline int lattice_radius(const DirectedMultigraph& g, int v) {
  int r = 0;
  for (int c : builders::parse_coords(g.vertex_name(v))) r += std::abs(c);
  return r;
}

}  // namespace detail

struct FlowOnGraph {
  DirectedMultigraph graph;
  Flow flow;
};

// Unit flow from the root of a lattice truncation, spread outward: every
// vertex forwards its accumulated mass equally over its outward edges
// (radius increasing, or into the cemetery at the outer shell).
inline Flow radial_flow_on_truncation(const DirectedMultigraph& g) {
  if (!g.root() || !g.cemetery())
    throw std::invalid_argument("radial_flow_on_truncation: need root and cemetery");
  const int x0 = *g.root();
  std::vector<double> mass(g.vertex_count(), 0.0);
  mass[x0] = 1.0;
  Flow f;
  f.source = x0;
  // Vertex order of lattice truncations is sorted by radius, so a single
  // forward sweep sees every vertex after all of its inward neighbors.
  for (int v = 0; v < g.vertex_count(); ++v) {
    if (g.is_cemetery(v) || mass[v] == 0.0) continue;
    const int rv = detail::lattice_radius(g, v);
    std::vector<int> outward;
    for (int e : g.out_edges(v)) {
      const int head = g.edge(e).head;
      if (g.is_cemetery(head) || detail::lattice_radius(g, head) > rv)
        outward.push_back(e);
    }
    if (outward.empty())
      throw std::invalid_argument("radial_flow_on_truncation: dead end at " +
                                  g.vertex_name(v));
    const double share = mass[v] / static_cast<double>(outward.size());
    for (int e : outward) {
      f.theta[g.edge(e).id] += share;
      mass[g.edge(e).head] += share;
    }
  }
  return f;
}

inline FlowOnGraph radial_unit_flow_zd(int d, int big_n) {
  if (d <= 2)
    throw std::invalid_argument(
        "radial_unit_flow_zd: no finite-energy flow in dimension " +
        std::to_string(d));
  if (big_n < 1) throw std::invalid_argument("radial_unit_flow_zd: radius < 1");
  const DirectedMultigraph ambient = builders::lattice_ball_zd(d, big_n + 1);
  SurgeryResult trunc = truncate_to_cemetery(ambient, *ambient.root(), big_n);
  FlowOnGraph out;
  out.flow = radial_flow_on_truncation(trunc.graph);
  out.graph = std::move(trunc.graph);
  return out;
}

// Flow on the undirected shadow: canonical (min,max) vertex pairs, positive
// values run low-to-high.
struct UndirectedFlow {
  std::map<std::pair<int, int>, double> value;
  int source = -1;
};

// Orients each undirected value along one directed edge, leaving the
// opposite orientation empty; energy and strength carry over unchanged.
inline Flow symmetric_to_directed_flow(const DirectedMultigraph& g,
                                       const UndirectedFlow& f) {
  Flow out;
  out.source = f.source;
  for (const auto& [pair, q] : f.value) {
    if (q == 0.0) continue;
    const int tail = q > 0.0 ? pair.first : pair.second;
    const int head = q > 0.0 ? pair.second : pair.first;
    int chosen = -1;
    for (int e : g.out_edges(tail))
      if (g.edge(e).head == head) {
        chosen = e;
        break;
      }
    if (chosen < 0)
      throw std::invalid_argument("symmetric_to_directed_flow: no edge " +
                                  g.vertex_name(tail) + " -> " + g.vertex_name(head));
    out.theta[g.edge(chosen).id] += std::abs(q);
  }
  return out;
}

// Current of the given strength from source to the grounded cemetery, one
// conductance unit per undirected adjacency (parallel edges share equally).
// This is the minimum-energy flow subject to mass conservation alone.
inline std::vector<double> electrical_flow(const DirectedMultigraph& g,
                                           int source, double target) {
  if (!g.cemetery()) throw std::invalid_argument("electrical_flow: need a cemetery");
  const int dv = *g.cemetery();
  if (source == dv || source < 0 || source >= g.vertex_count())
    throw std::invalid_argument("electrical_flow: bad source");
  const int n = g.vertex_count();

  struct PairCount {
    int forward = 0;
    int backward = 0;
  };
  std::unordered_map<std::int64_t, PairCount> pairs;
  auto key_of = [n](int u, int v) {
    return static_cast<std::int64_t>(std::min(u, v)) * n + std::max(u, v);
  };
  for (const Edge& e : g.edges()) {
    if (e.tail == e.head) continue;
    PairCount& pc = pairs[key_of(e.tail, e.head)];
    if (e.tail < e.head)
      ++pc.forward;
    else
      ++pc.backward;
  }

  // Grounded Laplacian over the non-cemetery vertices.
  std::vector<int> state(n, -1);
  std::vector<int> vertex_of(0);
  for (int v = 0; v < n; ++v)
    if (v != dv) {
      state[v] = static_cast<int>(vertex_of.size());
      vertex_of.push_back(v);
    }
  const int m = static_cast<int>(vertex_of.size());
  std::vector<Eigen::Triplet<double>> trip;
  for (const auto& [key, pc] : pairs) {
    const int u = static_cast<int>(key / n);
    const int v = static_cast<int>(key % n);
    const double c = static_cast<double>(std::max(pc.forward, pc.backward));
    if (u != dv) trip.emplace_back(state[u], state[u], c);
    if (v != dv) trip.emplace_back(state[v], state[v], c);
    if (u != dv && v != dv) {
      trip.emplace_back(state[u], state[v], -c);
      trip.emplace_back(state[v], state[u], -c);
    }
  }
  Eigen::SparseMatrix<double> lap(m, m);
  lap.setFromTriplets(trip.begin(), trip.end());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  rhs[state[source]] = target;

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
  solver.compute(lap);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("electrical_flow: factorization failed");
  Eigen::VectorXd phi = solver.solve(rhs);
  phi += solver.solve(rhs - lap * phi);  // one refinement pass
  const double residual = (lap * phi - rhs).cwiseAbs().maxCoeff();
  if (!(residual <= 1e-9 * std::max(1.0, std::abs(target))))
    throw std::runtime_error("electrical_flow: residual too large");

  auto potential = [&](int v) { return v == dv ? 0.0 : phi[state[v]]; };
  std::vector<double> theta(g.edge_count(), 0.0);
  const double tiny = 1e-13 * std::max(1.0, std::abs(target));
  for (const auto& [key, pc] : pairs) {
    const int u = static_cast<int>(key / n);
    const int v = static_cast<int>(key % n);
    const double c = static_cast<double>(std::max(pc.forward, pc.backward));
    const double q = c * (potential(u) - potential(v));  // positive: u -> v
    const int from = q >= 0.0 ? u : v;
    const int to = q >= 0.0 ? v : u;
    const int lanes = q >= 0.0 ? pc.forward : pc.backward;
    if (std::abs(q) <= tiny) continue;
    if (lanes == 0)
      throw std::runtime_error("electrical_flow: current needs a missing orientation");
    const double share = std::abs(q) / lanes;
    for (int e : g.out_edges(from))
      if (g.edge(e).head == to) theta[e] = share;
  }
  return theta;
}

struct L2MaxflowResult {
  Flow flow;
  double min_cut_value = 0.0;
  Cutset cut;
  // Radius past which capacities were replaced by the scaled seed flow;
  // infinity when the truncation is too small for the replacement to engage.
  double cutoff_radius = std::numeric_limits<double>::infinity();
  // Fraction of the way from the raw max flow toward the minimum-energy
  // flow of equal strength; 1 means the energy minimizer was compatible.
  double blend = 0.0;
};

// Max flow whose energy stays bounded as the truncation grows.  Capacities
// beyond a computed radius are replaced by 2 * (min cut) * theta, which
// preserves the min cut but forces square-summability; among the resulting
// maximum flows, the one closest to the electrical energy minimizer is
// returned so that energies are comparable across truncation sizes.
inline L2MaxflowResult l2_compatible_maxflow(const DirectedMultigraph& g,
                                             const EdgeWeights& c, int x0,
                                             const Flow& theta,
                                             const std::vector<int>& eta) {
  if (!g.cemetery())
    throw std::invalid_argument("l2_compatible_maxflow: need a cemetery");
  const int dv = *g.cemetery();
  if (x0 < 0 || x0 >= g.vertex_count() || x0 == dv)
    throw std::invalid_argument("l2_compatible_maxflow: bad root");
  if (eta.size() < 2)
    throw std::invalid_argument("l2_compatible_maxflow: need at least two radii");
  for (std::size_t i = 0; i < eta.size(); ++i)
    if (eta[i] < 0 || (i > 0 && eta[i] <= eta[i - 1]))
      throw std::invalid_argument("l2_compatible_maxflow: radii must increase");
  validate_flow(g, theta);
  const double theta_strength = strength(g, theta);
  if (std::abs(theta_strength - 1.0) > 1e-9)
    throw std::invalid_argument("l2_compatible_maxflow: seed flow must have unit strength");

  const std::vector<int> dist = detail::interior_distances(g, x0);
  int maxdist = 0;
  for (int v = 0; v < g.vertex_count(); ++v) {
    if (g.is_cemetery(v)) continue;
    if (dist[v] < 0)
      throw std::invalid_argument("l2_compatible_maxflow: " + g.vertex_name(v) +
                                  " is disconnected from the root");
    maxdist = std::max(maxdist, dist[v]);
  }

  // Every complete shell must be strongly connected, else the min cut can
  // exceed every finite-energy flow and the construction is unsound.
  int shells_checked = 0;
  for (std::size_t k = 0; k + 1 < eta.size() && eta[k + 1] <= maxdist; ++k) {
    std::vector<int> shell;
    for (int v = 0; v < g.vertex_count(); ++v)
      if (!g.is_cemetery(v) && dist[v] > eta[k] && dist[v] <= eta[k + 1])
        shell.push_back(v);
    if (shell.empty())
      throw std::invalid_argument("l2_compatible_maxflow: empty shell between radii " +
                                  std::to_string(eta[k]) + " and " +
                                  std::to_string(eta[k + 1]));
    DirectedMultigraph induced;
    std::vector<int> local(g.vertex_count(), -1);
    for (int v : shell) local[v] = induced.add_vertex(g.vertex_name(v));
    for (int v : shell)
      for (int e : g.out_edges(v))
        if (local[g.edge(e).head] >= 0)
          induced.add_edge(local[v], local[g.edge(e).head]);
    if (!is_strongly_connected(induced))
      throw std::invalid_argument(
          "l2_compatible_maxflow: shell between radii " + std::to_string(eta[k]) +
          " and " + std::to_string(eta[k + 1]) +
          " is not strongly connected; the shell-connectivity hypothesis fails");
    ++shells_checked;
  }
  if (shells_checked == 0)
    throw std::invalid_argument(
        "l2_compatible_maxflow: no complete shell to check; radii too coarse "
        "for this truncation");

  const std::vector<double> base_cap = capacities_by_index(g, c);
  double inf_c = std::numeric_limits<double>::infinity();
  for (double v : base_cap) inf_c = std::min(inf_c, v);

  const MaxFlowResult<double> base = max_flow_min_cut(g, base_cap, x0, dv);
  const double cut_value = base.value;
  L2MaxflowResult out;
  out.min_cut_value = cut_value;
  if (!(cut_value > 0.0)) {
    out.flow.source = x0;
    out.cut = base.cut;
    return out;
  }

  std::vector<double> theta_by_index(g.edge_count(), 0.0);
  for (int i = 0; i < g.edge_count(); ++i)
    theta_by_index[i] = theta.at(g.edge(i).id);

  // First radius past which the seed flow is everywhere small.
  const double small = inf_c / (2.0 * cut_value);
  int n0 = -1;
  for (std::size_t k = 0; k < eta.size(); ++k) {
    double sup_outside = 0.0;
    for (int i = 0; i < g.edge_count(); ++i) {
      const Edge& e = g.edge(i);
      const bool inside = !g.is_cemetery(e.head) && dist[e.tail] <= eta[k] &&
                          dist[e.head] <= eta[k];
      if (!inside) sup_outside = std::max(sup_outside, theta_by_index[i]);
    }
    if (sup_outside <= small) {
      n0 = static_cast<int>(k);
      break;
    }
  }

  std::vector<double> capped = base_cap;
  if (n0 >= 0) {
    const int n1 = n0 + static_cast<int>(std::floor(2.0 * cut_value / inf_c)) + 1;
    if (n1 < static_cast<int>(eta.size()) && eta[n1] <= maxdist) {
      const int r1 = eta[n1];
      bool engaged = false;
      for (int i = 0; i < g.edge_count(); ++i) {
        if (dist[g.edge(i).tail] > r1) {
          capped[i] = 2.0 * cut_value * theta_by_index[i];
          engaged = true;
        }
      }
      if (engaged) out.cutoff_radius = r1;
    }
  }

  const MaxFlowResult<double> capped_run = max_flow_min_cut(g, capped, x0, dv);
  if (std::abs(capped_run.value - cut_value) > 1e-9 * std::max(1.0, cut_value))
    throw std::runtime_error(
        "l2_compatible_maxflow: capacity truncation changed the min cut from " +
        std::to_string(cut_value) + " to " + std::to_string(capped_run.value));
  out.cut = capped_run.cut;

  std::vector<double> chosen = capped_run.flow;
  double blend = 0.0;
  try {
    const std::vector<double> electric = electrical_flow(g, x0, cut_value);
    // Both endpoints are nonnegative, so only genuine capacity violations
    // bound the mix; sub-tolerance overshoot is clamped away below.
    double gamma = 1.0;
    for (int i = 0; i < g.edge_count(); ++i) {
      const double slack = 2e-12 * std::max(1.0, capped[i]);
      if (electric[i] > capped[i] + slack)
        gamma = std::min(gamma, std::max(0.0, capped[i] - chosen[i]) /
                                    (electric[i] - chosen[i]));
    }
    gamma = std::max(0.0, std::min(1.0, gamma));
    for (int i = 0; i < g.edge_count(); ++i) {
      chosen[i] += gamma * (electric[i] - chosen[i]);
      chosen[i] = std::min(std::max(chosen[i], 0.0), capped[i]);
    }
    blend = gamma;
  } catch (const std::runtime_error&) {
    // Electrical refinement unavailable; keep the raw max flow.
  }
  out.blend = blend;

  out.flow.source = x0;
  for (int i = 0; i < g.edge_count(); ++i)
    if (chosen[i] > 0.0) out.flow.theta[g.edge(i).id] = chosen[i];
  validate_flow(g, out.flow);
  return out;
}

// Certified lower bound for the integrability exponent coming from one
// explicit flow: the worst weight-to-mass ratio along the support of the
// strength-normalized flow.
inline double kappa0_lower_bound(const DirectedMultigraph& g,
                                 const EdgeWeights& alpha, const Flow& f) {
  const double s = strength(g, f);
  if (!(s > 0.0))
    throw std::invalid_argument("kappa0_lower_bound: flow has no strength");
  double bound = std::numeric_limits<double>::infinity();
  for (const auto& [id, th] : f.theta)
    if (th > 0.0) bound = std::min(bound, alpha.at(id) * s / th);
  return bound;
}

}  // namespace rwde

#endif  // RWDE_FLOW_HPP_
