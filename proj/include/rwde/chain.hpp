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

#ifndef RWDE_CHAIN_HPP_
#define RWDE_CHAIN_HPP_

#include <cmath>
#include <cstdint>
#include <deque>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "rwde/dirichlet.hpp"
#include "rwde/graph.hpp"
#include "rwde/parallel.hpp"
#include "rwde/rng.hpp"

namespace rwde {

// One-step transition kernel of the walk killed at the cemetery.  States are
// the non-cemetery vertices; a row sums to strictly less than one exactly
// when the vertex has an edge to the cemetery.
struct TransitionMatrix {
  Eigen::SparseMatrix<double> P;
  std::vector<int> state_of_vertex;  // -1 for the cemetery
  std::vector<int> vertex_of_state;
};

inline TransitionMatrix transition_matrix(const DirectedMultigraph& g,
                                          const Environment& env) {
  validate_environment(g, env);
  TransitionMatrix tm;
  tm.state_of_vertex.assign(g.vertex_count(), -1);
  for (int v = 0; v < g.vertex_count(); ++v) {
    if (g.is_cemetery(v)) continue;
    tm.state_of_vertex[v] = static_cast<int>(tm.vertex_of_state.size());
    tm.vertex_of_state.push_back(v);
  }
  const int n = static_cast<int>(tm.vertex_of_state.size());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(g.edge_count());
  for (const Edge& e : g.edges()) {
    if (g.is_cemetery(e.head)) continue;
    trip.emplace_back(tm.state_of_vertex[e.tail], tm.state_of_vertex[e.head],
                      env.p[g.index_of_edge(e.id)]);
  }
  tm.P.resize(n, n);
  tm.P.setFromTriplets(trip.begin(), trip.end());
  return tm;
}

namespace detail {

// Vertices without a directed path to the cemetery keep the walk alive
// forever, which makes I - P singular.
inline void require_absorbing(const DirectedMultigraph& g) {
  if (!g.cemetery())
    throw std::invalid_argument("green_function: graph has no cemetery");
  std::vector<char> reaches(g.vertex_count(), 0);
  std::deque<int> queue;
  reaches[*g.cemetery()] = 1;
  queue.push_back(*g.cemetery());
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (int e : g.in_edges(v)) {
      const int t = g.edge(e).tail;
      if (!reaches[t]) {
        reaches[t] = 1;
        queue.push_back(t);
      }
    }
  }
  for (int v = 0; v < g.vertex_count(); ++v)
    if (!reaches[v])
      throw std::invalid_argument("green_function: vertex " + g.vertex_name(v) +
                                  " cannot reach the cemetery");
}

inline Eigen::VectorXd solve_green_column(const Eigen::SparseMatrix<double>& P,
                                          int target_state) {
  const int n = static_cast<int>(P.rows());
  Eigen::SparseMatrix<double> U(n, n);
  U.setIdentity();
  U -= P;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs[target_state] = 1.0;
  Eigen::VectorXd col;
  if (n <= 10000) {
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(U);
    if (lu.info() != Eigen::Success)
      throw std::runtime_error("green_function: sparse factorization failed");
    col = lu.solve(rhs);
  } else {
    Eigen::BiCGSTAB<Eigen::SparseMatrix<double>> it;
    it.setTolerance(1e-14);
    it.compute(U);
    col = it.solve(rhs);
  }
  const double residual = (U * col - rhs).cwiseAbs().maxCoeff();
  if (!(residual <= 1e-10))
    throw std::runtime_error("green_function: residual " +
                             std::to_string(residual) + " above 1e-10");
  return col;
}

}  // namespace detail

// Column y of the Green function: G(x, y) for every non-cemetery x, aligned
// with TransitionMatrix states.
inline Eigen::VectorXd green_column(const DirectedMultigraph& g,
                                    const Environment& env, int y) {
  detail::require_absorbing(g);
  const TransitionMatrix tm = transition_matrix(g, env);
  if (y < 0 || y >= g.vertex_count() || tm.state_of_vertex[y] < 0)
    throw std::invalid_argument("green_column: invalid target vertex");
  return detail::solve_green_column(tm.P, tm.state_of_vertex[y]);
}

inline double green_function(const DirectedMultigraph& g, const Environment& env,
                             int x, int y) {
  detail::require_absorbing(g);
  const TransitionMatrix tm = transition_matrix(g, env);
  if (x < 0 || x >= g.vertex_count() || tm.state_of_vertex[x] < 0)
    throw std::invalid_argument("green_function: invalid source vertex");
  if (y < 0 || y >= g.vertex_count() || tm.state_of_vertex[y] < 0)
    throw std::invalid_argument("green_function: invalid target vertex");
  const Eigen::VectorXd col = detail::solve_green_column(tm.P, tm.state_of_vertex[y]);
  return col[tm.state_of_vertex[x]];
}

// Unique stationary law of a strongly connected chain, from the transposed
// fixed-point system with the normalization row appended.  Indexed by vertex.
inline std::vector<double> invariant_distribution(const DirectedMultigraph& g,
                                                  const Environment& env) {
  if (g.cemetery())
    throw std::invalid_argument("invariant_distribution: graph has a cemetery");
  if (!is_strongly_connected(g))
    throw std::invalid_argument("invariant_distribution: graph is not strongly connected");
  validate_environment(g, env);
  const int n = g.vertex_count();
  if (n > 4000)
    throw std::invalid_argument("invariant_distribution: graph too large for dense solve");
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n + 1, n);
  for (const Edge& e : g.edges())
    a(e.head, e.tail) += env.p[g.index_of_edge(e.id)];
  for (int v = 0; v < n; ++v) a(v, v) -= 1.0;
  for (int v = 0; v < n; ++v) a(n, v) = 1.0;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n + 1);
  b[n] = 1.0;
  const Eigen::VectorXd pi = a.colPivHouseholderQr().solve(b);
  const double residual = (a * pi - b).cwiseAbs().maxCoeff();
  if (!(residual <= 1e-10))
    throw std::runtime_error("invariant_distribution: residual " +
                             std::to_string(residual) + " above 1e-10");
  std::vector<double> out(n);
  for (int v = 0; v < n; ++v) {
    if (!(pi[v] > 0.0))
      throw std::runtime_error("invariant_distribution: nonpositive mass at " +
                               g.vertex_name(v));
    out[v] = pi[v];
  }
  return out;
}

// Time reversal: the edge that ran x -> y now runs y -> x and carries
// pi_x p / pi_y.  Aligned with reverse(g), which keeps edge ids and order.
inline Environment reversed_environment(const DirectedMultigraph& g,
                                        const Environment& env) {
  const std::vector<double> pi = invariant_distribution(g, env);
  Environment rev;
  rev.p.resize(env.p.size());
  for (int i = 0; i < g.edge_count(); ++i) {
    const Edge& e = g.edge(i);
    rev.p[i] = pi[e.tail] * env.p[i] / pi[e.head];
  }
  return rev;
}

// Green function at the root through the identification route: merge the
// cemetery into x0, reverse the now strongly connected quotient, and sum the
// reversed probabilities of the edges that used to enter the cemetery.
inline double green_via_reversal(const DirectedMultigraph& g,
                                 const Environment& env, int x0) {
  if (!g.cemetery())
    throw std::invalid_argument("green_via_reversal: graph has no cemetery");
  const int dv = *g.cemetery();
  if (x0 == dv) throw std::invalid_argument("green_via_reversal: x0 is the cemetery");
  SurgeryResult quotient = identify_vertices(g, x0, dv);
  if (quotient.graph.cemetery())
    throw std::invalid_argument("green_via_reversal: quotient kept a cemetery");
  if (!is_strongly_connected(quotient.graph))
    throw std::invalid_argument("green_via_reversal: quotient is not strongly connected");
  // Identification keeps edge ids and order, so env carries over unchanged.
  const Environment rev = reversed_environment(quotient.graph, env);
  double exit_mass = 0.0;
  for (const Edge& e : g.edges())
    if (e.head == dv) exit_mass += rev.p[quotient.graph.index_of_edge(e.id)];
  if (!(exit_mass > 0.0))
    throw std::runtime_error("green_via_reversal: no mass on former cemetery edges");
  return 1.0 / exit_mass;
}

struct Walk {
  std::vector<int> vertices;
  bool absorbed = false;
};

inline Walk simulate_walk(const DirectedMultigraph& g, const Environment& env,
                          int x0, std::int64_t max_steps, Rng& rng) {
  if (max_steps < 1) throw std::invalid_argument("simulate_walk: max_steps < 1");
  validate_environment(g, env);
  Walk w;
  w.vertices.push_back(x0);
  int here = x0;
  for (std::int64_t step = 0; step < max_steps; ++step) {
    if (g.is_cemetery(here)) break;
    const auto& out = g.out_edges(here);
    if (out.empty())
      throw std::invalid_argument("simulate_walk: stuck at " + g.vertex_name(here));
    const double u = rng.uniform();
    double acc = 0.0;
    int chosen = out.back();
    for (int e : out) {
      acc += env.p[e];
      if (u < acc) {
        chosen = e;
        break;
      }
    }
    here = g.edge(chosen).head;
    w.vertices.push_back(here);
    if (g.is_cemetery(here)) break;
  }
  w.absorbed = g.is_cemetery(here);
  return w;
}

// n independent draws of G(x0, x0), one exactly solved linear system per
// sampled environment.  Replicates are keyed by index, so the series does
// not depend on the thread count.
inline std::vector<double> sample_green_series(const DirectedMultigraph& g,
                                               const EdgeWeights& alpha, int x0,
                                               int n, std::uint64_t seed) {
  detail::require_absorbing(g);
  if (x0 < 0 || x0 >= g.vertex_count() || g.is_cemetery(x0))
    throw std::invalid_argument("sample_green_series: invalid root");
  std::vector<double> out(n);
  parallel_for(n, [&](std::int64_t i) {
    const Environment env =
        sample_environment(g, alpha, seed, static_cast<std::uint64_t>(i));
    const TransitionMatrix tm = transition_matrix(g, env);
    const Eigen::VectorXd col =
        detail::solve_green_column(tm.P, tm.state_of_vertex[x0]);
    out[i] = col[tm.state_of_vertex[x0]];
  });
  return out;
}

}  // namespace rwde

#endif  // RWDE_CHAIN_HPP_
