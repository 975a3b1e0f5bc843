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

#ifndef RWDE_DIRICHLET_HPP_
#define RWDE_DIRICHLET_HPP_

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "rwde/graph.hpp"
#include "rwde/rng.hpp"

namespace rwde {

// Transition probabilities aligned with the graph's edge order.  Reversal
// and identification preserve edge order, so an environment sampled on a
// graph stays aligned on those derived graphs; truncations drop edges and
// need a fresh sample.
struct Environment {
  std::vector<double> p;

  double at(int edge_index) const { return p.at(edge_index); }
};

inline std::vector<double> sample_dirichlet(const std::vector<double>& weights,
                                            Rng& rng) {
  if (weights.empty())
    throw std::invalid_argument("sample_dirichlet: empty weight vector");
  std::vector<double> x(weights.size());
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(weights[i] > 0.0))
      throw std::invalid_argument("sample_dirichlet: weights must be positive");
    x[i] = rng.gamma(weights[i]);
    total += x[i];
  }
  for (double& v : x) v /= total;
  return x;
}

// One environment draw: an independent Dirichlet block at every non-cemetery
// vertex.  The stream for a vertex is keyed by (seed, replicate, vertex), so
// replicates can be generated in any order or thread layout and still match.
inline Environment sample_environment(const DirectedMultigraph& g,
                                      const EdgeWeights& alpha,
                                      std::uint64_t seed, std::uint64_t replicate) {
  Environment env;
  env.p.assign(g.edge_count(), 0.0);
  for (int v = 0; v < g.vertex_count(); ++v) {
    if (g.is_cemetery(v)) continue;
    const auto& out = g.out_edges(v);
    if (out.empty())
      throw std::invalid_argument("sample_environment: vertex " + g.vertex_name(v) +
                                  " has no outgoing edges and is not the cemetery");
    std::vector<double> w(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) w[i] = alpha.at(g.edge(out[i]).id);
    Rng rng = stream_for(seed, replicate, static_cast<std::uint64_t>(v));
    const auto block = sample_dirichlet(w, rng);
    for (std::size_t i = 0; i < out.size(); ++i) env.p[out[i]] = block[i];
  }
  return env;
}

inline void validate_environment(const DirectedMultigraph& g, const Environment& env,
                                 double tol = 1e-12) {
  if (env.p.size() != static_cast<std::size_t>(g.edge_count()))
    throw std::invalid_argument("environment size does not match graph");
  for (int v = 0; v < g.vertex_count(); ++v) {
    if (g.is_cemetery(v) || g.out_edges(v).empty()) continue;
    double s = 0.0;
    for (int e : g.out_edges(v)) {
      if (!(env.p[e] > 0.0))
        throw std::invalid_argument("environment has a nonpositive probability");
      s += env.p[e];
    }
    if (std::abs(s - 1.0) > tol)
      throw std::invalid_argument("environment block does not sum to one at " +
                                  g.vertex_name(v));
  }
}

// Log density of the environment under the product-Dirichlet measure with
// the given weights, with respect to the product of simplex measures that
// drop one coordinate per vertex.  Probabilities are clamped at 1e-300
// inside the logarithm only; an exact zero reports -infinity.
inline double log_density(const DirectedMultigraph& g, const Environment& env,
                          const EdgeWeights& alpha) {
  if (env.p.size() != static_cast<std::size_t>(g.edge_count()))
    throw std::invalid_argument("log_density: environment does not match graph");
  double logp = 0.0;
  for (int v = 0; v < g.vertex_count(); ++v) {
    if (g.is_cemetery(v)) continue;
    const auto& out = g.out_edges(v);
    if (out.empty()) continue;
    double ax = 0.0;
    for (int e : out) {
      const double a = alpha.at(g.edge(e).id);
      ax += a;
      const double p = env.p[e];
      if (p <= 0.0) return -std::numeric_limits<double>::infinity();
      logp += (a - 1.0) * std::log(std::max(p, 1e-300)) - std::lgamma(a);
    }
    logp += std::lgamma(ax);
  }
  return logp;
}

// Merges parallel edges (same tail and head) into one edge carrying the
// summed weight; the merged edge keeps the smallest id of its group.
// edge_map sends each old id to the id it was merged into.
struct QuotientResult {
  DirectedMultigraph graph;
  EdgeWeights weights;
  std::unordered_map<int, int> edge_map;
};

inline QuotientResult quotient_multi_edges(const DirectedMultigraph& g,
                                           const EdgeWeights& alpha) {
  QuotientResult r;
  for (int v = 0; v < g.vertex_count(); ++v) r.graph.add_vertex(g.vertex_name(v));
  std::unordered_map<std::int64_t, int> seen;  // (tail, head) -> kept id
  std::unordered_map<int, double> sums;
  for (const Edge& e : g.edges()) {
    const std::int64_t key =
        static_cast<std::int64_t>(e.tail) * g.vertex_count() + e.head;
    auto it = seen.find(key);
    if (it == seen.end()) {
      r.graph.add_edge_with_id(e.id, e.tail, e.head);
      seen.emplace(key, e.id);
      sums[e.id] = alpha.at(e.id);
      r.edge_map[e.id] = e.id;
    } else {
      sums[it->second] += alpha.at(e.id);
      r.edge_map[e.id] = it->second;
    }
  }
  for (const auto& [id, s] : sums) r.weights.set(id, s);
  if (g.cemetery()) r.graph.set_cemetery(*g.cemetery());
  if (g.root()) r.graph.set_root(*g.root());
  return r;
}

// Pushes an environment through a quotient by summing merged probabilities.
inline Environment pushforward_environment(const QuotientResult& q,
                                           const DirectedMultigraph& original,
                                           const Environment& env) {
  Environment out;
  out.p.assign(q.graph.edge_count(), 0.0);
  for (const Edge& e : original.edges()) {
    const int kept = q.edge_map.at(e.id);
    out.p[q.graph.index_of_edge(kept)] += env.p[original.index_of_edge(e.id)];
  }
  return out;
}

// CSV dump, one row per edge in graph order.
inline void write_environment_csv(std::ostream& os, const DirectedMultigraph& g,
                                  const Environment& env) {
  os << "edge_id,probability\n";
  char buf[64];
  for (int i = 0; i < g.edge_count(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", env.p[i]);
    os << g.edge(i).id << "," << buf << "\n";
  }
}

}  // namespace rwde

#endif  // RWDE_DIRICHLET_HPP_
