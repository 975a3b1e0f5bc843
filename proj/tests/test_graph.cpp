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

#include "rwde/graph.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <set>
#include <sstream>

using rwde::DirectedMultigraph;
using rwde::EdgeWeights;
using rwde::VertexSubset;

namespace {

// Independent oracle for subset enumeration: test every vertex subset of
// size <= max_size containing x0 for connectedness in the undirected shadow.
std::set<VertexSubset> brute_force_connected_subsets(const DirectedMultigraph& g,
                                                     int x0, int max_size) {
  const int n = g.vertex_count();
  std::set<VertexSubset> out;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (!(mask & (1u << x0))) continue;
    VertexSubset s;
    for (int v = 0; v < n; ++v)
      if (mask & (1u << v)) s.push_back(v);
    if (static_cast<int>(s.size()) > max_size) continue;
    if (g.cemetery() &&
        std::count(s.begin(), s.end(), *g.cemetery()) > 0)
      continue;
    // connectivity by BFS inside s
    std::set<int> in(s.begin(), s.end());
    std::vector<int> stack{x0};
    std::set<int> seen{x0};
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      auto visit = [&](int u) {
        if (in.count(u) && !seen.count(u)) {
          seen.insert(u);
          stack.push_back(u);
        }
      };
      for (int e : g.out_edges(v)) visit(g.edge(e).head);
      for (int e : g.in_edges(v)) visit(g.edge(e).tail);
    }
    if (seen.size() == s.size()) out.insert(s);
  }
  return out;
}

}  // namespace

TEST_CASE("lattice ball sizes in Z^3", "[graph]") {
  // |sphere r| = 4r^2 + 2 in Z^3, so |ball 1| = 7 and |ball 2| = 25.
  const auto b1 = rwde::builders::lattice_ball_zd(3, 1);
  REQUIRE(b1.vertex_count() == 7);
  REQUIRE(b1.edge_count() == 12);  // six undirected spokes, both directions

  const auto b2 = rwde::builders::lattice_ball_zd(3, 2);
  REQUIRE(b2.vertex_count() == 25);
  const auto ball = rwde::ball_vertices(b2, *b2.root(), 2);
  REQUIRE(ball.size() == 25);
  REQUIRE(rwde::ball_vertices(b2, *b2.root(), 1).size() == 7);
}

TEST_CASE("truncation redirects exits to a fresh cemetery", "[graph]") {
  const auto ambient = rwde::builders::lattice_ball_zd(3, 2);
  const auto trunc = rwde::truncate_to_cemetery(ambient, *ambient.root(), 1);
  const auto& g = trunc.graph;
  REQUIRE(g.vertex_count() == 8);
  REQUIRE(g.cemetery().has_value());
  const int x0 = *g.root();
  REQUIRE(g.out_edges(x0).size() == 6);
  int to_origin = 0, to_delta = 0;
  for (int v = 0; v < g.vertex_count(); ++v) {
    if (v == x0 || g.is_cemetery(v)) continue;
    REQUIRE(g.out_edges(v).size() == 6);
    for (int e : g.out_edges(v)) {
      if (g.edge(e).head == x0) ++to_origin;
      if (g.is_cemetery(g.edge(e).head)) ++to_delta;
    }
  }
  REQUIRE(to_origin == 6);
  REQUIRE(to_delta == 30);
  REQUIRE(g.edge_count() == 42);

  // Ids survive the surgery, so one weight table serves both graphs.
  const auto w = EdgeWeights::uniform(ambient, 1.0);
  for (const auto& e : g.edges()) REQUIRE(w.at(e.id) == 1.0);
}

TEST_CASE("divergence of the uniform weighting on a truncation", "[graph]") {
  const auto ambient = rwde::builders::lattice_ball_zd(3, 2);
  const auto trunc = rwde::truncate_to_cemetery(ambient, *ambient.root(), 1);
  const auto& g = trunc.graph;
  const auto w = EdgeWeights::uniform(ambient, 1.0);
  REQUIRE(rwde::divergence(g, w, *g.root()) == 0.0);
  double total = 0.0;
  for (int v = 0; v < g.vertex_count(); ++v) {
    if (g.is_cemetery(v)) continue;
    const double dv = rwde::divergence(g, w, v);
    if (v != *g.root()) REQUIRE(dv == 5.0);
    total += dv;
  }
  REQUIRE(total == 30.0);  // balances the cemetery in-flow
}

TEST_CASE("edge boundary of an origin-neighbor pair", "[graph]") {
  const auto g = rwde::builders::lattice_ball_zd(3, 2);
  const int origin = *g.root();
  const int e1 = g.vertex("1,0,0");
  const auto ids = rwde::edge_boundary(g, VertexSubset{origin, e1});
  REQUIRE(ids.size() == 10);  // five exits from each endpoint
  const auto w = EdgeWeights::uniform(g, 1.0);
  REQUIRE(rwde::boundary_weight(g, w, {origin, e1}) == 10.0);
}

TEST_CASE("boundary ignores loops inside the set", "[graph]") {
  auto g = rwde::builders::two_vertex_full();
  const auto ids = rwde::edge_boundary(g, VertexSubset{g.vertex("a")});
  REQUIRE(ids == std::vector<int>{1});  // only a->b; the loop stays internal
}

TEST_CASE("identification merges endpoints and keeps edge order", "[graph]") {
  const auto g = rwde::builders::two_cycle_graph();
  const auto r = rwde::identify_vertices(g, *g.root(), *g.cemetery());
  const auto& q = r.graph;
  REQUIRE(q.vertex_count() == 2);
  REQUIRE_FALSE(q.cemetery().has_value());
  REQUIRE(rwde::is_strongly_connected(q));
  REQUIRE(q.edge_count() == 3);
  for (int i = 0; i < 3; ++i) REQUIRE(q.edge(i).id == g.edge(i).id);
  // Edge 2 (x1 -> delta) now returns to the merged root.
  REQUIRE(q.edge(2).head == r.vertex_map[*g.root()]);
}

TEST_CASE("quotient of a truncation is strongly connected when every vertex "
          "reaches the cemetery and is reachable from the root",
          "[graph]") {
  const auto ambient = rwde::builders::lattice_ball_zd(3, 2);
  const auto trunc = rwde::truncate_to_cemetery(ambient, *ambient.root(), 1);
  const auto& g = trunc.graph;
  REQUIRE(rwde::all_reach(g, *g.cemetery()));
  REQUIRE(rwde::all_reachable_from(g, *g.root()));
  const auto q = rwde::identify_vertices(g, *g.root(), *g.cemetery());
  REQUIRE(rwde::is_strongly_connected(q.graph));
}

TEST_CASE("reversal flips edges and keeps ids", "[graph]") {
  const auto g = rwde::builders::two_cycle_graph();
  const auto r = rwde::reverse(g);
  REQUIRE(r.edge_count() == g.edge_count());
  for (int i = 0; i < g.edge_count(); ++i) {
    REQUIRE(r.edge(i).id == g.edge(i).id);
    REQUIRE(r.edge(i).tail == g.edge(i).head);
    REQUIRE(r.edge(i).head == g.edge(i).tail);
  }
  REQUIRE_FALSE(r.cemetery().has_value());
}

TEST_CASE("connected subsets of the radius-1 ball", "[graph]") {
  const auto g = rwde::builders::lattice_ball_zd(3, 1);
  const auto subsets = rwde::connected_subsets_containing(g, *g.root(), 2);
  REQUIRE(subsets.size() == 7);  // {0} and the six {0, +-e_i}
}

TEST_CASE("subset enumeration agrees with brute force and never repeats",
          "[graph]") {
  const auto g = rwde::builders::lattice_ball_zd(2, 2);
  for (int cap : {1, 2, 3, 4}) {
    const auto subsets = rwde::connected_subsets_containing(g, *g.root(), cap);
    std::set<VertexSubset> unique(subsets.begin(), subsets.end());
    REQUIRE(unique.size() == subsets.size());
    REQUIRE(unique == brute_force_connected_subsets(g, *g.root(), cap));
  }
}

TEST_CASE("subset enumeration skips the cemetery", "[graph]") {
  const auto g = rwde::builders::two_cycle_graph();
  const auto subsets = rwde::connected_subsets_containing(g, *g.root(), 3);
  for (const auto& s : subsets)
    REQUIRE(std::count(s.begin(), s.end(), *g.cemetery()) == 0);
  REQUIRE(subsets.size() == 2);  // {x0}, {x0, x1}
}

TEST_CASE("free group ball counts follow the tree count", "[graph]") {
  // Root has 2*rank neighbors; every other vertex continues in 2*rank - 1
  // ways, so radius 2 at rank 2 holds 1 + 4 + 12 = 17 words.
  const auto g = rwde::builders::free_group_cayley_ball(2, 2);
  REQUIRE(g.vertex_count() == 17);
  REQUIRE(g.out_edges(*g.root()).size() == 4);
  REQUIRE(rwde::ball_vertices(g, *g.root(), 1).size() == 5);
  const auto g1 = rwde::builders::free_group_cayley_ball(2, 1);
  REQUIRE(g1.vertex_count() == 5);
  REQUIRE(g1.edge_count() == 8);  // four undirected spokes
}

TEST_CASE("cemetery invariant: no outgoing edges", "[graph]") {
  DirectedMultigraph g;
  const int a = g.add_vertex("a");
  const int d = g.add_vertex("d");
  g.add_edge(a, d);
  g.set_cemetery(d);
  REQUIRE_THROWS_AS(g.add_edge(d, a), std::invalid_argument);
  DirectedMultigraph h;
  const int u = h.add_vertex("u");
  const int v = h.add_vertex("v");
  h.add_edge(u, v);
  h.add_edge(v, u);
  REQUIRE_THROWS_AS(h.set_cemetery(v), std::invalid_argument);
}

TEST_CASE("edge weights must be positive and present", "[graph]") {
  EdgeWeights w;
  REQUIRE_THROWS_AS(w.set(0, 0.0), std::invalid_argument);
  REQUIRE_THROWS_AS(w.set(0, -1.0), std::invalid_argument);
  REQUIRE_THROWS_AS(w.at(3), std::invalid_argument);
}

TEST_CASE("edge list files round-trip byte for byte", "[graph]") {
  const auto ambient = rwde::builders::lattice_ball_zd(2, 2);
  const auto trunc = rwde::truncate_to_cemetery(ambient, *ambient.root(), 1);
  EdgeWeights w;
  double x = 0.1;
  for (const auto& e : trunc.graph.edges()) {
    w.set(e.id, x);
    x += 1.0 / 3.0;
  }
  std::ostringstream first;
  rwde::write_edge_list(first, trunc.graph, w);

  std::istringstream in(first.str());
  const auto loaded = rwde::read_edge_list(in);
  REQUIRE(loaded.graph.vertex_count() == trunc.graph.vertex_count());
  REQUIRE(loaded.graph.edge_count() == trunc.graph.edge_count());
  REQUIRE(loaded.graph.cemetery().has_value());
  REQUIRE(loaded.graph.root().has_value());

  std::ostringstream second;
  rwde::write_edge_list(second, loaded.graph, loaded.weights);
  REQUIRE(first.str() == second.str());

  // A header-only cemetery (nothing redirected) still round-trips.
  const auto small = rwde::builders::lattice_ball_zd(2, 1);
  const auto iso = rwde::truncate_to_cemetery(small, *small.root(), 1);
  std::ostringstream dump;
  rwde::write_edge_list(dump, iso.graph, EdgeWeights::uniform(iso.graph, 1.0));
  std::istringstream back(dump.str());
  const auto again = rwde::read_edge_list(back);
  REQUIRE(again.graph.cemetery().has_value());
  REQUIRE(again.graph.out_edges(*again.graph.cemetery()).empty());
}

TEST_CASE("per-direction lattice weights", "[graph]") {
  const auto g = rwde::builders::lattice_ball_zd(3, 1);
  const std::vector<double> alpha{3, 1, 1, 1, 1, 1};  // heavy +e_1
  const auto w = rwde::builders::lattice_direction_weights(g, 3, alpha);
  const int origin = *g.root();
  double total = 0.0;
  for (int e : g.out_edges(origin)) total += w.at(g.edge(e).id);
  REQUIRE(total == 8.0);
  const int e1 = g.vertex("1,0,0");
  for (int e : g.out_edges(origin))
    if (g.edge(e).head == e1) REQUIRE(w.at(g.edge(e).id) == 3.0);
}

TEST_CASE("binary tree with ray has disconnected annuli", "[graph]") {
  const auto g = rwde::builders::binary_tree_ray(3, 4);
  REQUIRE(g.vertex_count() == 1 + 2 + 4 + 8 + 4);
  // Vertices at distance exactly 2 from the root: four tree nodes plus one
  // ray node, with no edges among them.
  const auto d = rwde::shadow_distances(g, *g.root());
  int at2 = 0;
  for (int v = 0; v < g.vertex_count(); ++v)
    if (d[v] == 2) ++at2;
  REQUIRE(at2 == 5);
}
