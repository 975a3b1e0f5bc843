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

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <vector>

#include "rwde/dirichlet.hpp"
#include "rwde/graph.hpp"
#include "rwde/reinforced.hpp"
#include "rwde/rng.hpp"

namespace {

// a <-> b with an exit from each, four distinct weights.
rwde::DirectedMultigraph two_state_exit_graph() {
  rwde::DirectedMultigraph g;
  const int a = g.add_vertex("a");
  const int b = g.add_vertex("b");
  const int dv = g.add_vertex("delta");
  g.add_edge(a, b);   // 0
  g.add_edge(a, dv);  // 1
  g.add_edge(b, a);   // 2
  g.add_edge(b, dv);  // 3
  g.set_root(a);
  g.set_cemetery(dv);
  return g;
}

}  // namespace

TEST_CASE("reinforced steps favor crossed edges", "[reinforced]") {
  const auto g = rwde::builders::two_vertex_full();
  const auto alpha = rwde::EdgeWeights::uniform(g, 1.0);
  rwde::Rng rng(321);

  // With fresh counts both exits of "a" are equally likely; after the loop
  // has been crossed once its next-step weight rises to 2/3.
  const int a = *g.find_vertex("a");
  int first_loop = 0, second_loop = 0;
  const int trials = 40000;
  for (int t = 0; t < trials; ++t) {
    rwde::ReinforcementCounts counts(g);
    const int e1 = rwde::derrw_step(g, alpha, counts, a, rng);
    CHECK(counts.total() == 1);
    if (g.edge(e1).id != 0) continue;
    ++first_loop;
    CHECK(counts.count[e1] == 1);
    const int e2 = rwde::derrw_step(g, alpha, counts, a, rng);
    if (g.edge(e2).id == 0) ++second_loop;
  }
  const double se_half = 3.0 * std::sqrt(0.25 / trials);
  CHECK(std::abs(first_loop / static_cast<double>(trials) - 0.5) < se_half);
  const double cond = second_loop / static_cast<double>(first_loop);
  const double se_cond = 3.0 * std::sqrt(2.0 / 9.0 / first_loop);
  CHECK(std::abs(cond - 2.0 / 3.0) < se_cond);
}

TEST_CASE("reinforced step requires exits and positive weights",
          "[reinforced]") {
  const auto g = rwde::builders::loop_graph();
  const auto alpha = rwde::EdgeWeights::uniform(g, 1.0);
  rwde::ReinforcementCounts counts(g);
  rwde::Rng rng(1);
  CHECK_THROWS(rwde::derrw_step(g, alpha, counts, *g.cemetery(), rng));
}

TEST_CASE("path probabilities follow the urn closed form", "[reinforced]") {
  const auto g = rwde::builders::two_vertex_full();
  const auto alpha = rwde::EdgeWeights::uniform(g, 1.0);

  // Single step: alpha_e / alpha_x.
  CHECK(rwde::annealed_path_probability(g, alpha, {0}) ==
        Catch::Approx(0.5));
  // Crossing the loop twice: (1/2) * (2/3).
  CHECK(rwde::annealed_path_probability(g, alpha, {0, 0}) ==
        Catch::Approx(1.0 / 3.0));
  CHECK_THROWS(rwde::annealed_path_probability(g, alpha, {1, 0}));
  CHECK_THROWS(rwde::annealed_path_probability(g, alpha, {0, 99}));
}

TEST_CASE("enumerated path laws are complete", "[reinforced]") {
  const auto loop = rwde::builders::loop_graph();
  rwde::EdgeWeights alpha;
  alpha.set(0, 2.0);
  alpha.set(1, 1.0);
  for (int length : {1, 2, 3, 4}) {
    const auto paths = rwde::enumerate_paths(loop, *loop.root(), length);
    double total = 0.0;
    for (const auto& p : paths)
      total += rwde::annealed_path_probability(loop, alpha, p);
    CHECK(total == Catch::Approx(1.0).margin(1e-14));
  }

  // Absorbed trajectories appear once, as shortened paths.
  const auto paths = rwde::enumerate_paths(loop, *loop.root(), 3);
  CHECK(paths.size() == 4);  // exit, loop-exit, loop-loop-exit, loop^3
}

TEST_CASE("path probability is exchangeable over crossing orders",
          "[reinforced]") {
  const auto g = rwde::builders::two_vertex_full();
  rwde::EdgeWeights alpha;
  alpha.set(0, 1.5);
  alpha.set(1, 0.7);
  alpha.set(2, 2.2);
  alpha.set(3, 0.4);

  // Group length-4 trajectories by their crossing multiset; the closed form
  // depends only on per-edge and per-vertex counts, never on order.
  std::map<std::vector<int>, std::vector<double>> groups;
  int grouped = 0;
  for (const auto& p : rwde::enumerate_paths(g, *g.find_vertex("a"), 4)) {
    std::vector<int> key = p;
    std::sort(key.begin(), key.end());
    groups[key].push_back(rwde::annealed_path_probability(g, alpha, p));
  }
  for (const auto& [key, probs] : groups) {
    if (probs.size() < 2) continue;
    ++grouped;
    for (double q : probs) CHECK(q == Catch::Approx(probs.front()));
  }
  CHECK(grouped >= 3);
}

TEST_CASE("path law matches the Dirichlet mixture by Monte Carlo",
          "[reinforced]") {
  const auto g = two_state_exit_graph();
  rwde::EdgeWeights alpha;
  alpha.set(0, 1.2);
  alpha.set(1, 0.8);
  alpha.set(2, 2.0);
  alpha.set(3, 1.0);

  // Path a->b->a->b crosses edge 0 twice and edge 2 once.
  const std::vector<int> path{0, 2, 0};
  const double exact = rwde::annealed_path_probability(g, alpha, path);

  const std::size_t n = 100000;
  double sum = 0.0, sumsq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto env = rwde::sample_environment(g, alpha, 777, i);
    const double q = env.at(0) * env.at(2) * env.at(0);
    sum += q;
    sumsq += q * q;
  }
  const double mean = sum / n;
  const double var = (sumsq / n - mean * mean) / n;
  CHECK(std::abs(mean - exact) < 3.0 * std::sqrt(var));
}

TEST_CASE("reinforced and annealed walks share one path law", "[reinforced]") {
  const auto loop = rwde::builders::loop_graph();
  rwde::EdgeWeights alpha;
  alpha.set(0, 2.0);
  alpha.set(1, 1.0);
  const auto rep =
      rwde::equivalence_test(loop, alpha, *loop.root(), 3, 20000, 91);
  CHECK(rep.summary.pass);
  CHECK(rep.summary.statistic < 0.02);
  CHECK(rep.path.size() == 4);

  double exact_total = 0.0, derrw_total = 0.0, rwde_total = 0.0;
  for (std::size_t i = 0; i < rep.path.size(); ++i) {
    exact_total += rep.exact_prob[i];
    derrw_total += rep.derrw_freq[i];
    rwde_total += rep.rwde_freq[i];
  }
  CHECK(exact_total == Catch::Approx(1.0).margin(1e-12));
  CHECK(derrw_total == Catch::Approx(1.0).margin(1e-12));
  CHECK(rwde_total == Catch::Approx(1.0).margin(1e-12));

  // Single-step frequencies sit within three standard errors of the exact
  // first-step law alpha_e / alpha_x.
  const auto one =
      rwde::equivalence_test(loop, alpha, *loop.root(), 1, 20000, 17);
  for (std::size_t i = 0; i < one.path.size(); ++i) {
    const double p = one.exact_prob[i];
    const double se = std::sqrt(p * (1.0 - p) / 20000.0);
    CHECK(std::abs(one.derrw_freq[i] - p) < 3.0 * se);
    CHECK(std::abs(one.rwde_freq[i] - p) < 3.0 * se);
  }

  // Identical seeds reproduce the report bit for bit.
  const auto rep2 =
      rwde::equivalence_test(loop, alpha, *loop.root(), 3, 20000, 91);
  CHECK(rep2.derrw_freq == rep.derrw_freq);
  CHECK(rep2.rwde_freq == rep.rwde_freq);
}

TEST_CASE("equivalence holds on the radius-1 lattice truncation",
          "[reinforced]") {
  const auto ambient = rwde::builders::lattice_ball_zd(3, 2);
  const auto trunc =
      rwde::truncate_to_cemetery(ambient, *ambient.root(), 1);
  const auto& g = trunc.graph;
  const auto alpha = rwde::EdgeWeights::uniform(g, 1.0);
  // The 66-cell path space needs ~10^5 walks for the empirical laws to land
  // within 0.02 of each other in total variation.
  const auto rep =
      rwde::equivalence_test(g, alpha, *g.root(), 3, 100000, 2024);
  INFO("max TV " << rep.summary.statistic);
  CHECK(rep.summary.pass);
}

TEST_CASE("equivalence test rejects infeasible inputs", "[reinforced]") {
  const auto loop = rwde::builders::loop_graph();
  rwde::EdgeWeights alpha;
  alpha.set(0, 2.0);
  alpha.set(1, 1.0);
  CHECK_THROWS(rwde::equivalence_test(loop, alpha, *loop.root(), 7, 20000, 1));
  CHECK_THROWS(rwde::equivalence_test(loop, alpha, *loop.root(), 3, 500, 1));

  rwde::DirectedMultigraph star;
  const int hub = star.add_vertex("hub");
  rwde::EdgeWeights w;
  for (int i = 0; i < 7; ++i) {
    const int leaf = star.add_vertex("leaf" + std::to_string(i));
    w.set(star.edge(star.add_edge(hub, leaf)).id, 1.0);
  }
  CHECK_THROWS(rwde::equivalence_test(star, w, hub, 1, 20000, 1));
}

TEST_CASE("path law table serializes as CSV", "[reinforced]") {
  const auto loop = rwde::builders::loop_graph();
  rwde::EdgeWeights alpha;
  alpha.set(0, 2.0);
  alpha.set(1, 1.0);
  const auto rep =
      rwde::equivalence_test(loop, alpha, *loop.root(), 2, 10000, 5);
  std::ostringstream os;
  rwde::write_path_law_csv(os, rep);
  const std::string text = os.str();
  CHECK(text.rfind("path,exact_prob,derrw_freq,rwde_freq\n", 0) == 0);
  CHECK(text.find("0>1") != std::string::npos);
  CHECK(std::count(text.begin(), text.end(), '\n') ==
        static_cast<long>(rep.path.size()) + 1);
}
