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

#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/distributions/beta.hpp>

#include "rwde/dirichlet.hpp"
#include "rwde/graph.hpp"
#include "rwde/rng.hpp"
#include "rwde/stats.hpp"

namespace {

rwde::DirectedMultigraph parallel_pair_graph() {
  // a has two parallel edges to b plus one to c; b and c exit to delta.
  rwde::DirectedMultigraph g;
  const int a = g.add_vertex("a");
  const int b = g.add_vertex("b");
  const int c = g.add_vertex("c");
  const int dv = g.add_vertex("delta");
  g.add_edge(a, b);   // id 0
  g.add_edge(a, b);   // id 1
  g.add_edge(a, c);   // id 2
  g.add_edge(b, dv);  // id 3
  g.add_edge(c, dv);  // id 4
  g.set_cemetery(dv);
  g.set_root(a);
  return g;
}

}  // namespace

TEST_CASE("dirichlet marginals are beta", "[dirichlet]") {
  rwde::Rng rng(314);
  const int n = 20000;
  std::vector<double> first(n);
  for (int i = 0; i < n; ++i) first[i] = rwde::sample_dirichlet({2.0, 3.0}, rng)[0];
  const auto report = rwde::ks_test_beta(first, {2.0, 3.0}, "dir marginal");
  INFO(report.name << " p=" << report.p_value);
  CHECK(report.pass);
}

TEST_CASE("dirichlet grouped sums stay dirichlet", "[dirichlet]") {
  // (x0+x1, x2+x3) for Dirichlet(1,2,3,4) is Dirichlet(3,7); first coordinate
  // is Beta(3,7).
  rwde::Rng rng(2718);
  const int n = 20000;
  std::vector<double> grouped(n);
  for (int i = 0; i < n; ++i) {
    const auto x = rwde::sample_dirichlet({1.0, 2.0, 3.0, 4.0}, rng);
    grouped[i] = x[0] + x[1];
  }
  const auto report = rwde::ks_test_beta(grouped, {3.0, 7.0}, "dir grouped");
  INFO(report.name << " p=" << report.p_value);
  CHECK(report.pass);
}

TEST_CASE("dirichlet sampler guards", "[dirichlet]") {
  rwde::Rng rng(1);
  CHECK_THROWS(rwde::sample_dirichlet({}, rng));
  CHECK_THROWS(rwde::sample_dirichlet({1.0, 0.0}, rng));
  const auto x = rwde::sample_dirichlet({5.0, 5.0, 5.0}, rng);
  CHECK(std::abs(x[0] + x[1] + x[2] - 1.0) < 1e-12);
}

TEST_CASE("environments are valid and reproducible", "[dirichlet]") {
  const auto ambient = rwde::builders::lattice_ball_zd(3, 2);
  const auto trunc = rwde::truncate_to_cemetery(ambient, *ambient.root(), 1);
  const auto alpha = rwde::EdgeWeights::uniform(trunc.graph, 1.0);

  const auto env = rwde::sample_environment(trunc.graph, alpha, 99, 0);
  rwde::validate_environment(trunc.graph, env);

  const auto again = rwde::sample_environment(trunc.graph, alpha, 99, 0);
  CHECK(env.p == again.p);

  const auto other = rwde::sample_environment(trunc.graph, alpha, 99, 1);
  CHECK(env.p != other.p);
  const auto reseeded = rwde::sample_environment(trunc.graph, alpha, 100, 0);
  CHECK(env.p != reseeded.p);
}

TEST_CASE("environment blocks depend only on seed, replicate, vertex",
          "[dirichlet]") {
  // Editing later vertices must not disturb the block at an earlier vertex.
  rwde::DirectedMultigraph g1;
  const int x0 = g1.add_vertex("x0");
  const int d1 = g1.add_vertex("delta");
  g1.add_edge(x0, x0);
  g1.add_edge(x0, d1);
  g1.set_cemetery(d1);

  rwde::DirectedMultigraph g2;
  const int y0 = g2.add_vertex("x0");
  const int d2 = g2.add_vertex("delta");
  const int extra = g2.add_vertex("extra");
  g2.add_edge(y0, y0);
  g2.add_edge(y0, d2);
  g2.add_edge(extra, d2);
  g2.set_cemetery(d2);

  const auto a1 = rwde::EdgeWeights::uniform(g1, 2.0);
  auto a2 = rwde::EdgeWeights::uniform(g2, 2.0);
  const auto e1 = rwde::sample_environment(g1, a1, 7, 3);
  const auto e2 = rwde::sample_environment(g2, a2, 7, 3);
  CHECK(e1.p[0] == e2.p[0]);
  CHECK(e1.p[1] == e2.p[1]);
}

TEST_CASE("environment sampling rejects dead ends", "[dirichlet]") {
  rwde::DirectedMultigraph g;
  const int a = g.add_vertex("a");
  g.add_vertex("stuck");
  g.add_edge(a, a);
  const auto alpha = rwde::EdgeWeights::uniform(g, 1.0);
  CHECK_THROWS(rwde::sample_environment(g, alpha, 1, 0));
}

TEST_CASE("quotient merges parallel edges and sums weights", "[dirichlet]") {
  const auto g = parallel_pair_graph();
  rwde::EdgeWeights alpha;
  alpha.set(0, 3.0);
  alpha.set(1, 1.0);
  alpha.set(2, 1.0);
  alpha.set(3, 1.0);
  alpha.set(4, 1.0);

  const auto q = rwde::quotient_multi_edges(g, alpha);
  CHECK(q.graph.edge_count() == 4);
  CHECK(q.weights.at(0) == 4.0);
  CHECK(q.weights.at(2) == 1.0);
  CHECK(q.edge_map.at(1) == 0);
  CHECK(q.edge_map.at(0) == 0);
  CHECK(q.edge_map.at(2) == 2);
  REQUIRE(q.graph.cemetery().has_value());
  CHECK(q.graph.vertex_name(*q.graph.cemetery()) == "delta");
}

TEST_CASE("pushforward of an environment follows the merged dirichlet law",
          "[dirichlet]") {
  // Aggregation: (p0 + p1, p2) ~ Dirichlet(3 + 1, 1), so the merged edge
  // probability is Beta(4, 1).
  const auto g = parallel_pair_graph();
  rwde::EdgeWeights alpha;
  alpha.set(0, 3.0);
  alpha.set(1, 1.0);
  alpha.set(2, 1.0);
  alpha.set(3, 1.0);
  alpha.set(4, 1.0);
  const auto q = rwde::quotient_multi_edges(g, alpha);

  const int n = 20000;
  std::vector<double> merged(n);
  for (int i = 0; i < n; ++i) {
    const auto env = rwde::sample_environment(g, alpha, 5150, i);
    const auto pushed = rwde::pushforward_environment(q, g, env);
    rwde::validate_environment(q.graph, pushed);
    merged[i] = pushed.p[q.graph.index_of_edge(0)];
  }
  const auto report = rwde::ks_test_beta(merged, {4.0, 1.0}, "pushforward");
  INFO(report.name << " p=" << report.p_value);
  CHECK(report.pass);
}

TEST_CASE("log density matches the beta density on one-block graphs",
          "[dirichlet]") {
  const auto g = rwde::builders::loop_graph();
  rwde::EdgeWeights alpha;
  alpha.set(0, 2.5);  // loop
  alpha.set(1, 1.5);  // exit
  const auto env = rwde::sample_environment(g, alpha, 8, 0);

  const boost::math::beta_distribution<double> ref(2.5, 1.5);
  const double expected = std::log(boost::math::pdf(ref, env.p[0]));
  CHECK(rwde::log_density(g, env, alpha) == Catch::Approx(expected).margin(1e-10));
}

TEST_CASE("single-exit blocks contribute nothing to the log density",
          "[dirichlet]") {
  // In the two-vertex cycle the root has one outgoing edge, a point mass, so
  // only the other block shows up in the density.
  const auto g = rwde::builders::two_cycle_graph();
  rwde::EdgeWeights alpha;
  alpha.set(0, 3.0);
  alpha.set(1, 2.0);
  alpha.set(2, 1.0);
  const auto env = rwde::sample_environment(g, alpha, 21, 4);

  const boost::math::beta_distribution<double> ref(2.0, 1.0);
  const double expected =
      std::log(boost::math::pdf(ref, env.p[g.index_of_edge(1)]));
  CHECK(rwde::log_density(g, env, alpha) == Catch::Approx(expected).margin(1e-10));
}

TEST_CASE("log density ratio follows the radon-nikodym formula", "[dirichlet]") {
  const auto g = rwde::builders::two_vertex_full();
  const auto alpha = rwde::EdgeWeights::uniform(g, 1.0);
  rwde::EdgeWeights beta;
  beta.set(0, 2.0);
  beta.set(1, 1.0);
  beta.set(2, 1.0);
  beta.set(3, 2.0);
  const auto env = rwde::sample_environment(g, alpha, 12, 0);

  // d(beta-law)/d(alpha-law) only involves edges where the weights differ.
  const double ratio = rwde::log_density(g, env, beta) -
                       rwde::log_density(g, env, alpha);
  const double expected =
      std::lgamma(3.0) - std::lgamma(2.0) + std::log(env.p[0]) +
      std::lgamma(3.0) - std::lgamma(2.0) + std::log(env.p[3]);
  CHECK(ratio == Catch::Approx(expected).margin(1e-10));
}

TEST_CASE("log density handles the boundary", "[dirichlet]") {
  const auto g = rwde::builders::loop_graph();
  const auto alpha = rwde::EdgeWeights::uniform(g, 1.0);
  rwde::Environment env;
  env.p = {0.0, 1.0};
  CHECK(rwde::log_density(g, env, alpha) ==
        -std::numeric_limits<double>::infinity());
  rwde::Environment bad;
  bad.p = {0.5};
  CHECK_THROWS(rwde::log_density(g, bad, alpha));
  CHECK_THROWS(rwde::validate_environment(g, bad));
}

TEST_CASE("environment csv uses full precision", "[dirichlet]") {
  const auto g = rwde::builders::loop_graph();
  const auto alpha = rwde::EdgeWeights::uniform(g, 1.0);
  const auto env = rwde::sample_environment(g, alpha, 3, 0);
  std::ostringstream os;
  rwde::write_environment_csv(os, g, env);
  const std::string text = os.str();
  CHECK(text.rfind("edge_id,probability\n", 0) == 0);
  char expect[64];
  std::snprintf(expect, sizeof expect, "%.17g", env.p[0]);
  CHECK(text.find(expect) != std::string::npos);
}
