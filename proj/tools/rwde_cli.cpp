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

// Batch experiment runner.  Every subcommand is deterministic given its
// flags: the master seed and a digest of the resolved arguments are stamped
// into each output, and reruns produce byte-identical files regardless of
// RWDE_THREADS.  Exit codes: 0 success, 1 usage or input error, 2 a
// statistical certification failed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rwde/chain.hpp"
#include "rwde/dirichlet.hpp"
#include "rwde/flow.hpp"
#include "rwde/graph.hpp"
#include "rwde/occupation.hpp"
#include "rwde/parallel.hpp"
#include "rwde/reinforced.hpp"
#include "rwde/report.hpp"
#include "rwde/rng.hpp"
#include "rwde/stats.hpp"

namespace {

using rwde::format_g17;
using rwde::ReportMeta;

// ---------------------------------------------------------------------------
// Rendering helpers.  JSON is written by hand so floats always carry 17
// significant digits and key order is fixed.

std::string csv_quote(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string json_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

// One flat record emitted as a JSON object or a single-row CSV.
class FlatRecord {
 public:
  void add_string(const std::string& k, const std::string& v) {
    fields_.push_back({k, json_quote(v), csv_quote(v)});
  }
  void add_number(const std::string& k, double v) {
    fields_.push_back({k, format_g17(v), format_g17(v)});
  }
  void add_integer(const std::string& k, long long v) {
    fields_.push_back({k, std::to_string(v), std::to_string(v)});
  }
  void add_bool(const std::string& k, bool v) {
    const std::string s = v ? "true" : "false";
    fields_.push_back({k, s, s});
  }
  void add_string_array(const std::string& k,
                        const std::vector<std::string>& xs) {
    std::string j = "[", c;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i) {
        j += ',';
        c += ';';
      }
      j += json_quote(xs[i]);
      c += xs[i];
    }
    j += ']';
    fields_.push_back({k, j, csv_quote(c)});
  }
  void add_number_array(const std::string& k, const std::vector<double>& xs) {
    std::string j = "[", c;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i) {
        j += ',';
        c += ';';
      }
      j += format_g17(xs[i]);
      c += format_g17(xs[i]);
    }
    j += ']';
    fields_.push_back({k, j, csv_quote(c)});
  }

  std::string render(const std::string& format, const ReportMeta& meta) const {
    if (format == "json") {
      std::string out = "{\"seed\":" + std::to_string(meta.seed) +
                        ",\"config\":" + json_quote(meta.config_digest);
      for (const auto& f : fields_) out += ',' + json_quote(f.key) + ':' + f.json;
      return out + "}\n";
    }
    std::string head, row;
    for (std::size_t i = 0; i < fields_.size(); ++i) {
      if (i) {
        head += ',';
        row += ',';
      }
      head += fields_[i].key;
      row += fields_[i].csv;
    }
    return "# seed=" + std::to_string(meta.seed) +
           "\n# config=" + meta.config_digest + "\n" + head + "\n" + row + "\n";
  }

 private:
  struct Field {
    std::string key, json, csv;
  };
  std::vector<Field> fields_;
};

// Tables default to CSV; the JSON mirror keeps every cell as the same
// pre-rendered string so both formats are byte-reproducible.
std::string render_table(const rwde::CsvReport& report, const ReportMeta& meta,
                         const std::string& format) {
  if (format == "json") {
    std::string out = "{\"seed\":" + std::to_string(meta.seed) +
                      ",\"config\":" + json_quote(meta.config_digest);
    for (const auto& [k, v] : report.comments())
      out += ',' + json_quote(k) + ':' + json_quote(v);
    out += ",\"columns\":[";
    for (std::size_t c = 0; c < report.columns().size(); ++c) {
      if (c) out += ',';
      out += json_quote(report.columns()[c]);
    }
    out += "],\"rows\":[";
    for (std::size_t r = 0; r < report.rows().size(); ++r) {
      if (r) out += ',';
      out += '[';
      for (std::size_t c = 0; c < report.rows()[r].size(); ++c) {
        if (c) out += ',';
        out += json_quote(report.rows()[r][c]);
      }
      out += ']';
    }
    return out + "]}\n";
  }
  std::ostringstream os;
  report.write(os, meta);
  return os.str();
}

void write_text(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open output file: " + path);
  os << content;
  os.flush();
  if (!os) throw std::runtime_error("failed writing output file: " + path);
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used])))
      ++used;
    if (used != item.size())
      throw std::invalid_argument("bad number in list: '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("empty number list");
  return out;
}

// ---------------------------------------------------------------------------
// Config splicing: `--config file.json` injects its key/value pairs as flags
// right after the subcommand, so explicit command-line flags override them.

std::vector<std::string> splice_config(std::vector<std::string> args) {
  std::string cfg_path;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size())
        throw std::invalid_argument("--config requires a file argument");
      cfg_path = args[++i];
    } else {
      rest.push_back(args[i]);
    }
  }
  if (cfg_path.empty()) return rest;
  if (rest.empty() || rest[0].rfind("--", 0) == 0)
    throw std::invalid_argument("--config requires a leading subcommand");

  std::ifstream is(cfg_path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read config file: " + cfg_path);
  std::string text((std::istreambuf_iterator<char>(is)),
                   std::istreambuf_iterator<char>());
  nlohmann::json parsed;
  try {
    parsed = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i)
      if (text[i] == '\n') ++line;
    throw std::invalid_argument("config " + cfg_path + ":" +
                                std::to_string(line) + ": " + e.what());
  }
  if (!parsed.is_object())
    throw std::invalid_argument("config " + cfg_path +
                                ":1: top level must be a JSON object");

  std::vector<std::string> tokens;
  for (const auto& [key, value] : parsed.items()) {
    if (value.is_boolean()) {
      if (value.get<bool>()) tokens.push_back("--" + key);
    } else if (value.is_string()) {
      tokens.push_back("--" + key);
      tokens.push_back(value.get<std::string>());
    } else if (value.is_number_integer()) {
      tokens.push_back("--" + key);
      tokens.push_back(std::to_string(value.get<long long>()));
    } else if (value.is_number()) {
      tokens.push_back("--" + key);
      tokens.push_back(format_g17(value.get<double>()));
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& item : value) {
        if (!joined.empty()) joined += ',';
        if (item.is_number_integer())
          joined += std::to_string(item.get<long long>());
        else if (item.is_number())
          joined += format_g17(item.get<double>());
        else if (item.is_string())
          joined += item.get<std::string>();
        else
          throw std::invalid_argument("config " + cfg_path +
                                      ": unsupported array entry under '" +
                                      key + "'");
      }
      tokens.push_back("--" + key);
      tokens.push_back(joined);
    } else {
      throw std::invalid_argument("config " + cfg_path +
                                  ": unsupported value for key '" + key + "'");
    }
  }
  std::vector<std::string> out;
  out.push_back(rest[0]);
  out.insert(out.end(), tokens.begin(), tokens.end());
  out.insert(out.end(), rest.begin() + 1, rest.end());
  return out;
}

// ---------------------------------------------------------------------------
// Graph and weight construction shared between subcommands.

struct LatticeSetup {
  rwde::DirectedMultigraph graph;  // radius-R truncation with cemetery
  rwde::EdgeWeights alpha;         // valid on the truncation (ids persist)
  int x0 = -1;
};

LatticeSetup lattice_setup(int d, int radius, double alpha_uniform,
                           const std::string& alpha_dirs) {
  if (d < 1) throw std::invalid_argument("--zd must be at least 1");
  if (radius < 1) throw std::invalid_argument("--radius must be at least 1");
  const auto ambient = rwde::builders::lattice_ball_zd(d, radius + 1);
  LatticeSetup s;
  rwde::EdgeWeights w;
  if (!alpha_dirs.empty())
    w = rwde::builders::lattice_direction_weights(ambient, d,
                                                  parse_double_list(alpha_dirs));
  else
    w = rwde::EdgeWeights::uniform(ambient, alpha_uniform);
  auto trunc = rwde::truncate_to_cemetery(ambient, *ambient.root(), radius);
  s.graph = std::move(trunc.graph);
  s.alpha = std::move(w);
  s.x0 = *s.graph.root();
  return s;
}

std::string cut_edges_joined(const std::vector<int>& edges) {
  std::string s;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (i) s += ';';
    s += std::to_string(edges[i]);
  }
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  int exit_code = 0;
  try {
    std::vector<std::string> raw_args(argv + 1, argv + argc);
    const std::vector<std::string> args = splice_config(std::move(raw_args));

    // Digest of the resolved invocation, embedded in every output.  Output
    // routing is skipped so the same experiment hashes the same wherever it
    // is written.
    std::string joined;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i] == "--out" || args[i] == "--ksweep") {
        ++i;
        continue;
      }
      joined += args[i];
      joined += '\x1f';
    }
    const std::string digest = rwde::hex64(rwde::fnv1a64(joined));

    CLI::App app{"random walks in Dirichlet environments: experiment runner"};
    app.require_subcommand(1);

    const auto make_sub = [&](const std::string& name, const std::string& desc) {
      CLI::App* sub = app.add_subcommand(name, desc);
      sub->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
      return sub;
    };

    // Options shared by every subcommand.
    struct Common {
      std::uint64_t seed = 1;
      std::string out;
      std::string format;
    };
    const auto add_common = [](CLI::App* sub, Common& c, const std::string& fmt) {
      c.format = fmt;
      sub->add_option("--seed", c.seed, "master seed");
      sub->add_option("--out", c.out, "output file (default stdout)");
      sub->add_option("--format", c.format, "output format")
          ->check(CLI::IsMember({"csv", "json"}));
    };

    // --- kappa ------------------------------------------------------------
    auto* kappa_cmd = make_sub("kappa", "critical exponent by closed form or cut enumeration");
    struct {
      Common common;
      int zd = 0;
      double alpha = 1.0;
      std::string alpha_dirs;
      int max_size = 4;
      bool enumerate = false;
      std::string graph;
      double alpha_loop = 2.0, alpha_exit = 1.0;
    } kappa_opt;
    add_common(kappa_cmd, kappa_opt.common, "json");
    kappa_cmd->add_option("--zd", kappa_opt.zd, "lattice dimension");
    kappa_cmd->add_option("--alpha", kappa_opt.alpha, "uniform weight");
    kappa_cmd->add_option("--alpha-dirs", kappa_opt.alpha_dirs,
                          "per-direction weights, 2d comma-separated");
    kappa_cmd->add_option("--max-size", kappa_opt.max_size, "cutset vertex cap");
    kappa_cmd->add_flag("--enumerate", kappa_opt.enumerate,
                        "cross-check the closed form by enumeration");
    kappa_cmd->add_option("--graph", kappa_opt.graph, "named graph: loop | free-group")
        ->check(CLI::IsMember({"loop", "free-group"}));
    kappa_cmd->add_option("--alpha-loop", kappa_opt.alpha_loop, "loop weight");
    kappa_cmd->add_option("--alpha-exit", kappa_opt.alpha_exit, "exit weight");
    kappa_cmd->callback([&] {
      const auto& o = kappa_opt;
      if ((o.zd > 0) == !o.graph.empty())
        throw std::invalid_argument("kappa: give exactly one of --zd or --graph");
      FlatRecord rec;
      rec.add_string("command", "kappa");
      if (o.zd > 0) {
        std::vector<double> w(2 * static_cast<std::size_t>(o.zd), o.alpha);
        if (!o.alpha_dirs.empty()) w = parse_double_list(o.alpha_dirs);
        const auto closed = rwde::kappa_zd(w, o.zd);
        rec.add_number("kappa", closed.value);
        rec.add_string_array("minimizer", closed.minimizer);
        rec.add_bool("attained_at_cap", false);
        rec.add_bool("loop_at_root", false);
        rec.add_string("method", "closed-form");
        if (o.enumerate) {
          const auto ball = rwde::builders::lattice_ball_zd(o.zd, o.max_size);
          const auto alpha =
              rwde::builders::lattice_direction_weights(ball, o.zd, w);
          const auto enumerated =
              rwde::kappa_min_cut(ball, alpha, *ball.root(), o.max_size);
          rec.add_number("enumerated_kappa", enumerated.value);
          const bool agree =
              std::abs(enumerated.value - closed.value) <= 1e-9;
          rec.add_bool("agree", agree);
          if (!agree) exit_code = 2;
        }
      } else if (o.graph == "loop") {
        const auto g = rwde::builders::loop_graph();
        rwde::EdgeWeights alpha;
        alpha.set(0, o.alpha_loop);
        alpha.set(1, o.alpha_exit);
        const auto r = rwde::kappa_min_cut(g, alpha, *g.root(), o.max_size);
        rec.add_number("kappa", r.value);
        rec.add_string_array("minimizer", r.minimizer);
        rec.add_bool("attained_at_cap", r.attained_at_cap);
        rec.add_bool("loop_at_root", r.loop_at_root);
        rec.add_string("method", "enumeration");
      } else {
        const auto g = rwde::builders::free_group_cayley_ball(2, o.max_size);
        const auto alpha = rwde::EdgeWeights::uniform(g, o.alpha);
        const auto r = rwde::kappa_min_cut(g, alpha, *g.root(), o.max_size);
        rec.add_number("kappa", r.value);
        rec.add_string_array("minimizer", r.minimizer);
        rec.add_bool("attained_at_cap", r.attained_at_cap);
        rec.add_bool("loop_at_root", r.loop_at_root);
        rec.add_string("method", "enumeration");
      }
      write_text(o.common.out,
                 rec.render(o.common.format, {o.common.seed, digest}));
    });

    // --- tail ---------------------------------------------------------------
    auto* tail_cmd = make_sub("tail", "tail exponent of G(x0,x0) on a lattice truncation");
    struct {
      Common common;
      int zd = 3;
      int radius = 2;
      double alpha = 0.2;
      std::string alpha_dirs;
      std::size_t n = 50000;
      std::size_t k = 0;
      std::string ksweep;
      double expect = std::numeric_limits<double>::quiet_NaN();
      double tol = 0.25;
    } tail_opt;
    add_common(tail_cmd, tail_opt.common, "json");
    tail_cmd->add_option("--zd", tail_opt.zd, "lattice dimension");
    tail_cmd->add_option("--radius", tail_opt.radius, "truncation radius");
    tail_cmd->add_option("--alpha", tail_opt.alpha, "uniform weight");
    tail_cmd->add_option("--alpha-dirs", tail_opt.alpha_dirs, "per-direction weights");
    tail_cmd->add_option("-n,--n", tail_opt.n, "number of environments");
    tail_cmd->add_option("--k", tail_opt.k, "Hill order statistic (0 = default)");
    tail_cmd->add_option("--ksweep", tail_opt.ksweep, "write a k-sweep CSV here");
    tail_cmd->add_option("--expect", tail_opt.expect, "expected exponent");
    tail_cmd->add_option("--tol", tail_opt.tol, "relative tolerance for --expect");
    tail_cmd->callback([&] {
      const auto& o = tail_opt;
      const auto setup = lattice_setup(o.zd, o.radius, o.alpha, o.alpha_dirs);
      const auto samples = rwde::sample_green_series(setup.graph, setup.alpha,
                                                     setup.x0, o.n, o.common.seed);
      const auto est = rwde::tail_exponent_hill(samples, o.k);
      FlatRecord rec;
      rec.add_string("command", "tail");
      rec.add_number("kappa_hat", est.kappa_hat);
      rec.add_number("ci_lo", est.ci_lo);
      rec.add_number("ci_hi", est.ci_hi);
      rec.add_integer("k", static_cast<long long>(est.k));
      rec.add_integer("n", static_cast<long long>(est.n));
      if (!std::isnan(o.expect)) {
        const bool within =
            std::abs(est.kappa_hat - o.expect) <= o.tol * std::abs(o.expect);
        rec.add_number("expect", o.expect);
        rec.add_number("tol", o.tol);
        rec.add_bool("within_tol", within);
        if (!within) exit_code = 2;
      }
      write_text(o.common.out,
                 rec.render(o.common.format, {o.common.seed, digest}));
      if (!o.ksweep.empty()) {
        rwde::CsvReport sweep({"k", "kappa_hat", "ci_lo", "ci_hi"});
        for (const auto& e :
             rwde::hill_sweep(samples, rwde::hill_sweep_grid(samples.size()))) {
          sweep.add_row({std::to_string(e.k), format_g17(e.kappa_hat),
                         format_g17(e.ci_lo), format_g17(e.ci_hi)});
        }
        write_text(o.ksweep, render_table(sweep, {o.common.seed, digest}, "csv"));
      }
    });

    // --- moment -------------------------------------------------------------
    auto* moment_cmd = make_sub("moment", "empirical moment of G(x0,x0) with divergence diagnostic");
    struct {
      Common common;
      int zd = 3;
      int radius = 2;
      double alpha = 0.2;
      std::string alpha_dirs;
      std::size_t n = 50000;
      double s = 1.0;
    } moment_opt;
    add_common(moment_cmd, moment_opt.common, "json");
    moment_cmd->add_option("--zd", moment_opt.zd, "lattice dimension");
    moment_cmd->add_option("--radius", moment_opt.radius, "truncation radius");
    moment_cmd->add_option("--alpha", moment_opt.alpha, "uniform weight");
    moment_cmd->add_option("--alpha-dirs", moment_opt.alpha_dirs, "per-direction weights");
    moment_cmd->add_option("-n,--n", moment_opt.n, "number of environments");
    moment_cmd->add_option("-s,--s", moment_opt.s, "moment order");
    moment_cmd->callback([&] {
      const auto& o = moment_opt;
      const auto setup = lattice_setup(o.zd, o.radius, o.alpha, o.alpha_dirs);
      const auto samples = rwde::sample_green_series(setup.graph, setup.alpha,
                                                     setup.x0, o.n, o.common.seed);
      const auto full = rwde::mc_moment(samples, o.s);
      const std::vector<double> head(samples.begin(),
                                     samples.begin() + samples.size() / 2);
      const auto half = rwde::mc_moment(head, o.s);
      const double scale = std::max(std::abs(full.value), 1e-300);
      FlatRecord rec;
      rec.add_string("command", "moment");
      rec.add_number("s", o.s);
      rec.add_number("estimate", full.value);
      rec.add_number("estimate_half", half.value);
      rec.add_number("rel_change", std::abs(full.value - half.value) / scale);
      rec.add_number("max_contribution", full.max_contribution);
      rec.add_number("standard_error", full.standard_error);
      rec.add_integer("n", static_cast<long long>(full.n));
      write_text(o.common.out,
                 rec.render(o.common.format, {o.common.seed, digest}));
    });

    // --- verify-reversal ------------------------------------------------------
    auto* rev_cmd = make_sub("verify-reversal",
                             "reversed environment marginals against their Beta law");
    struct {
      Common common;
      std::string graph = "two-vertex-full";
      double alpha = 1.0;
      std::size_t n = 10000;
      double significance = 0.01;
    } rev_opt;
    add_common(rev_cmd, rev_opt.common, "csv");
    rev_cmd->add_option("--graph", rev_opt.graph, "graph with zero weight divergence")
        ->check(CLI::IsMember({"two-vertex-full"}));
    rev_cmd->add_option("--alpha", rev_opt.alpha, "uniform weight");
    rev_cmd->add_option("-n,--n", rev_opt.n, "number of environments");
    rev_cmd->add_option("--significance", rev_opt.significance, "family-wise level");
    rev_cmd->callback([&] {
      const auto& o = rev_opt;
      const auto g = rwde::builders::two_vertex_full();
      const auto alpha = rwde::EdgeWeights::uniform(g, o.alpha);
      const auto rev_graph = rwde::reverse(g);

      std::vector<std::vector<double>> marginals(
          static_cast<std::size_t>(rev_graph.edge_count()));
      for (auto& m : marginals) m.resize(o.n);
      rwde::parallel_for(static_cast<std::int64_t>(o.n), [&](std::int64_t i) {
        const auto env = rwde::sample_environment(g, alpha, o.common.seed,
                                                  static_cast<std::uint64_t>(i));
        const auto rev = rwde::reversed_environment(g, env);
        for (int e = 0; e < rev_graph.edge_count(); ++e)
          marginals[e][i] = rev.p[e];
      });

      const double level = o.significance / rev_graph.edge_count();
      rwde::CsvReport table({"edge_id", "beta_a", "beta_b", "d_stat", "p_value", "pass"});
      bool all_pass = true;
      for (int e = 0; e < rev_graph.edge_count(); ++e) {
        const rwde::Edge& edge = rev_graph.edge(e);
        const double ae = alpha.at(edge.id);
        const double ax = rwde::vertex_weight(rev_graph, alpha, edge.tail);
        const auto r = rwde::ks_test_beta(marginals[e], {ae, ax - ae},
                                          "reversed-edge", level);
        all_pass = all_pass && r.pass;
        table.add_row({std::to_string(edge.id), format_g17(ae), format_g17(ax - ae),
                       format_g17(r.statistic), format_g17(r.p_value),
                       r.pass ? "true" : "false"});
      }
      table.add_comment("bonferroni_level", format_g17(level));
      table.add_comment("all_pass", all_pass ? "true" : "false");
      write_text(o.common.out, render_table(table, {o.common.seed, digest}, o.common.format));
      if (!all_pass) exit_code = 2;
    });

    // --- verify-w -------------------------------------------------------------
    auto* w_cmd = make_sub("verify-w", "Green function law against 1/Beta");
    struct {
      Common common;
      std::string graph;
      double alpha_loop = 2.0, alpha_exit = 1.0;
      double alpha_a = 2.0, alpha_c = 1.0, alpha_e = 1.0;
      int zd = 0;
      int radius = 2;
      double alpha = 1.0;
      std::string alpha_dirs;
      double gamma = 0.0;
      std::size_t n = 10000;
      double significance = 0.01;
    } w_opt;
    add_common(w_cmd, w_opt.common, "json");
    w_cmd->add_option("--graph", w_opt.graph, "named graph: loop | two-cycle")
        ->check(CLI::IsMember({"loop", "two-cycle"}));
    w_cmd->add_option("--alpha-loop", w_opt.alpha_loop, "loop weight");
    w_cmd->add_option("--alpha-exit", w_opt.alpha_exit, "exit weight");
    w_cmd->add_option("--alpha-a", w_opt.alpha_a, "x0->x1 weight");
    w_cmd->add_option("--alpha-c", w_opt.alpha_c, "x1->x0 weight");
    w_cmd->add_option("--alpha-e", w_opt.alpha_e, "x1->delta weight");
    w_cmd->add_option("--zd", w_opt.zd, "lattice dimension (domination mode)");
    w_cmd->add_option("--radius", w_opt.radius, "truncation radius");
    w_cmd->add_option("--alpha", w_opt.alpha, "uniform weight");
    w_cmd->add_option("--alpha-dirs", w_opt.alpha_dirs, "per-direction weights");
    w_cmd->add_option("--gamma", w_opt.gamma, "domination parameter");
    w_cmd->add_option("-n,--n", w_opt.n, "number of environments");
    w_cmd->add_option("--significance", w_opt.significance, "test level");
    w_cmd->callback([&] {
      const auto& o = w_opt;
      FlatRecord rec;
      rec.add_string("command", "verify-w");
      bool pass = false;
      if (o.zd > 0) {
        // Domination mode: empirical law must sit below 1/Beta(gamma, ...).
        if (!(o.gamma > 0.0))
          throw std::invalid_argument("verify-w: domination mode needs --gamma > 0");
        const auto setup = lattice_setup(o.zd, o.radius, o.alpha, o.alpha_dirs);
        for (int v = 0; v < setup.graph.vertex_count(); ++v) {
          if (setup.graph.is_cemetery(v) || v == setup.x0) continue;
          if (rwde::divergence(setup.graph, setup.alpha, v) < -1e-9)
            throw std::invalid_argument(
                "verify-w: weight divergence must be nonnegative off the root");
        }
        const double ax = rwde::vertex_weight(setup.graph, setup.alpha, setup.x0);
        if (!(o.gamma < ax))
          throw std::invalid_argument("verify-w: --gamma must be below the root weight");
        const auto samples = rwde::sample_green_series(
            setup.graph, setup.alpha, setup.x0, o.n, o.common.seed);
        const rwde::BetaParams params{o.gamma, ax - o.gamma};
        const auto rep = rwde::dominated_by(
            samples,
            [params](double t) {
              return t <= 1.0 ? 1.0 : rwde::beta_cdf(1.0 / t, params);
            },
            o.significance);
        pass = rep.pass;
        rec.add_string("mode", "domination");
        rec.add_number("gamma", o.gamma);
        rec.add_number("beta_b", ax - o.gamma);
        rec.add_number("max_violation", rep.max_violation);
        rec.add_number("band", rep.band);
        rec.add_integer("n", static_cast<long long>(rep.n));
        rec.add_bool("pass", pass);
      } else {
        rwde::DirectedMultigraph g;
        rwde::EdgeWeights alpha;
        if (o.graph == "loop") {
          g = rwde::builders::loop_graph();
          alpha.set(0, o.alpha_loop);
          alpha.set(1, o.alpha_exit);
        } else if (o.graph == "two-cycle") {
          g = rwde::builders::two_cycle_graph();
          alpha.set(0, o.alpha_a);
          alpha.set(1, o.alpha_c);
          alpha.set(2, o.alpha_e);
        } else {
          throw std::invalid_argument("verify-w: give --graph or --zd");
        }
        const int x0 = *g.root();
        for (int v = 0; v < g.vertex_count(); ++v) {
          if (v == x0 || g.is_cemetery(v)) continue;
          if (std::abs(rwde::divergence(g, alpha, v)) > 1e-12)
            throw std::invalid_argument(
                "verify-w: exact law requires zero weight divergence off the root");
        }
        const double a = rwde::divergence(g, alpha, x0);
        const double ax = rwde::vertex_weight(g, alpha, x0);
        if (!(a > 0.0))
          throw std::invalid_argument("verify-w: root weight divergence must be positive");
        const auto samples =
            rwde::sample_green_series(g, alpha, x0, o.n, o.common.seed);
        const auto rep = rwde::ks_test_inverse_beta(samples, {a, ax - a},
                                                    "green-law", o.significance);
        pass = rep.pass;
        rec.add_string("mode", "exact");
        rec.add_number("beta_a", a);
        rec.add_number("beta_b", ax - a);
        rec.add_number("d_stat", rep.statistic);
        rec.add_number("p_value", rep.p_value);
        rec.add_integer("n", static_cast<long long>(rep.n));
        rec.add_bool("pass", pass);
      }
      write_text(o.common.out,
                 rec.render(o.common.format, {o.common.seed, digest}));
      if (!pass) exit_code = 2;
    });

    // --- maxflow ----------------------------------------------------------------
    auto* mf_cmd = make_sub("maxflow", "max flow and certified min cut");
    struct {
      Common common;
      int zd = 0;
      int radius = 2;
      double cap = 1.0;
      std::string edge_list, source, sink;
    } mf_opt;
    add_common(mf_cmd, mf_opt.common, "csv");
    mf_cmd->add_option("--zd", mf_opt.zd, "lattice dimension");
    mf_cmd->add_option("--radius", mf_opt.radius, "truncation radius");
    auto* mf_cap_opt =
        mf_cmd->add_option("--cap", mf_opt.cap, "uniform capacity");
    mf_cmd->add_option("--edge-list", mf_opt.edge_list,
                       "edge-list file; its weights are the capacities");
    mf_cmd->add_option("--source", mf_opt.source, "source vertex name");
    mf_cmd->add_option("--sink", mf_opt.sink, "sink vertex name");
    mf_cmd->callback([&] {
      const auto& o = mf_opt;
      rwde::DirectedMultigraph g;
      std::vector<double> cap;
      int s = -1, t = -1;
      if (o.zd > 0) {
        auto setup = lattice_setup(o.zd, o.radius, 1.0, "");
        g = std::move(setup.graph);
        s = setup.x0;
        t = *g.cemetery();
      } else if (!o.edge_list.empty()) {
        std::ifstream is(o.edge_list);
        if (!is) throw std::runtime_error("cannot read edge list: " + o.edge_list);
        auto loaded = rwde::read_edge_list(is);
        g = std::move(loaded.graph);
        const auto sv = g.find_vertex(o.source), tv = g.find_vertex(o.sink);
        if (!sv || !tv)
          throw std::invalid_argument("maxflow: --source/--sink not found");
        s = *sv;
        t = *tv;
        if (mf_cap_opt->count() == 0) {
          cap.resize(static_cast<std::size_t>(g.edge_count()));
          for (int i = 0; i < g.edge_count(); ++i)
            cap[i] = loaded.weights.at(g.edge(i).id);
        }
      } else {
        throw std::invalid_argument("maxflow: give --zd or --edge-list");
      }
      if (!(o.cap > 0.0)) throw std::invalid_argument("maxflow: --cap must be positive");
      if (cap.empty())
        cap.assign(static_cast<std::size_t>(g.edge_count()), o.cap);
      const auto r = rwde::max_flow_min_cut<double>(g, cap, s, t);
      rwde::CsvReport table({"edge_id", "flow", "capacity"});
      for (int i = 0; i < g.edge_count(); ++i)
        table.add_row({std::to_string(g.edge(i).id), format_g17(r.flow[i]),
                       format_g17(cap[i])});
      table.add_comment("value", format_g17(r.value));
      table.add_comment("cut_value", format_g17(r.cut_value));
      table.add_comment("cut_edges", cut_edges_joined(r.cut.edges));
      table.add_comment("cut_certified", r.cut.certified ? "true" : "false");
      write_text(o.common.out, render_table(table, {o.common.seed, digest}, o.common.format));
    });

    // --- maxflow-l2 ---------------------------------------------------------------
    auto* l2_cmd = make_sub("maxflow-l2",
                            "capacity-compatible max flow with shell-capped capacities");
    struct {
      Common common;
      int zd = 3;
      int radius = 6;
      double cap = 1.0;
      int eta_step = 2;
    } l2_opt;
    add_common(l2_cmd, l2_opt.common, "csv");
    l2_cmd->add_option("--zd", l2_opt.zd, "lattice dimension");
    l2_cmd->add_option("--radius", l2_opt.radius, "truncation radius");
    l2_cmd->add_option("--cap", l2_opt.cap, "uniform capacity");
    l2_cmd->add_option("--eta-step", l2_opt.eta_step, "shell radius step");
    l2_cmd->callback([&] {
      const auto& o = l2_opt;
      if (o.eta_step < 1)
        throw std::invalid_argument("maxflow-l2: --eta-step must be positive");
      auto setup = lattice_setup(o.zd, o.radius, 1.0, "");
      const auto& g = setup.graph;
      const auto c = rwde::EdgeWeights::uniform(g, o.cap);
      const auto theta = rwde::radial_flow_on_truncation(g);
      std::vector<int> eta;
      for (int r = 0; r <= o.radius; r += o.eta_step) eta.push_back(r);
      const auto r = rwde::l2_compatible_maxflow(g, c, setup.x0, theta, eta);
      rwde::CsvReport table({"edge_id", "flow", "capacity"});
      for (int i = 0; i < g.edge_count(); ++i) {
        const int id = g.edge(i).id;
        const auto it = r.flow.theta.find(id);
        table.add_row({std::to_string(id),
                       format_g17(it == r.flow.theta.end() ? 0.0 : it->second),
                       format_g17(o.cap)});
      }
      table.add_comment("min_cut_value", format_g17(r.min_cut_value));
      table.add_comment("strength", format_g17(rwde::strength(g, r.flow)));
      table.add_comment("energy", format_g17(rwde::energy(r.flow)));
      table.add_comment("cutoff_radius", std::isinf(r.cutoff_radius)
                                              ? "inf"
                                              : format_g17(r.cutoff_radius));
      table.add_comment("blend", format_g17(r.blend));
      table.add_comment("cut_edges", cut_edges_joined(r.cut.edges));
      write_text(o.common.out, render_table(table, {o.common.seed, digest}, o.common.format));
    });

    // --- derrw ---------------------------------------------------------------
    auto* derrw_cmd = make_sub("derrw", "reinforced walk vs annealed walk vs exact path law");
    struct {
      Common common;
      std::string graph;
      int zd = 0;
      int radius = 1;
      double alpha = 1.0;
      double alpha_loop = 2.0, alpha_exit = 1.0;
      int length = 3;
      std::size_t n = 100000;
      double tv_threshold = 0.02;
    } derrw_opt;
    add_common(derrw_cmd, derrw_opt.common, "csv");
    derrw_cmd->add_option("--graph", derrw_opt.graph, "named graph: loop | two-vertex-full")
        ->check(CLI::IsMember({"loop", "two-vertex-full"}));
    derrw_cmd->add_option("--zd", derrw_opt.zd, "lattice dimension");
    derrw_cmd->add_option("--radius", derrw_opt.radius, "truncation radius");
    derrw_cmd->add_option("--alpha", derrw_opt.alpha, "uniform weight");
    derrw_cmd->add_option("--alpha-loop", derrw_opt.alpha_loop, "loop weight");
    derrw_cmd->add_option("--alpha-exit", derrw_opt.alpha_exit, "exit weight");
    derrw_cmd->add_option("-L,--length", derrw_opt.length, "path length");
    derrw_cmd->add_option("-n,--n", derrw_opt.n, "walks per law");
    derrw_cmd->add_option("--tv-threshold", derrw_opt.tv_threshold,
                          "max allowed total variation");
    derrw_cmd->callback([&] {
      const auto& o = derrw_opt;
      rwde::DirectedMultigraph g;
      rwde::EdgeWeights alpha;
      if (o.zd > 0) {
        auto setup = lattice_setup(o.zd, o.radius, o.alpha, "");
        g = std::move(setup.graph);
        alpha = std::move(setup.alpha);
      } else if (o.graph == "loop") {
        g = rwde::builders::loop_graph();
        alpha.set(0, o.alpha_loop);
        alpha.set(1, o.alpha_exit);
      } else if (o.graph == "two-vertex-full") {
        g = rwde::builders::two_vertex_full();
        alpha = rwde::EdgeWeights::uniform(g, o.alpha);
      } else {
        throw std::invalid_argument("derrw: give --graph or --zd");
      }
      const auto rep = rwde::equivalence_test(g, alpha, *g.root(), o.length,
                                              o.n, o.common.seed, o.tv_threshold);
      rwde::CsvReport table({"path", "exact_prob", "derrw_freq", "rwde_freq"});
      for (std::size_t i = 0; i < rep.path.size(); ++i)
        table.add_row({rep.path[i], format_g17(rep.exact_prob[i]),
                       format_g17(rep.derrw_freq[i]),
                       format_g17(rep.rwde_freq[i])});
      table.add_comment("tv_derrw_exact", format_g17(rep.tv_derrw_exact));
      table.add_comment("tv_rwde_exact", format_g17(rep.tv_rwde_exact));
      table.add_comment("tv_derrw_rwde", format_g17(rep.tv_derrw_rwde));
      table.add_comment("max_tv", format_g17(rep.summary.statistic));
      table.add_comment("pass", rep.summary.pass ? "true" : "false");
      write_text(o.common.out, render_table(table, {o.common.seed, digest}, o.common.format));
      if (!rep.summary.pass) exit_code = 2;
    });

    // --- appendix ----------------------------------------------------------------
    auto* apx_cmd = make_sub("appendix", "occupation-density change-of-variables identity");
    struct {
      Common common;
      std::string graph_id = "two-vertex-full";
      std::string alpha_list, psi_list;
      int e0 = -1;
      int resolution = 8;
      double tolerance = 1e-3;
    } apx_opt;
    add_common(apx_cmd, apx_opt.common, "json");
    apx_cmd->add_option("--case", apx_opt.graph_id,
                        "graph: two-vertex-full | double-edge | triangle | solo")
        ->check(CLI::IsMember({"two-vertex-full", "double-edge", "triangle", "solo"}));
    apx_cmd->add_option("--alpha-list", apx_opt.alpha_list,
                        "per-edge weights, comma-separated");
    apx_cmd->add_option("--psi", apx_opt.psi_list,
                        "monomial exponents per edge, comma-separated");
    apx_cmd->add_option("--e0", apx_opt.e0, "reference edge index");
    apx_cmd->add_option("--resolution", apx_opt.resolution, "base quadrature order");
    apx_cmd->add_option("--tolerance", apx_opt.tolerance, "relative tolerance");
    apx_cmd->callback([&] {
      const auto& o = apx_opt;
      rwde::DirectedMultigraph g;
      int default_e0 = 0;
      if (o.graph_id == "two-vertex-full") {
        g = rwde::builders::two_vertex_full();
        default_e0 = 1;  // the a->b edge
      } else if (o.graph_id == "double-edge") {
        g.add_vertex("a");
        g.add_vertex("b");
        g.add_edge(0, 1);
        g.add_edge(0, 1);
        g.add_edge(1, 0);
      } else if (o.graph_id == "triangle") {
        g.add_vertex("a");
        g.add_vertex("b");
        g.add_vertex("c");
        g.add_edge(0, 1);
        g.add_edge(1, 2);
        g.add_edge(2, 0);
      } else {
        g.add_vertex("a");
        g.add_edge(0, 0);
        g.add_edge(0, 0);
      }
      std::vector<double> aw(static_cast<std::size_t>(g.edge_count()), 1.0);
      if (!o.alpha_list.empty()) aw = parse_double_list(o.alpha_list);
      if (static_cast<int>(aw.size()) != g.edge_count())
        throw std::invalid_argument("appendix: --alpha-list length mismatch");
      std::vector<double> psi(static_cast<std::size_t>(g.edge_count()), 0.0);
      if (!o.psi_list.empty()) psi = parse_double_list(o.psi_list);
      if (static_cast<int>(psi.size()) != g.edge_count())
        throw std::invalid_argument("appendix: --psi length mismatch");
      rwde::EdgeWeights alpha;
      for (int i = 0; i < g.edge_count(); ++i) alpha.set(g.edge(i).id, aw[i]);
      const int e0 = o.e0 >= 0 ? o.e0 : default_e0;
      const auto rep = rwde::verify_occupation_identity(g, alpha, psi, e0,
                                                        o.resolution, o.tolerance);
      FlatRecord rec;
      rec.add_string("command", "appendix");
      rec.add_string("graph_id", o.graph_id);
      rec.add_number_array("alpha", aw);
      rec.add_number_array("psi", psi);
      rec.add_integer("e0", e0);
      rec.add_number("lhs", rep.lhs);
      rec.add_number("rhs", rep.rhs);
      rec.add_number("rel_err", rep.rel_err);
      rec.add_bool("pass", rep.pass);
      write_text(o.common.out,
                 rec.render(o.common.format, {o.common.seed, digest}));
      if (!rep.pass) exit_code = 2;
    });

    // --- sample-env -----------------------------------------------------------
    auto* env_cmd = make_sub("sample-env", "draw Dirichlet environments");
    struct {
      Common common;
      std::string graph;
      int zd = 0;
      int radius = 2;
      double alpha = 1.0;
      double alpha_loop = 2.0, alpha_exit = 1.0;
      double alpha_a = 2.0, alpha_c = 1.0, alpha_e = 1.0;
      std::size_t n = 1;
    } env_opt;
    add_common(env_cmd, env_opt.common, "csv");
    env_cmd->add_option("--graph", env_opt.graph,
                        "named graph: loop | two-cycle | two-vertex-full")
        ->check(CLI::IsMember({"loop", "two-cycle", "two-vertex-full"}));
    env_cmd->add_option("--zd", env_opt.zd, "lattice dimension");
    env_cmd->add_option("--radius", env_opt.radius, "truncation radius");
    env_cmd->add_option("--alpha", env_opt.alpha, "uniform weight");
    env_cmd->add_option("--alpha-loop", env_opt.alpha_loop, "loop weight");
    env_cmd->add_option("--alpha-exit", env_opt.alpha_exit, "exit weight");
    env_cmd->add_option("--alpha-a", env_opt.alpha_a, "x0->x1 weight");
    env_cmd->add_option("--alpha-c", env_opt.alpha_c, "x1->x0 weight");
    env_cmd->add_option("--alpha-e", env_opt.alpha_e, "x1->delta weight");
    env_cmd->add_option("-n,--n", env_opt.n, "number of environments");
    env_cmd->callback([&] {
      const auto& o = env_opt;
      rwde::DirectedMultigraph g;
      rwde::EdgeWeights alpha;
      if (o.zd > 0) {
        auto setup = lattice_setup(o.zd, o.radius, o.alpha, "");
        g = std::move(setup.graph);
        alpha = std::move(setup.alpha);
      } else if (o.graph == "loop") {
        g = rwde::builders::loop_graph();
        alpha.set(0, o.alpha_loop);
        alpha.set(1, o.alpha_exit);
      } else if (o.graph == "two-cycle") {
        g = rwde::builders::two_cycle_graph();
        alpha.set(0, o.alpha_a);
        alpha.set(1, o.alpha_c);
        alpha.set(2, o.alpha_e);
      } else if (o.graph == "two-vertex-full") {
        g = rwde::builders::two_vertex_full();
        alpha = rwde::EdgeWeights::uniform(g, o.alpha);
      } else {
        throw std::invalid_argument("sample-env: give --graph or --zd");
      }
      if (o.n < 1) throw std::invalid_argument("sample-env: need n >= 1");
      rwde::CsvReport table({"replicate", "edge_id", "tail", "head", "probability"});
      for (std::size_t rep = 0; rep < o.n; ++rep) {
        const auto env = rwde::sample_environment(g, alpha, o.common.seed, rep);
        for (int i = 0; i < g.edge_count(); ++i)
          table.add_row({std::to_string(rep), std::to_string(g.edge(i).id),
                         g.vertex_name(g.edge(i).tail),
                         g.vertex_name(g.edge(i).head), format_g17(env.p[i])});
      }
      write_text(o.common.out, render_table(table, {o.common.seed, digest}, o.common.format));
    });

    // --- green ---------------------------------------------------------------
    auto* green_cmd = make_sub("green", "Green function samples at the root");
    struct {
      Common common;
      std::string graph;
      int zd = 0;
      int radius = 2;
      double alpha = 1.0;
      double alpha_loop = 2.0, alpha_exit = 1.0;
      double alpha_a = 2.0, alpha_c = 1.0, alpha_e = 1.0;
      std::size_t n = 100;
      std::string method = "direct";
    } green_opt;
    add_common(green_cmd, green_opt.common, "csv");
    green_cmd->add_option("--graph", green_opt.graph, "named graph: loop | two-cycle")
        ->check(CLI::IsMember({"loop", "two-cycle"}));
    green_cmd->add_option("--zd", green_opt.zd, "lattice dimension");
    green_cmd->add_option("--radius", green_opt.radius, "truncation radius");
    green_cmd->add_option("--alpha", green_opt.alpha, "uniform weight");
    green_cmd->add_option("--alpha-loop", green_opt.alpha_loop, "loop weight");
    green_cmd->add_option("--alpha-exit", green_opt.alpha_exit, "exit weight");
    green_cmd->add_option("--alpha-a", green_opt.alpha_a, "x0->x1 weight");
    green_cmd->add_option("--alpha-c", green_opt.alpha_c, "x1->x0 weight");
    green_cmd->add_option("--alpha-e", green_opt.alpha_e, "x1->delta weight");
    green_cmd->add_option("-n,--n", green_opt.n, "number of environments");
    green_cmd->add_option("--method", green_opt.method,
                          "direct solve or time-reversal identity")
        ->check(CLI::IsMember({"direct", "reversal"}));
    green_cmd->callback([&] {
      const auto& o = green_opt;
      rwde::DirectedMultigraph g;
      rwde::EdgeWeights alpha;
      if (o.zd > 0) {
        auto setup = lattice_setup(o.zd, o.radius, o.alpha, "");
        g = std::move(setup.graph);
        alpha = std::move(setup.alpha);
      } else if (o.graph == "loop") {
        g = rwde::builders::loop_graph();
        alpha.set(0, o.alpha_loop);
        alpha.set(1, o.alpha_exit);
      } else if (o.graph == "two-cycle") {
        g = rwde::builders::two_cycle_graph();
        alpha.set(0, o.alpha_a);
        alpha.set(1, o.alpha_c);
        alpha.set(2, o.alpha_e);
      } else {
        throw std::invalid_argument("green: give --graph or --zd");
      }
      if (o.n < 1) throw std::invalid_argument("green: need n >= 1");
      const int x0 = *g.root();
      std::vector<double> values(o.n);
      rwde::parallel_for(static_cast<std::int64_t>(o.n), [&](std::int64_t i) {
        const auto env = rwde::sample_environment(g, alpha, o.common.seed,
                                                  static_cast<std::uint64_t>(i));
        values[i] = o.method == "reversal"
                        ? rwde::green_via_reversal(g, env, x0)
                        : rwde::green_function(g, env, x0, x0);
      });
      rwde::CsvReport table({"replicate", "green"});
      for (std::size_t i = 0; i < o.n; ++i)
        table.add_row({std::to_string(i), format_g17(values[i])});
      table.add_comment("method", o.method);
      table.add_comment("x0", g.vertex_name(x0));
      write_text(o.common.out, render_table(table, {o.common.seed, digest}, o.common.format));
    });

    // Rebuild argv so CLI11 sees the spliced arguments.
    std::vector<std::string> final_args;
    final_args.push_back(argv[0]);
    final_args.insert(final_args.end(), args.begin(), args.end());
    std::vector<char*> ptrs;
    ptrs.reserve(final_args.size());
    for (auto& a : final_args) ptrs.push_back(a.data());
    try {
      app.parse(static_cast<int>(ptrs.size()), ptrs.data());
    } catch (const CLI::ParseError& e) {
      const int rc = app.exit(e);
      return rc == 0 ? 0 : 1;
    }
    return exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
