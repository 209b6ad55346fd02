// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 when any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <nlohmann/json.hpp>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ctxfuse/bpa.hpp"
#include "ctxfuse/cli.hpp"
#include "ctxfuse/connection_graph.hpp"
#include "ctxfuse/fusion.hpp"
#include "ctxfuse/labeling.hpp"
#include "ctxfuse/possibility.hpp"
#include "test_support.hpp"

namespace ctxfuse {
namespace {

using Clock = std::chrono::steady_clock;
using namespace testing;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

std::string fmt(const char* format, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

Outcome dempster_algebra() {
  Outcome out;
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<std::size_t> size(1, 5);
  const auto t0 = Clock::now();
  double comm = 0, assoc = 0, duality = 0, oracle = 0;
  int trials = 0, assoc_checked = 0;
  for (; trials < 1000; ++trials) {
    const Frame frame = make_frame(size(rng));
    const Bpa a = random_bpa(rng, frame);
    const Bpa b = random_bpa(rng, frame);
    const Bpa c = random_bpa(rng, frame);

    const auto dense_oracle = oracle_combine(dense(a), dense(b));
    const double k = oracle_conflict(dense(a), dense(b));
    std::optional<Bpa> ab;
    try {
      ab = combine(a, b);
    } catch (const Error& e) {
      out.require(e.code() == ErrorCode::kTotalConflict && k > 1.0 - 1e-12,
                  "unexpected error " + std::string(e.what()));
    }
    if (ab) {
      const Bpa ba = combine(b, a);
      comm = std::max(comm, max_mass_diff(*ab, ba));
      const auto got = dense(*ab);
      for (std::size_t m = 0; m < got.size(); ++m) {
        oracle = std::max(oracle, std::abs(got[m] - dense_oracle[m]));
      }
      try {
        const Bpa left = combine(*ab, c);
        const Bpa right = combine(a, combine(b, c));
        assoc = std::max(assoc, max_mass_diff(left, right));
        ++assoc_checked;
      } catch (const Error& e) {
        out.require(e.code() == ErrorCode::kTotalConflict, e.what());
      }
    }

    const Bpa id = combine(a, Bpa::vacuous(frame));
    out.require(focal_sets(id) == focal_sets(a), "vacuous identity changed focal sets");

    const std::uint32_t full = frame.full().mask();
    for (std::uint32_t m = 0; m <= full; ++m) {
      const Subset s = Subset::from_mask(m);
      duality = std::max(duality, std::abs(plausibility(a, s) -
                                           (1.0 - belief(a, s.complement(frame.size())))));
    }
  }
  const double elapsed = seconds_since(t0);
  out.require(comm <= 1e-12, fmt("commutativity %.3g", comm));
  out.require(assoc <= 1e-9, fmt("associativity %.3g", assoc));
  out.require(duality <= 1e-12, fmt("Pl/Bel duality %.3g", duality));
  out.require(oracle <= 1e-12, fmt("oracle %.3g", oracle));
  out.require(assoc_checked >= 500, fmt("only %d associativity triples", assoc_checked));
  out.require(elapsed < 5.0, fmt("took %.2f s", elapsed));
  if (out.pass) {
    out.detail = fmt("%d pairs, %d triples; max diffs comm %.2g assoc %.2g duality %.2g oracle %.2g; %.2f s",
                     trials, assoc_checked, comm, assoc, duality, oracle, elapsed);
  }
  return out;
}

Outcome product_reproduction() {
  Outcome out;
  std::mt19937_64 rng(102);
  std::uniform_int_distribution<std::size_t> size(1, 4);
  double worst = 0.0, worst_k = 0.0;
  int trials = 0;
  for (; trials < 500; ++trials) {
    const std::size_t ns = size(rng), nt = size(rng);
    std::vector<std::string> sl, tl;
    for (std::size_t i = 0; i < ns; ++i) sl.push_back("s" + std::to_string(i));
    for (std::size_t j = 0; j < nt; ++j) tl.push_back("t" + std::to_string(j));
    const ProductFrame pf(sl, tl);
    const auto ps = random_distribution(rng, ns, true);
    const auto pt = random_distribution(rng, nt, true);
    std::map<std::string, double> ms, mt;
    for (std::size_t i = 0; i < ns; ++i) ms[sl[i]] = ps[i];
    for (std::size_t j = 0; j < nt; ++j) mt[tl[j]] = pt[j];
    const Bpa a = lift_marginal(pf, Axis::kSymbol, ms);
    const Bpa b = lift_marginal(pf, Axis::kText, mt);
    worst_k = std::max(worst_k, conflict(a, b));
    const Bpa joint = combine(a, b);
    for (std::size_t i = 0; i < ns; ++i) {
      for (std::size_t j = 0; j < nt; ++j) {
        const double m = joint.mass(Subset::singleton(pf.index(i, j)));
        worst = std::max(worst, std::abs(m - ps[i] * pt[j]));
      }
    }
  }
  out.require(worst <= 1e-12, fmt("singleton mass off by %.3g", worst));
  out.require(worst_k == 0.0, fmt("conflict %.3g", worst_k));
  if (out.pass) out.detail = fmt("%d marginal pairs; max diff %.2g, conflict 0", trials, worst);
  return out;
}

Outcome possibility_plausibility() {
  Outcome out;
  std::mt19937_64 rng(103);
  std::uniform_int_distribution<std::size_t> size(1, 5);
  double worst = 0.0;
  int trials = 0;
  for (; trials < 1000; ++trials) {
    const Frame frame = make_frame(size(rng));
    const PossibilityDistribution pi(frame, random_normal_possibility(rng, frame.size()));
    const Bpa m = consonant_bpa(pi);
    for (std::uint32_t s = 0; s <= frame.full().mask(); ++s) {
      const Subset b = Subset::from_mask(s);
      worst = std::max(worst, std::abs(poss_measure(pi, b) - plausibility(m, b)));
    }
  }
  out.require(worst <= 1e-12, fmt("max |Poss - Pl| %.3g", worst));
  if (out.pass) out.detail = fmt("%d distributions, all subsets; max diff %.2g", trials, worst);
  return out;
}

Outcome fusion_cross_check() {
  Outcome out;
  std::mt19937_64 rng(104);
  std::uniform_int_distribution<std::size_t> size(1, 5);
  std::uniform_real_distribution<double> grade(0.0, 1.0);
  double worst = 0.0;
  int compared = 0, degenerate = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Frame frame = make_frame(size(rng));
    const auto p = random_distribution(rng, frame.size(), true);
    std::vector<double> pl(frame.size());
    for (auto& v : pl) v = grade(rng) < 0.2 ? 0.0 : grade(rng);
    if (*std::max_element(pl.begin(), pl.end()) == 0.0) pl[0] = 0.5;

    std::optional<std::vector<double>> fused;
    std::optional<Bpa> combined;
    try {
      fused = fuse_prob_plaus(p, pl);
    } catch (const Error& e) {
      out.require(e.code() == ErrorCode::kZeroEvidence, e.what());
    }
    try {
      combined = combine(Bpa::from_probabilities(frame, p),
                         consonant_bpa(normalize(PossibilityDistribution(frame, pl))));
    } catch (const Error& e) {
      out.require(e.code() == ErrorCode::kTotalConflict, e.what());
    }
    out.require(fused.has_value() == combined.has_value(),
                "formula and combination disagree on degenerate evidence");
    if (!fused || !combined) {
      ++degenerate;
      continue;
    }
    for (std::size_t i = 0; i < frame.size(); ++i) {
      worst = std::max(worst, std::abs((*fused)[i] - combined->mass(Subset::singleton(i))));
    }
    ++compared;
  }
  out.require(worst <= 1e-9, fmt("max diff %.3g", worst));
  out.require(compared >= 500, fmt("only %d instances compared", compared));
  if (out.pass) {
    out.detail = fmt("%d instances (+%d zero-evidence agreeing); max diff %.2g", compared,
                     degenerate, worst);
  }
  return out;
}

Outcome scale_invariance() {
  Outcome out;
  std::mt19937_64 rng(105);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> count(1, 3);
  double worst = 0.0;
  int compared = 0;
  for (int trial = 0; trial < 400; ++trial) {
    RandomProblemOptions opts;
    opts.symbols = count(rng);
    opts.texts = count(rng);
    opts.max_candidates = 3;
    const auto p = random_problem(rng, opts);
    const double c = 1.0 - unit(rng);  // (0, 1]
    std::optional<PosteriorTable> base, scaled_table;
    try {
      base = posterior(p.entities, p.typicality);
    } catch (const Error& e) {
      out.require(e.code() == ErrorCode::kZeroEvidence, e.what());
    }
    try {
      scaled_table = posterior(p.entities, scaled(p.typicality, c));
    } catch (const Error& e) {
      out.require(e.code() == ErrorCode::kZeroEvidence, e.what());
    }
    out.require(base.has_value() == scaled_table.has_value(), "scaling changed solvability");
    if (!base || !scaled_table) continue;
    for (std::size_t i = 0; i < base->rows.size(); ++i) {
      worst = std::max(worst, std::abs(base->rows[i].posterior - scaled_table->rows[i].posterior));
    }
    ++compared;
  }
  out.require(worst <= 1e-12, fmt("max diff %.3g", worst));
  out.require(compared >= 200, fmt("only %d problems compared", compared));
  if (out.pass) out.detail = fmt("%d problems; max diff %.2g", compared, worst);
  return out;
}

bool has_tie(const ConnectionGraph& g) {
  std::vector<double> v;
  for (const auto& e : g.edges()) v.push_back(e.value);
  std::sort(v.begin(), v.end());
  return std::adjacent_find(v.begin(), v.end()) != v.end();
}

Outcome graph_oracle() {
  Outcome out;
  std::mt19937_64 rng(106);
  const auto t0 = Clock::now();
  int graphs = 0, ties = 0, positive = 0;
  for (; graphs < 5000; ++graphs) {
    RandomGraphOptions opts;
    opts.value_levels = graphs % 2 == 0 ? 4 : 10;
    const ConnectionGraph g = random_graph(rng, opts);
    const double fast = solution_value(g);
    const double slow = solution_value_bruteforce(g);
    if (fast != slow) {
      out.require(false, fmt("graph %d: %.17g vs brute force %.17g", graphs, fast, slow));
      break;
    }
    ties += has_tie(g);
    positive += fast > 0.0;
  }
  const double elapsed = seconds_since(t0);
  out.require(elapsed < 10.0, fmt("took %.2f s", elapsed));
  if (out.pass) {
    out.detail = fmt("%d graphs (%d with tied values, %d with positive value) exact; %.2f s",
                     graphs, ties, positive, elapsed);
  }
  return out;
}

ConnectionGraph disjoint_union(const ConnectionGraph& x, const ConnectionGraph& y) {
  ConnectionGraph out;
  for (const auto& v : x.vertices()) out.add_vertex("x." + v.id, v.kind);
  for (const auto& v : y.vertices()) out.add_vertex("y." + v.id, v.kind);
  for (const auto& e : x.edges()) out.add_edge(e.a, e.b, e.value);
  for (const auto& e : y.edges()) {
    out.add_edge(e.a + x.vertex_count(), e.b + x.vertex_count(), e.value);
  }
  return out;
}

Outcome disjoint_union_law() {
  Outcome out;
  std::mt19937_64 rng(107);
  int pairs = 0, positive = 0;
  for (; pairs < 200; ++pairs) {
    // Every other pair uses small graphs that are usually feasible.
    const bool dense = pairs % 2 == 0;
    const ConnectionGraph x = dense ? random_graph(rng) : random_sparse_graph(rng, 12);
    const ConnectionGraph y = dense ? random_graph(rng) : random_sparse_graph(rng, 12);
    const double expected = std::min(solution_value(x), solution_value(y));
    const double got = solution_value(disjoint_union(x, y));
    out.require(got == expected, fmt("pair %d: %.17g vs min %.17g", pairs, got, expected));
    positive += expected > 0.0;
  }
  if (out.pass) out.detail = fmt("%d pairs exact (%d with positive minimum)", pairs, positive);
  return out;
}

std::string cli_output(const std::vector<std::string>& args, int& code) {
  std::ostringstream out, err;
  code = run_cli(args, out, err);
  return out.str() + "\x1f" + err.str();
}

Outcome end_to_end() {
  Outcome out;
  const std::string data = CTXFUSE_TEST_DATA;
  std::ostringstream first, err;
  const int code = run_cli({"posterior", data + "/rc_problem.json"}, first, err);
  out.require(code == kExitOk, "posterior exited " + std::to_string(code) + ": " + err.str());
  if (!out.pass) return out;
  const auto doc = nlohmann::json::parse(first.str());
  const auto& rows = doc.at("labelings");
  const double r = rows.at(0).at("posterior").get<double>();
  const double c = rows.at(1).at("posterior").get<double>();
  out.require(rows.at(0).at("assignment").at("sym1") == "R", "R is not the top row");
  out.require(std::abs(r - 0.7 / 0.76) <= 1e-12, fmt("R posterior %.17g", r));
  out.require(std::abs(c - 0.06 / 0.76) <= 1e-12, fmt("C posterior %.17g", c));

  const std::vector<std::vector<std::string>> commands{
      {"posterior", data + "/rc_problem.json"},
      {"posterior", data + "/rules_problem.json", "--top-k", "5"},
      {"posterior", data + "/rules_problem.json", "--decompose", "--threshold", "0.2"},
      {"validate", data + "/rules_problem.json"},
      {"value", data + "/four_edge_graph.json"},
      {"oracle-check", "--seed", "3", "--count", "50"},
  };
  int runs = 0;
  for (const auto& args : commands) {
    int code0 = 0;
    const std::string reference = cli_output(args, code0);
    for (int k = 0; k < 5; ++k, ++runs) {
      int code1 = 0;
      out.require(cli_output(args, code1) == reference && code1 == code0,
                  "output of '" + args[0] + "' differs between runs");
    }
  }
  if (out.pass) {
    out.detail = fmt("R %.17g, C %.17g; %d repeated runs byte-identical", r, c, runs);
  }
  return out;
}

// Mean seconds per solution_value call over `count` distinct graphs; best of
// three passes.
double time_per_graph(std::size_t edges, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<ConnectionGraph> graphs;
  for (int i = 0; i < count; ++i) graphs.push_back(random_sparse_graph(rng, edges));
  double best = 1e300;
  volatile double sink = 0.0;
  for (int pass = 0; pass < 3; ++pass) {
    const auto t0 = Clock::now();
    for (const auto& g : graphs) sink = sink + solution_value(g);
    best = std::min(best, seconds_since(t0) / count);
  }
  return best;
}

Outcome complexity() {
  Outcome out;
  const double t100 = time_per_graph(100, 2000, 108);
  const double t1000 = time_per_graph(1000, 200, 109);
  const double t10000 = time_per_graph(10000, 20, 110);

  std::mt19937_64 rng(111);
  double worst_single = 0.0;
  for (int i = 0; i < 5; ++i) {
    const ConnectionGraph g = random_sparse_graph(rng, 10000);
    const auto t0 = Clock::now();
    solution_value(g);
    worst_single = std::max(worst_single, seconds_since(t0));
  }
  const double growth = t10000 / t100;
  out.require(worst_single < 1.0, fmt("10^4 edges took %.3f s", worst_single));
  out.require(growth < 300.0, fmt("time grew %.0fx for 100x edges", growth));
  out.detail = fmt("10^2: %.3g ms, 10^3: %.3g ms, 10^4: %.3g ms per graph (growth %.0fx); slowest 10^4 graph %.3g ms",
                   t100 * 1e3, t1000 * 1e3, t10000 * 1e3, growth, worst_single * 1e3);
  return out;
}

// Entities of several independent random problems, with their tables merged.
RandomProblem merged(std::mt19937_64& rng, std::size_t components,
                     const RandomProblemOptions& base) {
  RandomProblem all;
  for (std::size_t c = 0; c < components; ++c) {
    RandomProblemOptions opts = base;
    opts.prefix = "c" + std::to_string(c) + ".";
    const RandomProblem part = random_problem(rng, opts);
    all.entities.insert(all.entities.end(), part.entities.begin(), part.entities.end());
    for (const auto& [key, v] : part.typicality.pairs()) {
      const auto& [a, al, b, bl] = key;
      all.typicality.set_pair(a, al, b, bl, v);
    }
    for (const auto& [key, v] : part.typicality.isolations()) {
      all.typicality.set_isolation(key.first, key.second, v);
    }
  }
  return all;
}

std::size_t positive_rows(const PosteriorTable& t) {
  return std::count_if(t.rows.begin(), t.rows.end(),
                       [](const PosteriorRow& r) { return r.plausibility > 0.0; });
}

Outcome decomposition_agreement() {
  Outcome out;
  std::mt19937_64 rng(112);
  std::uniform_int_distribution<std::size_t> components(2, 3);
  RandomProblemOptions opts;
  opts.symbols = 1;
  opts.texts = 1;
  opts.max_candidates = 3;
  opts.pair_density = 0.3;
  opts.isolation_density = 0.1;

  double worst = 0.0, gap_max = 0.0, gap_sum = 0.0;
  int qualifying = 0, general = 0, attempts = 0;
  while ((qualifying < 200 || general < 200) && attempts < 100000) {
    ++attempts;
    const RandomProblem p = merged(rng, components(rng), opts);
    std::vector<PosteriorTable> parts;
    PosteriorTable full;
    try {
      parts = posterior_decomposed(p.entities, p.typicality);
      full = posterior(p.entities, p.typicality);
    } catch (const Error& e) {
      out.require(e.code() == ErrorCode::kZeroEvidence, e.what());
      continue;
    }
    const bool single = std::all_of(parts.begin(), parts.end(),
                                     [](const PosteriorTable& t) { return positive_rows(t) == 1; });
    double diff = 0.0;
    for (const auto& row : full.rows) {
      diff = std::max(diff, std::abs(joint_posterior(parts, row.labeling) - row.posterior));
    }
    if (single && qualifying < 200) {
      worst = std::max(worst, diff);
      ++qualifying;
    } else if (!single && general < 200) {
      gap_max = std::max(gap_max, diff);
      gap_sum += diff;
      ++general;
    }
  }
  out.require(qualifying >= 200, fmt("only %d qualifying instances", qualifying));
  out.require(worst <= 1e-9, fmt("max diff %.3g on qualifying instances", worst));
  out.detail = fmt("%d qualifying instances, max diff %.2g; general instances (reported): %d, gap max %.3g mean %.3g",
                   qualifying, worst, general, gap_max, general ? gap_sum / general : 0.0);
  return out;
}

}  // namespace
}  // namespace ctxfuse

int main() {
  using namespace ctxfuse;
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"Dempster algebra suite", dempster_algebra},
      {"Product reproduction", product_reproduction},
      {"Possibility/plausibility equivalence", possibility_plausibility},
      {"Fusion formula cross-check", fusion_cross_check},
      {"Scale invariance", scale_invariance},
      {"Graph algorithm oracle equivalence", graph_oracle},
      {"Disjoint-union law", disjoint_union_law},
      {"End-to-end determinism and worked example", end_to_end},
      {"Complexity sanity", complexity},
      {"Decomposition agreement", decomposition_agreement},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += !o.pass;
    std::printf("%s %zu. %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
