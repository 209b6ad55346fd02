#include "ctxfuse/connection_graph.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <numeric>
#include <tuple>
#include <unordered_set>

#include "ctxfuse/error.hpp"

namespace ctxfuse {
namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

// Working copy of the graph for the smallest-edge-removal algorithm.
//
// Edges are removed in increasing value order. After each removal the
// remaining graph must still contain a solution graph; the value of the first
// edge whose removal breaks this is the answer. Forced edges are propagated
// from degree-one vertices, which may delete further edges that cannot belong
// to any solution graph.
//
// Empty adjacency lists detect only part of the infeasible cases: symbols
// that have lost their self-loop and every symbol neighbour ("needy" symbols)
// each need a text vertex of their own, and several of them can compete for
// too few texts without any list running empty. A matching of needy symbols
// into text vertices is therefore kept up to date by augmenting paths, and the
// remaining graph is feasible exactly when no list is empty and every needy
// symbol is matched.
class Solver {
 public:
  explicit Solver(const ConnectionGraph& g)
      : g_(g),
        alive_(g.edge_count(), 1),
        degree_(g.vertex_count(), 0),
        local_degree_(g.vertex_count(), 0),
        self_loop_(g.vertex_count(), kNone),
        set_(g.vertex_count(), 0),
        matched_(g.vertex_count(), kNone),
        owner_(g.vertex_count(), kNone),
        visited_(g.vertex_count(), 0) {}

  SolutionTrace run() {
    if (g_.vertex_count() == 0) {
      trace_.value = 1.0;
      return trace_;
    }
    for (VertexIndex v = 0; v < g_.vertex_count(); ++v) {
      degree_[v] = g_.incident(v).size();
      if (degree_[v] == 0) return finish(0.0);
      if (is_symbol(v)) {
        for (EdgeIndex e : g_.incident(v)) {
          const auto& edge = g_.edge(e);
          if (edge.is_self_loop()) {
            self_loop_[v] = e;
            ++local_degree_[v];
          } else if (is_symbol(other(e, v))) {
            ++local_degree_[v];
          }
        }
        if (local_degree_[v] == 0) pending_.push_back(v);
      }
      if (degree_[v] == 1) forced_.push_back(v);
    }
    if (!repair()) return finish(0.0);

    const std::vector<EdgeIndex> order = removal_order();
    for (EdgeIndex e : order) {
      if (!alive_[e]) continue;
      remove_edge(e);
      ++trace_.outer_iterations;
      const double last = g_.edge(e).value;
      if (empty_ > 0 || !repair()) return finish(last);
      if (!propagate() || !repair()) return finish(last);
    }
    // Unreachable: removing every edge empties some adjacency list.
    return finish(0.0);
  }

 private:
  struct Step {
    VertexIndex symbol;
    std::size_t next;
    EdgeIndex via;
  };

  SolutionTrace finish(double value) {
    trace_.value = value;
    return trace_;
  }

  bool is_symbol(VertexIndex v) const {
    return g_.vertex(v).kind == VertexKind::kSymbol;
  }

  VertexIndex other(EdgeIndex e, VertexIndex v) const {
    const auto& edge = g_.edge(e);
    return edge.a == v ? edge.b : edge.a;
  }

  // Increasing value; ties by the smaller then the larger endpoint id.
  std::vector<EdgeIndex> removal_order() const {
    std::vector<VertexIndex> by_id(g_.vertex_count());
    std::iota(by_id.begin(), by_id.end(), VertexIndex{0});
    std::sort(by_id.begin(), by_id.end(), [&](VertexIndex x, VertexIndex y) {
      return g_.vertex(x).id < g_.vertex(y).id;
    });
    std::vector<std::size_t> rank(g_.vertex_count());
    for (std::size_t r = 0; r < by_id.size(); ++r) rank[by_id[r]] = r;

    struct Key {
      double value;
      std::size_t lo;
      std::size_t hi;
      EdgeIndex edge;
    };
    std::vector<Key> keys;
    keys.reserve(g_.edge_count());
    for (EdgeIndex e = 0; e < g_.edge_count(); ++e) {
      const auto& edge = g_.edge(e);
      const auto [lo, hi] = std::minmax(rank[edge.a], rank[edge.b]);
      keys.push_back({edge.value, lo, hi, e});
    }
    std::sort(keys.begin(), keys.end(), [](const Key& x, const Key& y) {
      return std::tie(x.value, x.lo, x.hi) < std::tie(y.value, y.lo, y.hi);
    });
    std::vector<EdgeIndex> order;
    order.reserve(keys.size());
    for (const Key& k : keys) order.push_back(k.edge);
    return order;
  }

  void drop_degree(VertexIndex v) {
    if (--degree_[v] == 0) {
      ++empty_;
    } else if (degree_[v] == 1) {
      forced_.push_back(v);
    }
  }

  void drop_local(VertexIndex s) {
    if (--local_degree_[s] == 0) pending_.push_back(s);
  }

  void remove_edge(EdgeIndex e) {
    alive_[e] = 0;
    const auto& edge = g_.edge(e);
    if (edge.is_self_loop()) {
      drop_degree(edge.a);
      drop_local(edge.a);
      return;
    }
    drop_degree(edge.a);
    drop_degree(edge.b);
    const bool sa = is_symbol(edge.a);
    const bool sb = is_symbol(edge.b);
    if (sa && sb) {
      drop_local(edge.a);
      drop_local(edge.b);
      return;
    }
    const VertexIndex s = sa ? edge.a : edge.b;
    const VertexIndex t = sa ? edge.b : edge.a;
    if (matched_[s] == e) {
      matched_[s] = kNone;
      owner_[t] = kNone;
      pending_.push_back(s);
    }
  }

  void remove_self_loop(VertexIndex s) {
    const EdgeIndex loop = self_loop_[s];
    if (loop != kNone && alive_[loop]) {
      remove_edge(loop);
      ++trace_.propagated_removals;
    }
  }

  EdgeIndex single_edge(VertexIndex v) const {
    for (EdgeIndex e : g_.incident(v)) {
      if (alive_[e]) return e;
    }
    return kNone;
  }

  // Inner loop: settle unset vertices whose adjacency list has one element.
  bool propagate() {
    while (!forced_.empty()) {
      const VertexIndex n = forced_.back();
      forced_.pop_back();
      if (set_[n] || degree_[n] != 1) continue;
      const EdgeIndex e = single_edge(n);
      const VertexIndex m = other(e, n);
      if (!is_symbol(n)) {
        remove_self_loop(m);
      } else if (m == n) {
        // An isolated symbol keeps its self-loop.
      } else if (is_symbol(m)) {
        remove_self_loop(m);
      } else {
        for (EdgeIndex f : g_.incident(m)) {
          if (f != e && alive_[f]) {
            remove_edge(f);
            ++trace_.propagated_removals;
          }
        }
      }
      set_[n] = 1;
      ++trace_.inner_iterations;
      if (empty_ > 0) return false;
    }
    return true;
  }

  bool repair() {
    while (!pending_.empty()) {
      const VertexIndex s = pending_.back();
      pending_.pop_back();
      if (local_degree_[s] != 0 || matched_[s] != kNone) continue;
      if (!augment(s)) return false;
    }
    return true;
  }

  // Kuhn-style augmenting path search from an unmatched needy symbol.
  bool augment(VertexIndex root) {
    ++epoch_;
    stack_.clear();
    stack_.push_back({root, 0, kNone});
    while (!stack_.empty()) {
      Step& top = stack_.back();
      const auto& incident = g_.incident(top.symbol);
      bool descended = false;
      while (top.next < incident.size()) {
        const EdgeIndex e = incident[top.next++];
        if (!alive_[e]) continue;
        const VertexIndex t = other(e, top.symbol);
        if (is_symbol(t) || visited_[t] == epoch_) continue;
        visited_[t] = epoch_;
        top.via = e;
        if (owner_[t] == kNone) {
          for (const Step& step : stack_) {
            matched_[step.symbol] = step.via;
            owner_[other(step.via, step.symbol)] = step.symbol;
          }
          return true;
        }
        const VertexIndex next_symbol = owner_[t];
        stack_.push_back({next_symbol, 0, kNone});
        descended = true;
        break;
      }
      if (!descended) stack_.pop_back();
    }
    return false;
  }

  const ConnectionGraph& g_;
  std::vector<char> alive_;
  std::vector<std::size_t> degree_;
  // Alive self-loop plus symbol-symbol edges, for symbols.
  std::vector<std::size_t> local_degree_;
  std::vector<EdgeIndex> self_loop_;
  std::vector<char> set_;
  // Matching of needy symbols into text vertices.
  std::vector<EdgeIndex> matched_;
  std::vector<VertexIndex> owner_;
  std::vector<std::uint32_t> visited_;
  std::uint32_t epoch_ = 0;
  std::vector<Step> stack_;
  std::vector<VertexIndex> forced_;
  std::vector<VertexIndex> pending_;
  std::size_t empty_ = 0;
  SolutionTrace trace_;
};

}  // namespace

VertexIndex ConnectionGraph::add_vertex(std::string id, VertexKind kind) {
  if (by_id_.contains(id)) {
    throw Error(ErrorCode::kMalformedGraph, "duplicate vertex id '" + id + "'");
  }
  const VertexIndex v = vertices_.size();
  by_id_.emplace(id, v);
  vertices_.push_back({std::move(id), kind});
  adjacency_.emplace_back();
  return v;
}

EdgeIndex ConnectionGraph::add_edge(VertexIndex a, VertexIndex b, double value) {
  if (a >= vertices_.size() || b >= vertices_.size()) {
    throw Error(ErrorCode::kMalformedGraph, "edge endpoint does not exist");
  }
  if (!(value > 0.0 && value <= 1.0)) {
    throw Error(ErrorCode::kMalformedGraph,
                "edge value " + std::to_string(value) + " is outside (0,1]");
  }
  if (a > b) std::swap(a, b);
  const auto& va = vertices_[a];
  const auto& vb = vertices_[b];
  if (a == b && va.kind != VertexKind::kSymbol) {
    throw Error(ErrorCode::kMalformedGraph,
                "self-loop on text vertex '" + va.id + "'");
  }
  if (va.kind == VertexKind::kText && vb.kind == VertexKind::kText) {
    throw Error(ErrorCode::kMalformedGraph, "edge between text vertices '" +
                                                va.id + "' and '" + vb.id + "'");
  }
  if (!by_pair_.emplace(pair_key(a, b), edges_.size()).second) {
    throw Error(ErrorCode::kMalformedGraph,
                "duplicate edge '" + va.id + "'-'" + vb.id + "'");
  }
  const EdgeIndex e = edges_.size();
  edges_.push_back({a, b, value});
  adjacency_[a].push_back(e);
  if (a != b) adjacency_[b].push_back(e);
  return e;
}

EdgeIndex ConnectionGraph::add_edge(std::string_view a, std::string_view b,
                                    double value) {
  auto va = find_vertex(a);
  auto vb = find_vertex(b);
  if (!va || !vb) {
    throw Error(ErrorCode::kMalformedGraph,
                "edge references unknown vertex '" +
                    std::string(va ? b : a) + "'");
  }
  return add_edge(*va, *vb, value);
}

std::optional<VertexIndex> ConnectionGraph::find_vertex(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

std::optional<EdgeIndex> ConnectionGraph::find_edge(VertexIndex a,
                                                    VertexIndex b) const {
  if (a > b) std::swap(a, b);
  auto it = by_pair_.find(pair_key(a, b));
  if (it == by_pair_.end()) return std::nullopt;
  return it->second;
}

SolutionTrace solution_value_traced(const ConnectionGraph& g) {
  return Solver(g).run();
}

double solution_value(const ConnectionGraph& g) {
  return solution_value_traced(g).value;
}

double solution_value_bruteforce(const ConnectionGraph& g) {
  const std::size_t m = g.edge_count();
  if (m > kBruteForceEdgeLimit) {
    throw Error(ErrorCode::kTooLarge,
                std::to_string(m) + " edges exceed the enumeration limit of " +
                    std::to_string(kBruteForceEdgeLimit));
  }
  if (g.vertex_count() == 0) return 1.0;

  const std::size_t n = g.vertex_count();
  std::vector<std::uint32_t> incident(n, 0);
  std::vector<std::uint32_t> loop(n, 0);
  for (EdgeIndex e = 0; e < m; ++e) {
    const auto& edge = g.edge(e);
    const std::uint32_t bit = std::uint32_t{1} << e;
    incident[edge.a] |= bit;
    incident[edge.b] |= bit;
    if (edge.is_self_loop()) loop[edge.a] = bit;
  }

  // Same conditions as is_feasible, on an edge bit mask.
  auto feasible = [&](std::uint32_t chosen) {
    for (VertexIndex v = 0; v < n; ++v) {
      const int degree = std::popcount(chosen & incident[v]);
      if (g.vertex(v).kind == VertexKind::kText) {
        if (degree != 1) return false;
      } else if ((chosen & loop[v]) != 0) {
        if (degree != 1) return false;
      } else if (degree < 1) {
        return false;
      }
    }
    return true;
  };

  double best = 0.0;
  const std::uint32_t end = std::uint32_t{1} << m;
  for (std::uint32_t chosen = 1; chosen < end; ++chosen) {
    if (!feasible(chosen)) continue;
    double lowest = 1.0;
    for (std::uint32_t bits = chosen; bits != 0; bits &= bits - 1) {
      lowest = std::min(lowest, g.edge(std::countr_zero(bits)).value);
    }
    best = std::max(best, lowest);
  }
  return best;
}

bool is_feasible(const ConnectionGraph& g, std::span<const EdgeIndex> chosen) {
  std::vector<char> in(g.edge_count(), 0);
  for (EdgeIndex e : chosen) {
    if (e >= g.edge_count()) {
      throw Error(ErrorCode::kMalformedGraph, "chosen edge does not exist");
    }
    in[e] = 1;
  }
  std::vector<std::size_t> degree(g.vertex_count(), 0);
  std::vector<char> loop(g.vertex_count(), 0);
  for (EdgeIndex e = 0; e < g.edge_count(); ++e) {
    if (!in[e]) continue;
    const auto& edge = g.edge(e);
    ++degree[edge.a];
    if (edge.is_self_loop()) {
      loop[edge.a] = 1;
    } else {
      ++degree[edge.b];
    }
  }
  for (VertexIndex v = 0; v < g.vertex_count(); ++v) {
    if (g.vertex(v).kind == VertexKind::kText) {
      if (degree[v] != 1) return false;
    } else if (loop[v]) {
      if (degree[v] != 1) return false;
    } else if (degree[v] == 0) {
      return false;
    }
  }
  return true;
}

ConnectionGraph threshold_prune(const ConnectionGraph& g, double limit) {
  ConnectionGraph out;
  for (const auto& v : g.vertices()) out.add_vertex(v.id, v.kind);
  for (const auto& e : g.edges()) {
    if (e.value >= limit) out.add_edge(e.a, e.b, e.value);
  }
  return out;
}

ConnectionGraph random_graph(std::mt19937_64& rng,
                             const RandomGraphOptions& options) {
  std::uniform_int_distribution<std::size_t> symbols(0, options.max_symbols);
  std::uniform_int_distribution<std::size_t> texts(0, options.max_texts);
  std::size_t ns = 0;
  std::size_t nt = 0;
  while (ns + nt == 0) {
    ns = symbols(rng);
    nt = texts(rng);
  }
  ConnectionGraph g;
  for (std::size_t i = 0; i < ns; ++i) {
    g.add_vertex("s" + std::to_string(i), VertexKind::kSymbol);
  }
  for (std::size_t j = 0; j < nt; ++j) {
    g.add_vertex("t" + std::to_string(j), VertexKind::kText);
  }

  std::vector<std::pair<VertexIndex, VertexIndex>> candidates;
  for (VertexIndex s = 0; s < ns; ++s) {
    for (VertexIndex u = s; u < ns + nt; ++u) candidates.emplace_back(s, u);
  }
  const double density = std::uniform_real_distribution<double>(0.15, 0.85)(rng);
  std::bernoulli_distribution keep(density);
  std::vector<std::size_t> chosen;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    if (keep(rng)) chosen.push_back(k);
  }
  if (chosen.size() > options.max_edges) {
    std::shuffle(chosen.begin(), chosen.end(), rng);
    chosen.resize(options.max_edges);
    std::sort(chosen.begin(), chosen.end());
  }
  std::uniform_int_distribution<int> level(1, options.value_levels);
  for (std::size_t k : chosen) {
    const double value =
        static_cast<double>(level(rng)) / static_cast<double>(options.value_levels);
    g.add_edge(candidates[k].first, candidates[k].second, value);
  }
  return g;
}

ConnectionGraph random_sparse_graph(std::mt19937_64& rng, std::size_t edge_count) {
  std::size_t n = std::max<std::size_t>(1, edge_count / 10);
  while (n * (n + 1) / 2 + n * n < edge_count) ++n;
  ConnectionGraph g;
  for (std::size_t i = 0; i < n; ++i) g.add_vertex("s" + std::to_string(i), VertexKind::kSymbol);
  for (std::size_t j = 0; j < n; ++j) g.add_vertex("t" + std::to_string(j), VertexKind::kText);

  std::uniform_int_distribution<std::size_t> symbol(0, n - 1);
  std::uniform_int_distribution<std::size_t> any(0, 2 * n - 1);
  std::uniform_int_distribution<int> high(900, 1000);
  std::uniform_int_distribution<int> low(1, 1000);
  std::unordered_set<std::uint64_t> used;
  auto add = [&](VertexIndex a, VertexIndex b, int level) {
    if (a > b) std::swap(a, b);
    if (!used.insert((static_cast<std::uint64_t>(a) << 32) | b).second) return;
    g.add_edge(a, b, level / 1000.0);
  };
  for (std::size_t s = 0; s < n && g.edge_count() < edge_count; ++s) add(s, s, high(rng));
  for (std::size_t t = n; t < 2 * n && g.edge_count() < edge_count; ++t) {
    add(symbol(rng), t, high(rng));
  }
  while (g.edge_count() < edge_count) add(symbol(rng), any(rng), low(rng));
  return g;
}

}  // namespace ctxfuse
