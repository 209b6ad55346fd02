#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ctxfuse {

enum class VertexKind { kSymbol, kText };

struct Vertex {
  std::string id;
  VertexKind kind;

  friend bool operator==(const Vertex&, const Vertex&) = default;
};

using VertexIndex = std::size_t;
using EdgeIndex = std::size_t;

/// Undirected valued edge. `a <= b`; `a == b` is a symbol self-loop.
struct ValuedEdge {
  VertexIndex a;
  VertexIndex b;
  double value;

  bool is_self_loop() const { return a == b; }

  friend bool operator==(const ValuedEdge&, const ValuedEdge&) = default;
};

/// Symbols and text strings with their positively valued potential
/// connections. At most one edge per endpoint pair; self-loops only on
/// symbols; no text-text edges. Violations throw kMalformedGraph.
class ConnectionGraph {
 public:
  VertexIndex add_vertex(std::string id, VertexKind kind);
  /// `value` must lie in (0,1].
  EdgeIndex add_edge(VertexIndex a, VertexIndex b, double value);
  EdgeIndex add_edge(std::string_view a, std::string_view b, double value);

  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<Vertex>& vertices() const { return vertices_; }
  const std::vector<ValuedEdge>& edges() const { return edges_; }
  const Vertex& vertex(VertexIndex v) const { return vertices_.at(v); }
  const ValuedEdge& edge(EdgeIndex e) const { return edges_.at(e); }
  /// Edges incident to `v`; a self-loop appears once.
  const std::vector<EdgeIndex>& incident(VertexIndex v) const {
    return adjacency_.at(v);
  }
  std::optional<VertexIndex> find_vertex(std::string_view id) const;
  std::optional<EdgeIndex> find_edge(VertexIndex a, VertexIndex b) const;

 private:
  static std::uint64_t pair_key(VertexIndex a, VertexIndex b) {
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
  }

  std::vector<Vertex> vertices_;
  std::vector<ValuedEdge> edges_;
  std::vector<std::vector<EdgeIndex>> adjacency_;
  std::unordered_map<std::string, VertexIndex> by_id_;
  std::unordered_map<std::uint64_t, EdgeIndex> by_pair_;
};

/// Counters from one run of solution_value.
struct SolutionTrace {
  double value = 0.0;
  /// Edges removed in smallest-value order.
  std::size_t outer_iterations = 0;
  /// Degree-one vertices whose edge was forced and which were marked set.
  std::size_t inner_iterations = 0;
  /// Edges removed by forced-edge propagation.
  std::size_t propagated_removals = 0;
};

/// Largest v(G) = min edge value over the solution graphs of `g`: spanning
/// subgraphs where every text vertex has degree one and every symbol vertex
/// has either its self-loop as its only edge or at least one other edge.
/// Returns 0 when no solution graph exists and 1 for a graph without
/// vertices.
double solution_value(const ConnectionGraph& g);
SolutionTrace solution_value_traced(const ConnectionGraph& g);

/// Largest edge count accepted by solution_value_bruteforce.
inline constexpr std::size_t kBruteForceEdgeLimit = 20;

/// Definition-level oracle: enumerates every edge subset. Throws kTooLarge
/// above kBruteForceEdgeLimit edges.
double solution_value_bruteforce(const ConnectionGraph& g);

/// True when `chosen` (a set of edge indices of `g`) satisfies the degree
/// conditions at every vertex.
bool is_feasible(const ConnectionGraph& g, std::span<const EdgeIndex> chosen);

/// Copy of `g` without the edges whose value is below `limit`.
ConnectionGraph threshold_prune(const ConnectionGraph& g, double limit);

/// Parameters for random test graphs.
struct RandomGraphOptions {
  std::size_t max_symbols = 4;
  std::size_t max_texts = 4;
  /// Edges are dropped at random until at most this many remain.
  std::size_t max_edges = kBruteForceEdgeLimit;
  /// Values are drawn from {1/k, ..., k/k} so that ties are common.
  int value_levels = 10;
};

/// Random graph for oracle comparisons: random vertex counts (at least one
/// vertex), per-graph edge density, self-loops and symbol-symbol edges.
ConnectionGraph random_graph(std::mt19937_64& rng,
                             const RandomGraphOptions& options = {});

/// Large sparse graph with exactly `edge_count` edges over roughly edge_count/10 symbols and as many texts. Every text has one edge
/// valued in [0.9, 1] and every symbol a self-loop in [0.9, 1]; the rest are
/// random symbol-text and symbol-symbol edges on a 1/1000 value grid. The
/// low edges can all go before the graph becomes infeasible, so the solver
/// does its full amount of work.
ConnectionGraph random_sparse_graph(std::mt19937_64& rng, std::size_t edge_count);

}  // namespace ctxfuse
