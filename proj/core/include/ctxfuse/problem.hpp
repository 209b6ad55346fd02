#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ctxfuse/connection_graph.hpp"
#include "ctxfuse/labeling.hpp"

namespace ctxfuse {

enum class TextMatch { kSuffix, kPrefix, kRegex };

struct TextPattern {
  TextMatch kind = TextMatch::kSuffix;
  std::string pattern;

  friend bool operator==(const TextPattern&, const TextPattern&) = default;
};

enum class Falloff { kNone, kLinear };

/// "If a symbol of class X and a text matching P, then possibility v",
/// optionally attenuated by the symbol-text distance.
struct Rule {
  /// Exact symbol label or a glob (`*`, `?`, `[...]`).
  std::string symbol_class;
  TextPattern text_pattern;
  /// In (0,1].
  double possibility = 1.0;
  /// Same units as entity positions; pairs farther apart contribute 0.
  std::optional<double> max_distance;
  Falloff falloff = Falloff::kNone;

  friend bool operator==(const Rule&, const Rule&) = default;
};

struct PairEntry {
  std::string a;
  std::string a_label;
  std::string b;
  std::string b_label;
  double value = 0.0;

  friend bool operator==(const PairEntry&, const PairEntry&) = default;
};

struct IsolationEntry {
  std::string id;
  std::string label;
  double value = 0.0;

  friend bool operator==(const IsolationEntry&, const IsolationEntry&) = default;
};

struct ExplicitTypicality {
  std::vector<PairEntry> pairs;
  std::vector<IsolationEntry> isolation;

  friend bool operator==(const ExplicitTypicality&,
                         const ExplicitTypicality&) = default;
};

struct ProblemDefaults {
  double isolation_default = 0.0;

  friend bool operator==(const ProblemDefaults&, const ProblemDefaults&) = default;
};

struct ProblemDocument {
  std::vector<Entity> entities;
  std::optional<ExplicitTypicality> typicality;
  std::optional<std::vector<Rule>> rules;
  ProblemDefaults defaults;

  friend bool operator==(const ProblemDocument&, const ProblemDocument&) = default;
};

/// Parses and validates a problem document. Throws kSchemaError (message
/// starts with the JSON path of the offending value) or kInvariantError.
ProblemDocument parse_problem(std::string_view text);
std::string serialize_problem(const ProblemDocument& doc);

/// True when the rule fires for this symbol label and text label, ignoring
/// geometry. Throws kBadRegex.
bool rule_matches(const Rule& rule, const std::string& symbol_label,
                  const std::string& text_label);

/// Possibility contributed by `rule` to a matching pair at distance
/// `distance` (nullopt when either position is unknown).
double rule_contribution(const Rule& rule, std::optional<double> distance);

/// Evaluates the rules over every symbol/text label pair (maximum over the
/// firing rules), then applies the explicit table on top. Throws kBadRegex.
TypicalityModel materialize_typicality(const ProblemDocument& doc);

/// Graph fixture: {"vertices":[{"id","kind":"s"|"t"}],"edges":[{"a","b","value"}]}.
ConnectionGraph parse_graph(std::string_view text);
std::string serialize_graph(const ConnectionGraph& g);

/// Posterior output; rows sorted by descending posterior (ties keep
/// enumeration order), truncated to `top_k` rows when given.
std::string serialize_posterior(const PosteriorTable& table,
                                std::optional<std::size_t> top_k = std::nullopt);
std::string serialize_posteriors(const std::vector<PosteriorTable>& tables,
                                 std::optional<std::size_t> top_k = std::nullopt);

}  // namespace ctxfuse
