#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "ctxfuse/connection_graph.hpp"

namespace ctxfuse {

enum class EntityKind { kSymbol, kText };

struct Candidate {
  std::string label;
  double prob = 0.0;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

/// A recognised symbol or text string with the recognizer's distribution
/// over its alternatives.
struct Entity {
  std::string id;
  EntityKind kind = EntityKind::kSymbol;
  std::vector<Candidate> candidates;
  std::optional<Point> position;

  const Candidate* find_candidate(std::string_view label) const;

  friend bool operator==(const Entity&, const Entity&) = default;
};

/// Throws kInvariantError unless ids are unique and every entity has unique
/// labels with positive probabilities summing to one.
void validate_entities(std::span<const Entity> entities);

/// Context typicality of label pairs and of isolated symbols, read as
/// possibilities. Missing pair entries read as 0; missing isolation entries
/// read as the isolation default.
class TypicalityModel {
 public:
  explicit TypicalityModel(double isolation_default = 0.0);

  /// Symmetric: (a, b) and (b, a) address the same entry.
  void set_pair(const std::string& a, const std::string& a_label,
                const std::string& b, const std::string& b_label, double value);
  double pair(const std::string& a, const std::string& a_label,
              const std::string& b, const std::string& b_label) const;

  void set_isolation(const std::string& id, const std::string& label,
                     double value);
  double isolation(const std::string& id, const std::string& label) const;
  /// Explicit entry, if any.
  std::optional<double> isolation_entry(const std::string& id,
                                        const std::string& label) const;

  double isolation_default() const { return isolation_default_; }
  void set_isolation_default(double value);

  /// True when some label combination of the two entities has a nonzero
  /// pair value.
  bool linked(const std::string& a, const std::string& b) const;

  using PairKey = std::tuple<std::string, std::string, std::string, std::string>;
  using IsolationKey = std::pair<std::string, std::string>;
  /// Canonical keys: first entity id is the smaller one.
  const std::map<PairKey, double>& pairs() const { return pairs_; }
  const std::map<IsolationKey, double>& isolations() const { return isolation_; }

  /// Throws kInvariantError when an entry references an unknown entity or
  /// label, pairs two text entities, or names a text entity in the isolation
  /// table.
  void validate(std::span<const Entity> entities) const;

  /// Entries whose entities all lie in `ids`.
  TypicalityModel restricted_to(std::span<const std::string> ids) const;

 private:
  double isolation_default_;
  std::map<PairKey, double> pairs_;
  std::map<IsolationKey, double> isolation_;
};

/// One chosen label per entity, keyed by entity id.
struct Labeling {
  std::map<std::string, std::string> assignment;

  friend bool operator==(const Labeling&, const Labeling&) = default;
};

struct PosteriorRow {
  Labeling labeling;
  double prior = 0.0;
  double plausibility = 0.0;
  double posterior = 0.0;
};

/// Rows in enumeration order.
struct PosteriorTable {
  std::vector<std::string> entity_ids;
  std::vector<PosteriorRow> rows;
  /// 1 - sum prior * plausibility / max plausibility: the conflict between
  /// the recognizer distribution and the consonant bpa of the normalized
  /// plausibilities.
  double conflict_mass = 0.0;
};

inline constexpr std::size_t kDefaultLabelingCap = 1'000'000;

struct EngineOptions {
  std::size_t max_labelings = kDefaultLabelingCap;
  /// Edges valued below this are pruned from every connection graph.
  double threshold = 0.0;
};

/// Every combination of one candidate per entity: entities ordered by id, the
/// first entity varying slowest, candidates in their given order. Throws
/// kTooManyLabelings above `max_labelings`.
std::vector<Labeling> enumerate_labelings(
    std::span<const Entity> entities,
    std::size_t max_labelings = kDefaultLabelingCap);

/// Connection graph of one labeling: a vertex per entity (ordered by id), an
/// edge per entity pair with positive typicality, a self-loop per symbol with
/// positive isolation typicality.
ConnectionGraph graph_for(const Labeling& labeling,
                          std::span<const Entity> entities,
                          const TypicalityModel& tm);

double labeling_plausibility(const Labeling& labeling,
                             std::span<const Entity> entities,
                             const TypicalityModel& tm,
                             const EngineOptions& options = {});

/// Product of the recognizer probabilities of the chosen labels.
double labeling_prior(const Labeling& labeling, std::span<const Entity> entities);

/// Fuses priors with plausibilities over the whole labeling space. Throws
/// kZeroEvidence or kTooManyLabelings.
PosteriorTable posterior(std::span<const Entity> entities,
                         const TypicalityModel& tm,
                         const EngineOptions& options = {});

struct SubProblem {
  std::vector<Entity> entities;
  TypicalityModel typicality;
};

/// Connected components of the graph linking entities that share any nonzero
/// pair entry. Components are ordered by their smallest entity id.
std::vector<SubProblem> decompose(std::span<const Entity> entities,
                                  const TypicalityModel& tm);

/// posterior() per component. Components are treated as independent, so the
/// joint posterior of a full labeling is the product of the component
/// posteriors (see joint_posterior). Min-based plausibility does not factor
/// over components, so this approximates posterior() in general.
std::vector<PosteriorTable> posterior_decomposed(std::span<const Entity> entities,
                                                 const TypicalityModel& tm,
                                                 const EngineOptions& options = {});

/// Product over `tables` of the posterior of the row that agrees with
/// `labeling`; 0 when some table has no agreeing row.
double joint_posterior(std::span<const PosteriorTable> tables,
                       const Labeling& labeling);

}  // namespace ctxfuse
