#include "ctxfuse/labeling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "ctxfuse/error.hpp"
#include "ctxfuse/fusion.hpp"

namespace ctxfuse {
namespace {

void require_unit_interval(double value, const std::string& what) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw Error(ErrorCode::kInvariantError,
                what + " value " + std::to_string(value) + " is outside [0,1]");
  }
}

// Index-based view of a validated problem, with entities sorted by id.
struct Compiled {
  std::vector<const Entity*> entities;
  // pair[i * n + j] for i < j: values indexed by ci * |cand(j)| + cj.
  std::vector<std::vector<double>> pair;
  std::vector<std::vector<double>> isolation;

  std::size_t size() const { return entities.size(); }
};

Compiled compile(std::span<const Entity> entities, const TypicalityModel& tm) {
  validate_entities(entities);
  tm.validate(entities);
  Compiled c;
  for (const auto& e : entities) c.entities.push_back(&e);
  std::sort(c.entities.begin(), c.entities.end(),
            [](const Entity* x, const Entity* y) { return x->id < y->id; });
  const std::size_t n = c.size();
  c.pair.resize(n * n);
  c.isolation.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Entity& a = *c.entities[i];
    if (a.kind == EntityKind::kSymbol) {
      for (const auto& cand : a.candidates) {
        c.isolation[i].push_back(tm.isolation(a.id, cand.label));
      }
    }
    for (std::size_t j = i + 1; j < n; ++j) {
      const Entity& b = *c.entities[j];
      if (a.kind == EntityKind::kText && b.kind == EntityKind::kText) continue;
      auto& table = c.pair[i * n + j];
      table.reserve(a.candidates.size() * b.candidates.size());
      for (const auto& ca : a.candidates) {
        for (const auto& cb : b.candidates) {
          table.push_back(tm.pair(a.id, ca.label, b.id, cb.label));
        }
      }
    }
  }
  return c;
}

ConnectionGraph build_graph(const Compiled& c,
                            const std::vector<std::size_t>& choice) {
  ConnectionGraph g;
  const std::size_t n = c.size();
  for (const Entity* e : c.entities) {
    g.add_vertex(e->id, e->kind == EntityKind::kSymbol ? VertexKind::kSymbol
                                                       : VertexKind::kText);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!c.isolation[i].empty()) {
      const double loop = c.isolation[i][choice[i]];
      if (loop > 0.0) g.add_edge(i, i, loop);
    }
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto& table = c.pair[i * n + j];
      if (table.empty()) continue;
      const double value =
          table[choice[i] * c.entities[j]->candidates.size() + choice[j]];
      if (value > 0.0) g.add_edge(i, j, value);
    }
  }
  return g;
}

std::vector<std::size_t> to_choices(const Compiled& c, const Labeling& labeling) {
  if (labeling.assignment.size() != c.size()) {
    throw Error(ErrorCode::kInvariantError,
                "labeling assigns " + std::to_string(labeling.assignment.size()) +
                    " entities, problem has " + std::to_string(c.size()));
  }
  std::vector<std::size_t> choice(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    const Entity& e = *c.entities[i];
    auto it = labeling.assignment.find(e.id);
    if (it == labeling.assignment.end()) {
      throw Error(ErrorCode::kInvariantError,
                  "labeling does not cover entity '" + e.id + "'");
    }
    const Candidate* cand = e.find_candidate(it->second);
    if (cand == nullptr) {
      throw Error(ErrorCode::kInvariantError, "label '" + it->second +
                                                  "' is not a candidate of '" +
                                                  e.id + "'");
    }
    choice[i] = static_cast<std::size_t>(cand - e.candidates.data());
  }
  return choice;
}

Labeling to_labeling(const Compiled& c, const std::vector<std::size_t>& choice) {
  Labeling l;
  for (std::size_t i = 0; i < c.size(); ++i) {
    l.assignment.emplace(c.entities[i]->id,
                         c.entities[i]->candidates[choice[i]].label);
  }
  return l;
}

std::size_t count_labelings(const std::vector<const Entity*>& entities,
                            std::size_t cap) {
  std::size_t total = 1;
  for (const Entity* e : entities) {
    const std::size_t k = e->candidates.size();
    if (total > cap / k) {
      throw Error(ErrorCode::kTooManyLabelings,
                  "labeling space exceeds the cap of " + std::to_string(cap) +
                      "; decompose the problem or prune low typicality values");
    }
    total *= k;
  }
  if (total > cap) {
    throw Error(ErrorCode::kTooManyLabelings,
                "labeling space exceeds the cap of " + std::to_string(cap));
  }
  return total;
}

// Odometer step; the last entity varies fastest. False after the last one.
bool next_choice(const Compiled& c, std::vector<std::size_t>& choice) {
  for (std::size_t i = c.size(); i-- > 0;) {
    if (++choice[i] < c.entities[i]->candidates.size()) return true;
    choice[i] = 0;
  }
  return false;
}

double prior_of(const Compiled& c, const std::vector<std::size_t>& choice) {
  double p = 1.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    p *= c.entities[i]->candidates[choice[i]].prob;
  }
  return p;
}

double plausibility_of(const Compiled& c, const std::vector<std::size_t>& choice,
                       const EngineOptions& options) {
  ConnectionGraph g = build_graph(c, choice);
  if (options.threshold > 0.0) g = threshold_prune(g, options.threshold);
  return solution_value(g);
}

}  // namespace

const Candidate* Entity::find_candidate(std::string_view label) const {
  for (const auto& c : candidates) {
    if (c.label == label) return &c;
  }
  return nullptr;
}

void validate_entities(std::span<const Entity> entities) {
  std::set<std::string_view> ids;
  for (const auto& e : entities) {
    if (!ids.insert(e.id).second) {
      throw Error(ErrorCode::kInvariantError, "duplicate entity id '" + e.id + "'");
    }
    if (e.candidates.empty()) {
      throw Error(ErrorCode::kInvariantError,
                  "entity '" + e.id + "' has no candidates");
    }
    std::set<std::string_view> labels;
    double total = 0.0;
    for (const auto& c : e.candidates) {
      if (!labels.insert(c.label).second) {
        throw Error(ErrorCode::kInvariantError,
                    "entity '" + e.id + "' repeats label '" + c.label + "'");
      }
      if (!(c.prob > 0.0) || !std::isfinite(c.prob)) {
        throw Error(ErrorCode::kInvariantError,
                    "entity '" + e.id + "' has non-positive probability for '" +
                        c.label + "'");
      }
      total += c.prob;
    }
    if (std::abs(total - 1.0) > kNormTolerance) {
      throw Error(ErrorCode::kInvariantError,
                  "candidate probabilities of entity '" + e.id + "' sum to " +
                      std::to_string(total));
    }
  }
}

TypicalityModel::TypicalityModel(double isolation_default) {
  set_isolation_default(isolation_default);
}

void TypicalityModel::set_isolation_default(double value) {
  require_unit_interval(value, "isolation default");
  isolation_default_ = value;
}

void TypicalityModel::set_pair(const std::string& a, const std::string& a_label,
                               const std::string& b, const std::string& b_label,
                               double value) {
  require_unit_interval(value, "pair typicality");
  if (a == b) {
    throw Error(ErrorCode::kInvariantError,
                "pair entry relates entity '" + a + "' to itself");
  }
  if (a < b) {
    pairs_[{a, a_label, b, b_label}] = value;
  } else {
    pairs_[{b, b_label, a, a_label}] = value;
  }
}

double TypicalityModel::pair(const std::string& a, const std::string& a_label,
                             const std::string& b,
                             const std::string& b_label) const {
  auto it = a < b ? pairs_.find({a, a_label, b, b_label})
                  : pairs_.find({b, b_label, a, a_label});
  return it == pairs_.end() ? 0.0 : it->second;
}

void TypicalityModel::set_isolation(const std::string& id,
                                    const std::string& label, double value) {
  require_unit_interval(value, "isolation typicality");
  isolation_[{id, label}] = value;
}

double TypicalityModel::isolation(const std::string& id,
                                  const std::string& label) const {
  return isolation_entry(id, label).value_or(isolation_default_);
}

std::optional<double> TypicalityModel::isolation_entry(
    const std::string& id, const std::string& label) const {
  auto it = isolation_.find({id, label});
  if (it == isolation_.end()) return std::nullopt;
  return it->second;
}

bool TypicalityModel::linked(const std::string& a, const std::string& b) const {
  const std::string& lo = a < b ? a : b;
  const std::string& hi = a < b ? b : a;
  for (auto it = pairs_.lower_bound({lo, "", "", ""});
       it != pairs_.end() && std::get<0>(it->first) == lo; ++it) {
    if (std::get<2>(it->first) == hi && it->second > 0.0) return true;
  }
  return false;
}

void TypicalityModel::validate(std::span<const Entity> entities) const {
  auto find = [&](const std::string& id) -> const Entity* {
    for (const auto& e : entities) {
      if (e.id == id) return &e;
    }
    return nullptr;
  };
  auto require = [&](const std::string& id, const std::string& label) {
    const Entity* e = find(id);
    if (e == nullptr) {
      throw Error(ErrorCode::kInvariantError,
                  "typicality entry references unknown entity '" + id + "'");
    }
    if (e->find_candidate(label) == nullptr) {
      throw Error(ErrorCode::kInvariantError,
                  "typicality entry references unknown label '" + label +
                      "' of entity '" + id + "'");
    }
    return e;
  };
  for (const auto& [key, value] : pairs_) {
    const auto& [a, a_label, b, b_label] = key;
    const Entity* ea = require(a, a_label);
    const Entity* eb = require(b, b_label);
    if (ea->kind == EntityKind::kText && eb->kind == EntityKind::kText) {
      throw Error(ErrorCode::kInvariantError, "pair entry relates text entities '" +
                                                  a + "' and '" + b + "'");
    }
  }
  for (const auto& [key, value] : isolation_) {
    const Entity* e = require(key.first, key.second);
    if (e->kind != EntityKind::kSymbol) {
      throw Error(ErrorCode::kInvariantError,
                  "isolation entry for text entity '" + key.first + "'");
    }
  }
}

TypicalityModel TypicalityModel::restricted_to(
    std::span<const std::string> ids) const {
  std::set<std::string_view> keep(ids.begin(), ids.end());
  TypicalityModel out(isolation_default_);
  for (const auto& [key, value] : pairs_) {
    if (keep.contains(std::get<0>(key)) && keep.contains(std::get<2>(key))) {
      out.pairs_.emplace(key, value);
    }
  }
  for (const auto& [key, value] : isolation_) {
    if (keep.contains(key.first)) out.isolation_.emplace(key, value);
  }
  return out;
}

std::vector<Labeling> enumerate_labelings(std::span<const Entity> entities,
                                          std::size_t max_labelings) {
  validate_entities(entities);
  Compiled c;
  for (const auto& e : entities) c.entities.push_back(&e);
  std::sort(c.entities.begin(), c.entities.end(),
            [](const Entity* x, const Entity* y) { return x->id < y->id; });
  std::vector<Labeling> out;
  out.reserve(count_labelings(c.entities, max_labelings));
  std::vector<std::size_t> choice(c.size(), 0);
  do {
    out.push_back(to_labeling(c, choice));
  } while (next_choice(c, choice));
  return out;
}

ConnectionGraph graph_for(const Labeling& labeling,
                          std::span<const Entity> entities,
                          const TypicalityModel& tm) {
  const Compiled c = compile(entities, tm);
  return build_graph(c, to_choices(c, labeling));
}

double labeling_plausibility(const Labeling& labeling,
                             std::span<const Entity> entities,
                             const TypicalityModel& tm,
                             const EngineOptions& options) {
  const Compiled c = compile(entities, tm);
  return plausibility_of(c, to_choices(c, labeling), options);
}

double labeling_prior(const Labeling& labeling, std::span<const Entity> entities) {
  validate_entities(entities);
  Compiled c;
  for (const auto& e : entities) c.entities.push_back(&e);
  std::sort(c.entities.begin(), c.entities.end(),
            [](const Entity* x, const Entity* y) { return x->id < y->id; });
  return prior_of(c, to_choices(c, labeling));
}

PosteriorTable posterior(std::span<const Entity> entities,
                         const TypicalityModel& tm, const EngineOptions& options) {
  const Compiled c = compile(entities, tm);
  const std::size_t total = count_labelings(c.entities, options.max_labelings);

  PosteriorTable table;
  for (const Entity* e : c.entities) table.entity_ids.push_back(e->id);
  table.rows.reserve(total);
  std::vector<double> priors;
  std::vector<double> plausibilities;
  priors.reserve(total);
  plausibilities.reserve(total);

  std::vector<std::size_t> choice(c.size(), 0);
  do {
    PosteriorRow row;
    row.labeling = to_labeling(c, choice);
    row.prior = prior_of(c, choice);
    row.plausibility = plausibility_of(c, choice, options);
    priors.push_back(row.prior);
    plausibilities.push_back(row.plausibility);
    table.rows.push_back(std::move(row));
  } while (next_choice(c, choice));

  const auto fused = fuse_prob_plaus(priors, plausibilities);
  const double top = *std::max_element(plausibilities.begin(), plausibilities.end());
  double agreement = 0.0;
  for (std::size_t k = 0; k < table.rows.size(); ++k) {
    table.rows[k].posterior = fused[k];
    agreement += priors[k] * plausibilities[k] / top;
  }
  table.conflict_mass = std::max(0.0, 1.0 - agreement);
  return table;
}

std::vector<SubProblem> decompose(std::span<const Entity> entities,
                                  const TypicalityModel& tm) {
  validate_entities(entities);
  tm.validate(entities);
  std::vector<const Entity*> sorted;
  for (const auto& e : entities) sorted.push_back(&e);
  std::sort(sorted.begin(), sorted.end(),
            [](const Entity* x, const Entity* y) { return x->id < y->id; });
  const std::size_t n = sorted.size();
  std::map<std::string_view, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) index.emplace(sorted[i]->id, i);

  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto root = [&](std::size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (const auto& [key, value] : tm.pairs()) {
    if (value <= 0.0) continue;
    const std::size_t a = root(index.at(std::get<0>(key)));
    const std::size_t b = root(index.at(std::get<2>(key)));
    // Keep the smaller index as root so components come out ordered.
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }

  std::vector<SubProblem> out;
  std::map<std::size_t, std::size_t> slot;
  std::vector<std::vector<std::string>> ids;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = root(i);
    auto [it, inserted] = slot.emplace(r, out.size());
    if (inserted) {
      out.push_back({{}, TypicalityModel(tm.isolation_default())});
      ids.emplace_back();
    }
    out[it->second].entities.push_back(*sorted[i]);
    ids[it->second].push_back(sorted[i]->id);
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k].typicality = tm.restricted_to(ids[k]);
  }
  return out;
}

std::vector<PosteriorTable> posterior_decomposed(std::span<const Entity> entities,
                                                 const TypicalityModel& tm,
                                                 const EngineOptions& options) {
  std::vector<PosteriorTable> out;
  for (const auto& sub : decompose(entities, tm)) {
    out.push_back(posterior(sub.entities, sub.typicality, options));
  }
  return out;
}

double joint_posterior(std::span<const PosteriorTable> tables,
                       const Labeling& labeling) {
  double product = 1.0;
  for (const auto& table : tables) {
    const PosteriorRow* match = nullptr;
    for (const auto& row : table.rows) {
      const bool agrees = std::all_of(
          row.labeling.assignment.begin(), row.labeling.assignment.end(),
          [&](const auto& kv) {
            auto it = labeling.assignment.find(kv.first);
            return it != labeling.assignment.end() && it->second == kv.second;
          });
      if (agrees) {
        match = &row;
        break;
      }
    }
    if (match == nullptr) return 0.0;
    product *= match->posterior;
  }
  return product;
}

}  // namespace ctxfuse
