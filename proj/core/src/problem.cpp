#include "ctxfuse/problem.hpp"

#include <fnmatch.h>

#include <algorithm>
#include <cmath>
#include <regex>

#include <nlohmann/json.hpp>

#include "ctxfuse/error.hpp"

namespace ctxfuse {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::kSchemaError, (path.empty() ? "/" : path) + ": " + what);
}

std::string child(const std::string& path, std::string_view key) {
  return path + "/" + std::string(key);
}

std::string child(const std::string& path, std::size_t index) {
  return path + "/" + std::to_string(index);
}

void expect_object(const json& j, const std::string& path,
                   std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) schema_error(path, "expected an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      schema_error(child(path, key), "unknown field");
    }
  }
}

const json& member(const json& obj, std::string_view key, const std::string& path) {
  auto it = obj.find(std::string(key));
  if (it == obj.end()) schema_error(child(path, key), "missing required field");
  return *it;
}

const json* optional_member(const json& obj, std::string_view key) {
  auto it = obj.find(std::string(key));
  return it == obj.end() || it->is_null() ? nullptr : &*it;
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) schema_error(path, "expected a string");
  return j.get<std::string>();
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) schema_error(path, "expected a number");
  return j.get<double>();
}

const json& as_array(const json& j, const std::string& path) {
  if (!j.is_array()) schema_error(path, "expected an array");
  return j;
}

double unit_value(const json& j, const std::string& path) {
  const double v = as_number(j, path);
  if (!(v >= 0.0 && v <= 1.0)) {
    throw Error(ErrorCode::kInvariantError,
                path + ": value " + std::to_string(v) + " is outside [0,1]");
  }
  return v;
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kSchemaError,
                "invalid JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

Entity parse_entity(const json& j, const std::string& path) {
  expect_object(j, path, {"id", "kind", "candidates", "position"});
  Entity e;
  e.id = as_string(member(j, "id", path), child(path, "id"));
  const std::string kind = as_string(member(j, "kind", path), child(path, "kind"));
  if (kind == "symbol") {
    e.kind = EntityKind::kSymbol;
  } else if (kind == "text") {
    e.kind = EntityKind::kText;
  } else {
    schema_error(child(path, "kind"), "expected \"symbol\" or \"text\"");
  }
  const std::string cpath = child(path, "candidates");
  const json& cands = as_array(member(j, "candidates", path), cpath);
  for (std::size_t i = 0; i < cands.size(); ++i) {
    const std::string p = child(cpath, i);
    expect_object(cands[i], p, {"label", "prob"});
    e.candidates.push_back(
        {as_string(member(cands[i], "label", p), child(p, "label")),
         as_number(member(cands[i], "prob", p), child(p, "prob"))});
  }
  if (const json* pos = optional_member(j, "position")) {
    const std::string p = child(path, "position");
    if (!pos->is_array() || pos->size() != 2) {
      schema_error(p, "expected [x, y]");
    }
    e.position = Point{as_number((*pos)[0], child(p, 0)),
                       as_number((*pos)[1], child(p, 1))};
  }
  return e;
}

Rule parse_rule(const json& j, const std::string& path) {
  expect_object(j, path, {"symbol_class", "text_pattern", "possibility",
                          "max_distance", "falloff"});
  Rule r;
  r.symbol_class =
      as_string(member(j, "symbol_class", path), child(path, "symbol_class"));
  const std::string tp = child(path, "text_pattern");
  const json& pattern = member(j, "text_pattern", path);
  expect_object(pattern, tp, {"suffix", "prefix", "regex"});
  if (pattern.size() != 1) {
    schema_error(tp, "expected exactly one of suffix, prefix, regex");
  }
  const auto entry = pattern.begin();
  const std::string key = entry.key();
  const json& value = entry.value();
  r.text_pattern.kind = key == "suffix"   ? TextMatch::kSuffix
                        : key == "prefix" ? TextMatch::kPrefix
                                          : TextMatch::kRegex;
  r.text_pattern.pattern = as_string(value, child(tp, key));

  const std::string pp = child(path, "possibility");
  r.possibility = as_number(member(j, "possibility", path), pp);
  if (!(r.possibility > 0.0 && r.possibility <= 1.0)) {
    throw Error(ErrorCode::kInvariantError, pp + ": possibility must lie in (0,1]");
  }
  if (const json* d = optional_member(j, "max_distance")) {
    const std::string dp = child(path, "max_distance");
    r.max_distance = as_number(*d, dp);
    if (!(*r.max_distance > 0.0)) {
      throw Error(ErrorCode::kInvariantError, dp + ": max_distance must be positive");
    }
  }
  if (const json* f = optional_member(j, "falloff")) {
    const std::string fp = child(path, "falloff");
    const std::string name = as_string(*f, fp);
    if (name == "none") {
      r.falloff = Falloff::kNone;
    } else if (name == "linear") {
      r.falloff = Falloff::kLinear;
    } else {
      schema_error(fp, "expected \"none\" or \"linear\"");
    }
  }
  if (r.falloff == Falloff::kLinear && !r.max_distance) {
    throw Error(ErrorCode::kInvariantError,
                path + ": linear falloff requires max_distance");
  }
  return r;
}

ExplicitTypicality parse_typicality(const json& j, const std::string& path) {
  expect_object(j, path, {"pairs", "isolation"});
  ExplicitTypicality t;
  if (const json* pairs = optional_member(j, "pairs")) {
    const std::string pp = child(path, "pairs");
    as_array(*pairs, pp);
    for (std::size_t i = 0; i < pairs->size(); ++i) {
      const std::string p = child(pp, i);
      const json& e = (*pairs)[i];
      expect_object(e, p, {"a", "a_label", "b", "b_label", "value"});
      t.pairs.push_back({as_string(member(e, "a", p), child(p, "a")),
                         as_string(member(e, "a_label", p), child(p, "a_label")),
                         as_string(member(e, "b", p), child(p, "b")),
                         as_string(member(e, "b_label", p), child(p, "b_label")),
                         unit_value(member(e, "value", p), child(p, "value"))});
    }
  }
  if (const json* iso = optional_member(j, "isolation")) {
    const std::string ip = child(path, "isolation");
    as_array(*iso, ip);
    for (std::size_t i = 0; i < iso->size(); ++i) {
      const std::string p = child(ip, i);
      const json& e = (*iso)[i];
      expect_object(e, p, {"id", "label", "value"});
      t.isolation.push_back({as_string(member(e, "id", p), child(p, "id")),
                             as_string(member(e, "label", p), child(p, "label")),
                             unit_value(member(e, "value", p), child(p, "value"))});
    }
  }
  return t;
}

// Explicit entries alone; used for validation and as the override layer.
void apply_explicit(const ExplicitTypicality& t, TypicalityModel& tm) {
  for (const auto& p : t.pairs) {
    tm.set_pair(p.a, p.a_label, p.b, p.b_label, p.value);
  }
  for (const auto& i : t.isolation) tm.set_isolation(i.id, i.label, i.value);
}

ordered_json row_json(const PosteriorRow& row) {
  ordered_json assignment = ordered_json::object();
  for (const auto& [id, label] : row.labeling.assignment) assignment[id] = label;
  ordered_json r;
  r["assignment"] = std::move(assignment);
  r["prior"] = row.prior;
  r["plausibility"] = row.plausibility;
  r["posterior"] = row.posterior;
  return r;
}

ordered_json table_json(const PosteriorTable& table,
                        std::optional<std::size_t> top_k, bool with_entities) {
  std::vector<const PosteriorRow*> rows;
  for (const auto& row : table.rows) rows.push_back(&row);
  std::stable_sort(rows.begin(), rows.end(),
                   [](const PosteriorRow* a, const PosteriorRow* b) {
                     return a->posterior > b->posterior;
                   });
  if (top_k && rows.size() > *top_k) rows.resize(*top_k);
  ordered_json out;
  if (with_entities) out["entities"] = table.entity_ids;
  ordered_json labelings = ordered_json::array();
  for (const PosteriorRow* row : rows) labelings.push_back(row_json(*row));
  out["labelings"] = std::move(labelings);
  out["conflict_mass"] = table.conflict_mass;
  return out;
}

}  // namespace

ProblemDocument parse_problem(std::string_view text) {
  const json j = parse_json(text);
  expect_object(j, "", {"entities", "typicality", "rules", "defaults"});
  ProblemDocument doc;
  const json& entities = as_array(member(j, "entities", ""), "/entities");
  for (std::size_t i = 0; i < entities.size(); ++i) {
    doc.entities.push_back(parse_entity(entities[i], child("/entities", i)));
  }
  if (const json* t = optional_member(j, "typicality")) {
    doc.typicality = parse_typicality(*t, "/typicality");
  }
  if (const json* rules = optional_member(j, "rules")) {
    as_array(*rules, "/rules");
    doc.rules.emplace();
    for (std::size_t i = 0; i < rules->size(); ++i) {
      doc.rules->push_back(parse_rule((*rules)[i], child("/rules", i)));
    }
  }
  if (const json* d = optional_member(j, "defaults")) {
    expect_object(*d, "/defaults", {"isolation_default"});
    if (const json* iso = optional_member(*d, "isolation_default")) {
      doc.defaults.isolation_default =
          unit_value(*iso, "/defaults/isolation_default");
    }
  }

  if (!doc.typicality && !doc.rules) {
    throw Error(ErrorCode::kInvariantError,
                "document needs a typicality table, rules, or both");
  }
  validate_entities(doc.entities);
  if (doc.typicality) {
    TypicalityModel tm(doc.defaults.isolation_default);
    apply_explicit(*doc.typicality, tm);
    tm.validate(doc.entities);
  }
  return doc;
}

std::string serialize_problem(const ProblemDocument& doc) {
  ordered_json j;
  ordered_json entities = ordered_json::array();
  for (const auto& e : doc.entities) {
    ordered_json ej;
    ej["id"] = e.id;
    ej["kind"] = e.kind == EntityKind::kSymbol ? "symbol" : "text";
    ordered_json cands = ordered_json::array();
    for (const auto& c : e.candidates) {
      cands.push_back({{"label", c.label}, {"prob", c.prob}});
    }
    ej["candidates"] = std::move(cands);
    if (e.position) ej["position"] = {e.position->x, e.position->y};
    entities.push_back(std::move(ej));
  }
  j["entities"] = std::move(entities);
  if (doc.typicality) {
    ordered_json pairs = ordered_json::array();
    for (const auto& p : doc.typicality->pairs) {
      pairs.push_back({{"a", p.a},
                       {"a_label", p.a_label},
                       {"b", p.b},
                       {"b_label", p.b_label},
                       {"value", p.value}});
    }
    ordered_json iso = ordered_json::array();
    for (const auto& i : doc.typicality->isolation) {
      iso.push_back({{"id", i.id}, {"label", i.label}, {"value", i.value}});
    }
    j["typicality"] = {{"pairs", std::move(pairs)}, {"isolation", std::move(iso)}};
  }
  if (doc.rules) {
    ordered_json rules = ordered_json::array();
    for (const auto& r : *doc.rules) {
      ordered_json rj;
      rj["symbol_class"] = r.symbol_class;
      const char* kind = r.text_pattern.kind == TextMatch::kSuffix   ? "suffix"
                         : r.text_pattern.kind == TextMatch::kPrefix ? "prefix"
                                                                     : "regex";
      rj["text_pattern"] = {{kind, r.text_pattern.pattern}};
      rj["possibility"] = r.possibility;
      if (r.max_distance) rj["max_distance"] = *r.max_distance;
      rj["falloff"] = r.falloff == Falloff::kLinear ? "linear" : "none";
      rules.push_back(std::move(rj));
    }
    j["rules"] = std::move(rules);
  }
  j["defaults"] = {{"isolation_default", doc.defaults.isolation_default}};
  return j.dump(2) + "\n";
}

bool rule_matches(const Rule& rule, const std::string& symbol_label,
                  const std::string& text_label) {
  if (fnmatch(rule.symbol_class.c_str(), symbol_label.c_str(), 0) != 0) {
    return false;
  }
  const std::string& p = rule.text_pattern.pattern;
  switch (rule.text_pattern.kind) {
    case TextMatch::kSuffix:
      return text_label.ends_with(p);
    case TextMatch::kPrefix:
      return text_label.starts_with(p);
    case TextMatch::kRegex:
      try {
        return std::regex_search(text_label, std::regex(p));
      } catch (const std::regex_error& e) {
        throw Error(ErrorCode::kBadRegex, "'" + p + "': " + e.what());
      }
  }
  return false;
}

double rule_contribution(const Rule& rule, std::optional<double> distance) {
  if (!distance || !rule.max_distance) return rule.possibility;
  if (*distance > *rule.max_distance) return 0.0;
  if (rule.falloff == Falloff::kLinear) {
    return rule.possibility * std::max(0.0, 1.0 - *distance / *rule.max_distance);
  }
  return rule.possibility;
}

TypicalityModel materialize_typicality(const ProblemDocument& doc) {
  TypicalityModel tm(doc.defaults.isolation_default);
  if (doc.rules) {
    // Compile every regex once; also surfaces BadRegex for rules that never
    // get a chance to fire.
    std::vector<std::optional<std::regex>> compiled;
    for (const auto& r : *doc.rules) {
      if (r.text_pattern.kind != TextMatch::kRegex) {
        compiled.emplace_back();
        continue;
      }
      try {
        compiled.emplace_back(std::regex(r.text_pattern.pattern));
      } catch (const std::regex_error& e) {
        throw Error(ErrorCode::kBadRegex,
                    "'" + r.text_pattern.pattern + "': " + e.what());
      }
    }
    auto fires = [&](std::size_t k, const std::string& sl, const std::string& tl) {
      const Rule& r = (*doc.rules)[k];
      if (r.text_pattern.kind != TextMatch::kRegex) return rule_matches(r, sl, tl);
      return fnmatch(r.symbol_class.c_str(), sl.c_str(), 0) == 0 &&
             std::regex_search(tl, *compiled[k]);
    };

    for (const auto& s : doc.entities) {
      if (s.kind != EntityKind::kSymbol) continue;
      for (const auto& t : doc.entities) {
        if (t.kind != EntityKind::kText) continue;
        std::optional<double> distance;
        if (s.position && t.position) {
          distance = std::hypot(s.position->x - t.position->x,
                                s.position->y - t.position->y);
        }
        for (const auto& sc : s.candidates) {
          for (const auto& tc : t.candidates) {
            double value = 0.0;
            for (std::size_t k = 0; k < doc.rules->size(); ++k) {
              if (fires(k, sc.label, tc.label)) {
                value = std::max(value, rule_contribution((*doc.rules)[k], distance));
              }
            }
            if (value > 0.0) tm.set_pair(s.id, sc.label, t.id, tc.label, value);
          }
        }
      }
    }
  }
  if (doc.typicality) apply_explicit(*doc.typicality, tm);
  return tm;
}

ConnectionGraph parse_graph(std::string_view text) {
  const json j = parse_json(text);
  expect_object(j, "", {"vertices", "edges"});
  ConnectionGraph g;
  const json& vertices = as_array(member(j, "vertices", ""), "/vertices");
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const std::string p = child("/vertices", i);
    expect_object(vertices[i], p, {"id", "kind"});
    const std::string id = as_string(member(vertices[i], "id", p), child(p, "id"));
    const std::string kind =
        as_string(member(vertices[i], "kind", p), child(p, "kind"));
    if (kind != "s" && kind != "t") schema_error(child(p, "kind"), "expected \"s\" or \"t\"");
    g.add_vertex(id, kind == "s" ? VertexKind::kSymbol : VertexKind::kText);
  }
  const json& edges = as_array(member(j, "edges", ""), "/edges");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::string p = child("/edges", i);
    expect_object(edges[i], p, {"a", "b", "value"});
    g.add_edge(as_string(member(edges[i], "a", p), child(p, "a")),
               as_string(member(edges[i], "b", p), child(p, "b")),
               as_number(member(edges[i], "value", p), child(p, "value")));
  }
  return g;
}

std::string serialize_graph(const ConnectionGraph& g) {
  ordered_json vertices = ordered_json::array();
  for (const auto& v : g.vertices()) {
    vertices.push_back({{"id", v.id}, {"kind", v.kind == VertexKind::kSymbol ? "s" : "t"}});
  }
  ordered_json edges = ordered_json::array();
  for (const auto& e : g.edges()) {
    edges.push_back(
        {{"a", g.vertex(e.a).id}, {"b", g.vertex(e.b).id}, {"value", e.value}});
  }
  ordered_json j;
  j["vertices"] = std::move(vertices);
  j["edges"] = std::move(edges);
  return j.dump(2) + "\n";
}

std::string serialize_posterior(const PosteriorTable& table,
                                std::optional<std::size_t> top_k) {
  return table_json(table, top_k, false).dump(2) + "\n";
}

std::string serialize_posteriors(const std::vector<PosteriorTable>& tables,
                                 std::optional<std::size_t> top_k) {
  ordered_json components = ordered_json::array();
  for (const auto& t : tables) components.push_back(table_json(t, top_k, true));
  ordered_json j;
  j["components"] = std::move(components);
  return j.dump(2) + "\n";
}

}  // namespace ctxfuse
