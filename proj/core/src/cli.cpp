#include "ctxfuse/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "ctxfuse/connection_graph.hpp"
#include "ctxfuse/error.hpp"
#include "ctxfuse/fusion.hpp"
#include "ctxfuse/labeling.hpp"
#include "ctxfuse/problem.hpp"

namespace ctxfuse {
namespace {

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

// Saturates at cap + 1.
std::size_t labeling_count(const std::vector<Entity>& entities, std::size_t cap) {
  std::size_t total = 1;
  for (const auto& e : entities) {
    if (total > (cap + 1) / e.candidates.size()) return cap + 1;
    total *= e.candidates.size();
  }
  return std::min(total, cap + 1);
}

struct Options {
  std::string input;
  std::optional<std::size_t> top_k;
  double threshold = 0.0;
  bool decompose = false;
  std::optional<double> isolation_default;
  std::uint64_t seed = 0;
  std::size_t count = 2000;
};

ProblemDocument load_problem(const Options& opt) {
  ProblemDocument doc = parse_problem(read_file(opt.input));
  if (opt.isolation_default) doc.defaults.isolation_default = *opt.isolation_default;
  return doc;
}

int cmd_validate(const Options& opt, std::ostream& out, std::ostream& err) {
  const ProblemDocument doc = load_problem(opt);
  const TypicalityModel tm = materialize_typicality(doc);
  const auto symbols = std::count_if(doc.entities.begin(), doc.entities.end(),
                                     [](const Entity& e) {
                                       return e.kind == EntityKind::kSymbol;
                                     });
  const std::size_t labelings = labeling_count(doc.entities, kDefaultLabelingCap);
  out << "ok: " << doc.entities.size() << " entities (" << symbols << " symbols, "
      << doc.entities.size() - static_cast<std::size_t>(symbols) << " texts)\n";
  out << "labelings: ";
  if (labelings > kDefaultLabelingCap) {
    out << "more than " << kDefaultLabelingCap << " (use --decompose or --threshold)\n";
  } else {
    out << labelings << "\n";
  }
  out << "typicality: " << tm.pairs().size() << " pair entries, "
      << tm.isolations().size() << " isolation entries, isolation default "
      << format_number(tm.isolation_default()) << "\n";
  out << "rules: " << (doc.rules ? doc.rules->size() : 0) << "\n";
  out << "components: " << decompose(doc.entities, tm).size() << "\n";
  for (const auto& e : doc.entities) {
    if (e.kind == EntityKind::kSymbol) continue;
    bool reachable = false;
    for (const auto& s : doc.entities) {
      if (s.kind == EntityKind::kSymbol && tm.linked(s.id, e.id)) reachable = true;
    }
    if (!reachable) {
      err << "warning: text '" << e.id
          << "' has no possible connection; every labeling has plausibility 0\n";
    }
  }
  return kExitOk;
}

void warn_plausibility_sum(const PosteriorTable& table, std::ostream& err) {
  std::vector<double> pl;
  for (const auto& row : table.rows) pl.push_back(row.plausibility);
  if (plausibility_sum_check(pl) == PlausibilitySum::kBelowOne) {
    err << "warning: labeling plausibilities sum to less than 1; they are used "
           "as relative typicality values\n";
  }
}

int cmd_posterior(const Options& opt, std::ostream& out, std::ostream& err) {
  const ProblemDocument doc = load_problem(opt);
  const TypicalityModel tm = materialize_typicality(doc);
  EngineOptions engine;
  engine.threshold = opt.threshold;
  if (opt.decompose) {
    const auto tables = posterior_decomposed(doc.entities, tm, engine);
    for (const auto& t : tables) warn_plausibility_sum(t, err);
    out << serialize_posteriors(tables, opt.top_k);
  } else {
    const auto table = posterior(doc.entities, tm, engine);
    warn_plausibility_sum(table, err);
    out << serialize_posterior(table, opt.top_k);
  }
  return kExitOk;
}

int cmd_value(const Options& opt, std::ostream& out) {
  ConnectionGraph g = parse_graph(read_file(opt.input));
  if (opt.threshold > 0.0) g = threshold_prune(g, opt.threshold);
  out << format_number(solution_value(g)) << "\n";
  return kExitOk;
}

int cmd_oracle_check(const Options& opt, std::ostream& out, std::ostream& err) {
  std::mt19937_64 rng(opt.seed);
  std::size_t mismatches = 0;
  for (std::size_t i = 0; i < opt.count; ++i) {
    const ConnectionGraph g = random_graph(rng);
    const double fast = solution_value(g);
    const double slow = solution_value_bruteforce(g);
    if (fast != slow) {
      if (mismatches == 0) {
        err << "mismatch on graph " << i << ": solution_value "
            << format_number(fast) << ", brute force " << format_number(slow)
            << "\n"
            << serialize_graph(g);
      }
      ++mismatches;
    }
  }
  out << "oracle-check: " << opt.count << " graphs, " << mismatches
      << " mismatches (seed " << opt.seed << ")\n";
  return mismatches == 0 ? kExitOk : kExitOracleMismatch;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{
      "Fuse recognizer probabilities of drawing symbols and texts with "
      "context typicality",
      "ctxfuse"};
  app.require_subcommand(1);
  Options opt;

  auto* validate = app.add_subcommand("validate", "Check a problem document");
  validate->add_option("file", opt.input, "Problem JSON")->required();
  validate->add_option("--isolation-default", opt.isolation_default,
                       "Typicality of an isolated symbol when not tabulated")
      ->check(CLI::Range(0.0, 1.0));

  auto* post = app.add_subcommand("posterior", "Posterior over joint labelings");
  post->add_option("file", opt.input, "Problem JSON")->required();
  post->add_option("--top-k", opt.top_k, "Print only the K most probable rows")
      ->check(CLI::PositiveNumber);
  post->add_option("--threshold", opt.threshold,
                   "Drop connections valued below X")
      ->check(CLI::Range(0.0, 1.0));
  post->add_flag("--decompose", opt.decompose,
                 "Solve independent components separately");
  post->add_option("--isolation-default", opt.isolation_default,
                   "Typicality of an isolated symbol when not tabulated")
      ->check(CLI::Range(0.0, 1.0));

  auto* value = app.add_subcommand("value", "Solution-graph value of a graph fixture");
  value->add_option("file", opt.input, "Graph JSON")->required();
  value->add_option("--threshold", opt.threshold, "Drop edges valued below X")
      ->check(CLI::Range(0.0, 1.0));

  auto* oracle = app.add_subcommand(
      "oracle-check", "Compare solution_value with brute-force enumeration");
  oracle->add_option("--seed", opt.seed, "Random seed");
  oracle->add_option("--count", opt.count, "Number of random graphs");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (validate->parsed()) return cmd_validate(opt, out, err);
    if (post->parsed()) return cmd_posterior(opt, out, err);
    if (value->parsed()) return cmd_value(opt, out);
    return cmd_oracle_check(opt, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    if (e.code() == ErrorCode::kZeroEvidence ||
        e.code() == ErrorCode::kTooManyLabelings) {
      return kExitNoEvidence;
    }
    return kExitInputError;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
}

}  // namespace ctxfuse
