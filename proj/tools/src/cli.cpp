#include "kbmc_cli/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "kbmc/constructor.hpp"
#include "kbmc/evaluator.hpp"
#include "kbmc/oracle.hpp"
#include "kbmc/parser.hpp"

namespace kbmc::cli {

namespace {

using nlohmann::ordered_json;

struct IoFailure {
  std::string message;
};

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoFailure{"cannot read " + path};
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string fixed6(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  // Avoid "-0.000000" for tiny negative rounding residue.
  if (std::string(buf) == "-0.000000") return "0.000000";
  return buf;
}

// What one constructed model answers.
struct Answer {
  const ConstructionResult* model = nullptr;
  std::optional<Distribution> distribution;
  std::optional<Policy> policy;
  std::optional<double> expected_value;
  std::optional<SolveReport> report;
  std::optional<std::string> error;  // evaluation failure
};

// Probability one on the proved outcome of a query discharged by logic alone.
Distribution proved_distribution(const Query& q, const KnowledgeBase& kb,
                                 const ConstructionResult& r) {
  Proposition subject = expand_restricted(q.goals.front(), kb);
  Proposition proved = apply(r.answer, q.goals.front());
  Distribution d{subject, std::vector<double>(subject.outcome_count(), 0.0)};
  std::vector<Outcome> outs = outcomes_of(subject);
  for (std::size_t k = 0; k < outs.size(); ++k) {
    if (outs[k].ground() == proved) d.probs[k] = 1.0;
  }
  return d;
}

Answer answer_with_evaluator(const Query& q, const KnowledgeBase& kb, const ConstructionResult& r) {
  Answer a;
  a.model = &r;
  try {
    if (q.kind == Query::Kind::kDist) {
      if (r.query_node) {
        DistributionSolution s = solve_distribution(r.diagram, *r.query_node);
        a.distribution = s.distribution;
        a.report = s.report;
      } else {
        a.distribution = proved_distribution(q, kb, r);
        a.report = SolveReport{};
      }
    } else if (q.kind == Query::Kind::kDecide) {
      DecisionSolution s = solve_decision(r.diagram);
      a.policy = s.policy;
      a.expected_value = s.expected_value;
      a.report = s.report;
    }
  } catch (const EvaluationError& e) {
    a.error = e.what();
  }
  return a;
}

Answer answer_with_oracle(const Query& q, const KnowledgeBase& kb, const ConstructionResult& r) {
  Answer a;
  a.model = &r;
  try {
    if (q.kind == Query::Kind::kDist) {
      a.distribution = r.query_node ? oracle_distribution(r.diagram, *r.query_node)
                                    : proved_distribution(q, kb, r);
    } else if (q.kind == Query::Kind::kDecide) {
      auto [policy, eu] = oracle_policy(r.diagram);
      a.policy = std::move(policy);
      a.expected_value = eu;
    }
  } catch (const OracleLimitError& e) {
    a.error = e.what();
  }
  return a;
}

std::string binding_text(const Query& q, const Substitution& answer) {
  std::string out;
  for (const std::string& v : q.variables()) {
    if (const Term* t = answer.lookup(v)) out += "  ?" + v + " = " + to_string(*t) + "\n";
  }
  return out;
}

void render_text(const Query& q, const CliConfig& cfg, const std::vector<Answer>& answers,
                 std::ostream& out) {
  for (std::size_t m = 0; m < answers.size(); ++m) {
    const Answer& a = answers[m];
    if (cfg.models) out << "model " << m + 1 << " (" << to_string(a.model->kind) << ")\n";
    if (a.error) {
      out << "evaluation failed: " << *a.error << "\n";
    } else if (q.kind == Query::Kind::kLogic) {
      out << "yes\n" << binding_text(q, a.model->answer);
    } else if (a.distribution) {
      std::vector<Outcome> outs = a.distribution->outcomes();
      for (std::size_t k = 0; k < outs.size(); ++k) {
        out << outs[k].label() << " " << fixed6(a.distribution->probs[k]) << "\n";
      }
    } else if (a.policy) {
      out << to_string(*a.policy);
      out << "expected value " << fixed6(*a.expected_value) << "\n";
    }
    if (cfg.trace) out << "trace:\n" << to_string(a.model->trace);
    if (cfg.explain && a.report) out << "solve:\n" << to_string(*a.report);
  }
}

ordered_json substitution_json(const Substitution& theta) {
  ordered_json j = ordered_json::object();
  for (const auto& [var, term] : theta.bindings()) j[var] = to_string(term);
  return j;
}

ordered_json answer_json(const Answer& a) {
  ordered_json j;
  j["kind"] = to_string(a.model->kind);
  j["bindings"] = substitution_json(a.model->answer);
  j["nodes"] = a.model->diagram.size();
  if (a.error) j["error"] = *a.error;
  if (a.distribution) {
    ordered_json dist = ordered_json::array();
    std::vector<Outcome> outs = a.distribution->outcomes();
    for (std::size_t k = 0; k < outs.size(); ++k) {
      dist.push_back({{"outcome", outs[k].label()}, {"probability", a.distribution->probs[k]}});
    }
    j["distribution"] = dist;
  }
  if (a.policy) {
    ordered_json policy = ordered_json::array();
    for (const auto& [id, rule] : *a.policy) {
      std::vector<std::size_t> sizes;
      std::vector<std::vector<std::string>> names;
      ordered_json context = ordered_json::array();
      for (const Proposition& axis : rule.context_axes) {
        sizes.push_back(axis.outcome_count());
        names.push_back(outcome_labels(axis));
        context.push_back(to_string(axis));
      }
      ordered_json rows = ordered_json::array();
      for (std::size_t r = 0; r < rule.choice.size(); ++r) {
        std::vector<std::size_t> digits = joint_digits(r, sizes);
        ordered_json when = ordered_json::array();
        for (std::size_t k = 0; k < digits.size(); ++k) when.push_back(names[k][digits[k]]);
        rows.push_back({{"when", when}, {"choose", rule.chosen(r)}});
      }
      policy.push_back({{"decision", to_string(rule.label)}, {"context", context}, {"rules", rows}});
    }
    j["policy"] = policy;
    j["expected_value"] = *a.expected_value;
  }
  ordered_json steps = ordered_json::array();
  for (const TraceStep& s : a.model->trace.steps) {
    ordered_json st;
    st["rule"] = to_string(s.rule);
    st["subgoal"] = to_string(s.subgoal);
    st["depth"] = s.depth;
    st["guard"] = s.guard;
    st["declaration"] = s.declaration ? ordered_json(*s.declaration) : ordered_json(nullptr);
    st["node"] = s.node ? ordered_json(to_string(*s.node)) : ordered_json(nullptr);
    st["consumer"] = s.consumer ? ordered_json(to_string(*s.consumer)) : ordered_json(nullptr);
    st["theta"] = substitution_json(s.theta);
    steps.push_back(std::move(st));
  }
  j["trace"] = steps;
  ordered_json ops = ordered_json::array();
  if (a.report) {
    for (const std::string& op : a.report->operations) ops.push_back(op);
  }
  j["operations"] = ops;
  return j;
}

using Solver = Answer (*)(const Query&, const KnowledgeBase&, const ConstructionResult&);

// One query; writes to out/err and returns its exit code.
int answer_query(const std::string& text, const KnowledgeBase& kb, const CliConfig& cfg,
                 Solver solve, std::ostream& out, std::ostream& err) {
  Query q;
  try {
    q = parse_query(text);
    validate_query(q, kb);
  } catch (const ParseFailure& f) {
    for (const ParseError& e : f.errors()) err << to_string(e) << "\n";
    return kParseError;
  }

  ProofConfig proof;
  proof.depth_limit = cfg.depth;
  ConstructionFailure failure;
  std::vector<ConstructionResult> models =
      enumerate_models(q, kb, cfg.models.value_or(1), proof, &failure);

  if (models.empty()) {
    if (cfg.format == Format::kJson) {
      ordered_json j;
      j["query"] = to_string(q);
      j["query_kind"] = to_string(q.kind);
      j["status"] = "failed";
      j["failure"] = to_string(failure.kind);
      j["models"] = ordered_json::array();
      out << j.dump(2) << "\n";
    } else if (q.kind == Query::Kind::kLogic) {
      out << "no\n";
    }
    err << "construction failed: " << to_string(failure.kind);
    if (!failure.detail.empty()) err << " (" << failure.detail << ")";
    err << "\n";
    return kConstructionFailed;
  }

  if (cfg.dot_path) {
    std::ofstream dot(*cfg.dot_path, std::ios::binary);
    if (!dot || !(dot << to_dot(models.front().diagram))) {
      err << "cannot write " << *cfg.dot_path << "\n";
      return kIoError;
    }
  }

  std::vector<Answer> answers;
  for (const ConstructionResult& r : models) answers.push_back(solve(q, kb, r));
  bool failed = std::any_of(answers.begin(), answers.end(), [](const Answer& a) { return a.error; });

  if (cfg.format == Format::kJson) {
    ordered_json j;
    j["query"] = to_string(q);
    j["query_kind"] = to_string(q.kind);
    j["status"] = failed ? "failed" : "ok";
    ordered_json ms = ordered_json::array();
    for (const Answer& a : answers) ms.push_back(answer_json(a));
    j["models"] = ms;
    out << j.dump(2) << "\n";
  } else {
    render_text(q, cfg, answers, out);
  }
  return failed ? kConstructionFailed : kOk;
}

int drive(const CliConfig& cfg, Solver solve, std::istream& in, std::ostream& out,
          std::ostream& err) {
  KnowledgeBase kb;
  std::optional<std::string> query = cfg.query;
  try {
    std::string text = read_file(cfg.kb_path);
    kb = parse_kb(text, cfg.kb_path);
    if (cfg.query_file) query = read_file(*cfg.query_file);
  } catch (const IoFailure& e) {
    err << e.message << "\n";
    return kIoError;
  } catch (const ParseFailure& f) {
    for (const ParseError& e : f.errors()) err << to_string(e) << "\n";
    return kParseError;
  }
  if (query) return answer_query(*query, kb, cfg, solve, out, err);

  // Line mode: the KB is loaded once and never changed by a query.
  int worst = kOk;
  std::string line;
  while (std::getline(in, line)) {
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '%') continue;
    if (cfg.format == Format::kText) out << "> " << line.substr(first) << "\n";
    worst = std::max(worst, answer_query(line, kb, cfg, solve, out, err));
  }
  return worst;
}

}  // namespace

int run(const CliConfig& cfg, std::istream& in, std::ostream& out, std::ostream& err) {
  return drive(cfg, answer_with_evaluator, in, out, err);
}

int oracle(const CliConfig& cfg, std::istream& in, std::ostream& out, std::ostream& err) {
  return drive(cfg, answer_with_oracle, in, out, err);
}

int validate(const std::string& kb_path, std::ostream& out, std::ostream& err) {
  try {
    KnowledgeBase kb = parse_kb(read_file(kb_path), kb_path);
    std::size_t counts[5] = {};
    for (const Influence& inf : kb.influences()) counts[inf.index()]++;
    out << kb_path << ": ok\n"
        << "  domains " << kb.domains().size() << "\n"
        << "  facts " << kb.facts().size() << "\n"
        << "  logic " << counts[0] << "\n"
        << "  prior " << counts[1] << "\n"
        << "  prob " << counts[2] << "\n"
        << "  info " << counts[3] << "\n"
        << "  value " << counts[4] << "\n";
    return kOk;
  } catch (const IoFailure& e) {
    err << e.message << "\n";
    return kIoError;
  } catch (const ParseFailure& f) {
    for (const ParseError& e : f.errors()) err << to_string(e) << "\n";
    return kParseError;
  }
}

}  // namespace kbmc::cli
