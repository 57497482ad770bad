#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "pha/diagnostics.hpp"
#include "pha/syntax.hpp"
#include "pha/term.hpp"

namespace pha {

struct RuleMatch {
  Clause clause;              // renamed apart
  Substitution unifier;       // mgu of the query atom and the renamed head
};

struct AssumableMatch {
  Term instance;              // ground instance of the template
  double prior {0.0};
  Substitution unifier;       // binds variables of the query atom
  std::size_t decl_index {0};
};

// Validated, indexed abductive scheme <F, H>. Immutable once built.
class KnowledgeBase {
 public:
  const std::map<Predicate, std::vector<Clause>>& rules() const noexcept { return _rules; }
  const std::vector<Clause>& constraints() const noexcept { return _constraints; }
  const std::vector<AssumableDecl>& assumables() const noexcept { return _assumables; }

  // True when the predicate dependency graph of definite clauses has a cycle.
  bool cyclic() const noexcept { return _cyclic; }

  std::size_t rule_count() const {
    std::size_t n = 0;
    for (const auto& [p, cs] : _rules) n += cs.size();
    return n;
  }

  // Clauses whose head unifies with `atom`, renamed apart, in source order.
  // The constraints are the rules for `false`.
  std::vector<RuleMatch> matching_rules(const Term& atom, FreshCounter& fresh) const {
    std::vector<RuleMatch> out;
    const std::vector<Clause>* candidates = nullptr;
    if (atom.is_false()) {
      candidates = &_constraints;
    } else {
      auto it = _rules.find(predicate_of(atom));
      if (it == _rules.end()) return out;
      candidates = &it->second;
    }
    for (const auto& c : *candidates) {
      std::vector<Term> terms;
      terms.reserve(c.body.size() + 1);
      terms.push_back(c.head);
      terms.insert(terms.end(), c.body.begin(), c.body.end());
      auto renamed = rename_apart(terms, fresh);
      auto mgu = unify(atom, renamed.front());
      if (!mgu) continue;
      Clause rc {renamed.front(), {renamed.begin() + 1, renamed.end()}, c.location};
      out.push_back({std::move(rc), std::move(*mgu)});
    }
    return out;
  }

  std::vector<RuleMatch> matching_rules(const Term& atom) const {
    FreshCounter fresh;
    return matching_rules(atom, fresh);
  }

  // Every assumable template unifying with `atom`. Throws
  // Error(non-ground-assumption) when an instance is not ground.
  std::vector<AssumableMatch> assumable_matches(const Term& atom) const {
    std::vector<AssumableMatch> out;
    if (atom.is_false() || atom.is_variable()) return out;
    auto it = _by_predicate.find(predicate_of(atom));
    if (it == _by_predicate.end()) return out;
    FreshCounter fresh;
    for (std::size_t i : it->second) {
      const auto& decl = _assumables[i];
      Term tmpl = rename_apart({decl.atom}, fresh).front();
      auto mgu = unify(atom, tmpl);
      if (!mgu) continue;
      Term inst = mgu->apply(atom);
      if (!is_ground(inst)) {
        throw Error(errc::non_ground_assumption,
                    "assumption " + to_string(inst) + " is not ground (template " +
                        to_string(decl.atom) + ")");
      }
      // Keep only bindings of the query's own variables.
      Substitution own;
      std::vector<std::string> vars;
      collect_variables(atom, vars);
      for (const auto& v : vars) {
        if (const Term* b = mgu->lookup(v)) own.bind(v, *b);
      }
      out.push_back({std::move(inst), decl.prior, std::move(own), i});
    }
    return out;
  }

  // The unique assumable instance for `atom`, if any. An open atom that
  // unifies with several templates does not determine an instance and is
  // reported as non-ground.
  std::optional<std::pair<Term, double>> assumable_match(const Term& atom) const {
    auto ms = assumable_matches(atom);
    if (ms.empty()) return std::nullopt;
    if (ms.size() > 1) {
      throw Error(errc::non_ground_assumption,
                  "open atom " + to_string(atom) + " matches several assumables");
    }
    return std::make_pair(std::move(ms.front().instance), ms.front().prior);
  }

  // Declared prior of a ground hypothesis, if it is one.
  std::optional<double> prior_of(const Term& ground_atom) const {
    if (!is_ground(ground_atom)) return std::nullopt;
    auto ms = assumable_matches(ground_atom);
    if (ms.empty()) return std::nullopt;
    return ms.front().prior;
  }

  // The predicates with at least one assumable template.
  std::set<Predicate> assumable_predicates() const {
    std::set<Predicate> out;
    for (const auto& [p, _] : _by_predicate) out.insert(p);
    return out;
  }

 private:
  friend Result<KnowledgeBase> build_kb(const Program& program);

  std::map<Predicate, std::vector<Clause>> _rules;
  std::vector<Clause> _constraints;
  std::vector<AssumableDecl> _assumables;
  std::map<Predicate, std::vector<std::size_t>> _by_predicate;
  bool _cyclic {false};
};

namespace detail {

inline std::string clause_key(const Clause& c) {
  std::vector<Term> ts {c.head};
  ts.insert(ts.end(), c.body.begin(), c.body.end());
  return canonical_form(ts);
}

inline bool predicate_graph_cyclic(const std::map<Predicate, std::vector<Clause>>& rules) {
  std::map<Predicate, std::set<Predicate>> edges;
  for (const auto& [p, cs] : rules) {
    for (const auto& c : cs) {
      for (const auto& b : c.body) edges[p].insert(predicate_of(b));
    }
  }
  enum Mark { none, active, done };
  std::map<Predicate, Mark> mark;
  // Iterative DFS with an explicit stack of (node, next-child iterator).
  for (const auto& [root, _] : edges) {
    if (mark[root] != none) continue;
    std::vector<std::pair<Predicate, std::set<Predicate>::const_iterator>> stack;
    mark[root] = active;
    stack.emplace_back(root, edges[root].cbegin());
    while (!stack.empty()) {
      auto& [node, it] = stack.back();
      if (it == edges[node].cend()) {
        mark[node] = done;
        stack.pop_back();
        continue;
      }
      Predicate next = *it++;
      if (mark[next] == active) return true;
      if (mark[next] == none) {
        mark[next] = active;
        stack.emplace_back(next, edges[next].cbegin());
      }
    }
  }
  return false;
}

}  // namespace detail

// Validates and indexes a parsed program.
inline Result<KnowledgeBase> build_kb(const Program& program) {
  KnowledgeBase kb;
  std::vector<Diagnostic> diags;
  std::set<std::string> seen;

  for (const auto& st : program.statements) {
    if (const auto* decl = std::get_if<AssumableDecl>(&st)) {
      if (!(decl->prior >= 0.0 && decl->prior <= 1.0)) {
        diags.push_back({Severity::error, decl->location, "prior-out-of-range",
                         "prior " + format_probability(decl->prior) + " of " +
                             to_string(decl->atom) + " is outside [0,1]"});
        continue;
      }
      for (std::size_t j : kb._by_predicate[predicate_of(decl->atom)]) {
        const auto& other = kb._assumables[j];
        FreshCounter fresh;
        Term a = rename_apart({decl->atom}, fresh).front();
        Term b = rename_apart({other.atom}, fresh).front();
        if (unify(a, b)) {
          diags.push_back({Severity::error, decl->location, "overlapping-assumables",
                           "assumable " + to_string(decl->atom) + " overlaps " +
                               to_string(other.atom) + " declared at " + other.location.str()});
        }
      }
      kb._by_predicate[predicate_of(decl->atom)].push_back(kb._assumables.size());
      kb._assumables.push_back(*decl);
      continue;
    }
    const auto& clause = std::get<Clause>(st);
    if (!seen.insert(detail::clause_key(clause)).second) {
      diags.push_back({Severity::warning, clause.location, "duplicate-clause",
                       "duplicate clause " + to_string(clause) + " ignored"});
      continue;
    }
    if (clause.is_constraint()) {
      kb._constraints.push_back(clause);
    } else {
      kb._rules[predicate_of(clause.head)].push_back(clause);
    }
  }

  for (const auto& [pred, clauses] : kb._rules) {
    auto it = kb._by_predicate.find(pred);
    if (it == kb._by_predicate.end()) continue;
    for (const auto& c : clauses) {
      for (std::size_t j : it->second) {
        FreshCounter fresh;
        Term h = rename_apart({c.head}, fresh).front();
        Term a = rename_apart({kb._assumables[j].atom}, fresh).front();
        if (unify(h, a)) {
          diags.push_back({Severity::error, c.location, "head-is-assumable",
                           "rule head " + to_string(c.head) + " unifies with assumable " +
                               to_string(kb._assumables[j].atom)});
        }
      }
    }
  }

  kb._cyclic = detail::predicate_graph_cyclic(kb._rules);
  if (kb._cyclic) {
    diags.push_back({Severity::warning, {}, "cyclic-program",
                     "rule dependency graph is cyclic; search may not terminate without a budget"});
  }

  if (has_errors(diags)) return Result<KnowledgeBase>::failure(std::move(diags));
  return Result<KnowledgeBase>::success(std::move(kb), std::move(diags));
}

// Parses and builds in one go.
inline Result<KnowledgeBase> load_kb(std::string_view text) {
  auto prog = parse_program(text);
  if (!prog) return Result<KnowledgeBase>::failure(prog.diagnostics());
  return build_kb(*prog);
}

}  // namespace pha
