#pragma once

// Brute-force reference computations. Exponential by construction; callers
// bound the problem size. Shares nothing with the search engine beyond terms.

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "pha/bn.hpp"
#include "pha/diagnostics.hpp"
#include "pha/kb.hpp"
#include "pha/numeric.hpp"
#include "pha/term.hpp"

namespace pha::oracle {

using Assignment = std::map<std::string, std::string>;

namespace detail {

// Value indices for a (possibly partial) assignment; nullopt entries are free.
inline std::vector<std::optional<std::size_t>> resolve(const BayesianNetwork& bn, const Assignment& a) {
  std::vector<std::optional<std::size_t>> fixed(bn.size());
  for (const auto& [var, value] : a) {
    auto i = bn.index_of(var);
    if (!i) throw Error(errc::unknown_variable, "unknown variable '" + var + "'");
    auto v = bn.value_index(*i, value);
    if (!v) throw Error(errc::unknown_variable, "'" + value + "' is not a value of '" + var + "'");
    fixed[*i] = *v;
  }
  return fixed;
}

inline double joint(const BayesianNetwork& bn, const std::vector<std::size_t>& values) {
  double p = 1.0;
  for (std::size_t i = 0; i < bn.size(); ++i) p *= bn.conditional(i, values[i], values);
  return p;
}

}  // namespace detail

// Product over variables of the cpt entry selected by a total assignment.
inline double joint_probability(const BayesianNetwork& bn, const Assignment& total) {
  auto fixed = detail::resolve(bn, total);
  std::vector<std::size_t> values(bn.size());
  for (std::size_t i = 0; i < bn.size(); ++i) {
    if (!fixed[i]) throw Error(errc::unknown_variable, "assignment misses '" + bn.variable(i).name + "'");
    values[i] = *fixed[i];
  }
  return detail::joint(bn, values);
}

// Calls f(values) for every total assignment extending `partial`.
template <typename F>
void for_each_completion(const BayesianNetwork& bn, const Assignment& partial, F&& f) {
  auto fixed = detail::resolve(bn, partial);
  std::vector<std::size_t> values(bn.size(), 0);
  for (std::size_t i = 0; i < bn.size(); ++i) values[i] = fixed[i].value_or(0);
  while (true) {
    f(static_cast<const std::vector<std::size_t>&>(values));
    std::size_t k = bn.size();
    while (k-- > 0) {
      if (fixed[k]) continue;
      if (++values[k] < bn.variable(k).values.size()) break;
      values[k] = 0;
    }
    if (k == static_cast<std::size_t>(-1)) return;
  }
}

// Sum of the joint over all completions of `partial`.
inline double marginal(const BayesianNetwork& bn, const Assignment& partial) {
  CompensatedSum sum;
  for_each_completion(bn, partial, [&](const std::vector<std::size_t>& v) { sum.add(detail::joint(bn, v)); });
  return sum.value();
}

inline double posterior_exact(const BayesianNetwork& bn, const std::string& variable,
                              const std::string& value, const Assignment& obs) {
  double den = marginal(bn, obs);
  if (den <= 0.0) {
    throw Error(errc::zero_probability_observation, "observation has probability zero");
  }
  Assignment joint = obs;
  auto [it, inserted] = joint.emplace(variable, value);
  if (!inserted && it->second != value) return 0.0;
  return marginal(bn, joint) / den;
}

// Most probable total assignment extending `partial` (first in enumeration
// order on exact ties).
inline std::pair<Assignment, double> most_probable_completion(const BayesianNetwork& bn,
                                                              const Assignment& partial) {
  std::vector<std::size_t> best;
  double best_p = -1.0;
  for_each_completion(bn, partial, [&](const std::vector<std::size_t>& v) {
    double p = detail::joint(bn, v);
    if (p > best_p) {
      best_p = p;
      best = v;
    }
  });
  Assignment a;
  for (std::size_t i = 0; i < bn.size(); ++i) a[bn.variable(i).name] = bn.variable(i).values[best[i]];
  return {a, best_p};
}

// Ground forward chaining -------------------------------------------------------

// The program grounded over its own constants.
class GroundProgram {
 public:
  explicit GroundProgram(const KnowledgeBase& kb, const std::vector<Term>& extra_atoms = {}) {
    _false = intern(Term::falsum());
    std::set<Term> constants;
    auto collect = [&](auto&& self, const Term& t, bool is_arg) -> void {
      if (t.is_constant() && is_arg) constants.insert(t);
      for (const auto& a : t.args()) self(self, a, true);
    };
    for (const auto& [pred, clauses] : kb.rules()) {
      for (const auto& c : clauses) {
        collect(collect, c.head, false);
        for (const auto& b : c.body) collect(collect, b, false);
      }
    }
    for (const auto& c : kb.constraints()) {
      for (const auto& b : c.body) collect(collect, b, false);
    }
    for (const auto& d : kb.assumables()) collect(collect, d.atom, false);
    for (const auto& a : extra_atoms) collect(collect, a, false);
    _constants.assign(constants.begin(), constants.end());

    for (const auto& [pred, clauses] : kb.rules()) {
      for (const auto& c : clauses) add_groundings(c);
    }
    for (const auto& c : kb.constraints()) add_groundings(c);

    for (const auto& d : kb.assumables()) {
      for_each_grounding({d.atom}, [&](const Substitution& s) {
        Term h = s.apply(d.atom);
        int id = intern(h);
        if (!_prior.count(id)) {
          _prior.emplace(id, d.prior);
          _hypotheses.push_back(id);
        }
      });
    }
  }

  int false_id() const noexcept { return _false; }
  const Term& atom(int id) const { return _atoms.at(static_cast<std::size_t>(id)); }
  std::optional<int> find(const Term& t) const {
    auto it = _ids.find(t);
    if (it == _ids.end()) return std::nullopt;
    return it->second;
  }
  const std::vector<int>& hypotheses() const noexcept { return _hypotheses; }
  double prior(int hypothesis) const { return _prior.at(hypothesis); }
  std::size_t rule_count() const noexcept { return _rules.size(); }

  // Least fixpoint of the ground rules over the given hypotheses.
  std::vector<char> closure(const std::vector<int>& assumed) const {
    std::vector<char> derived(_atoms.size(), 0);
    for (int h : assumed) derived[static_cast<std::size_t>(h)] = 1;
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& r : _rules) {
        if (derived[static_cast<std::size_t>(r.head)]) continue;
        bool all = std::all_of(r.body.begin(), r.body.end(),
                               [&](int b) { return derived[static_cast<std::size_t>(b)] != 0; });
        if (all) {
          derived[static_cast<std::size_t>(r.head)] = 1;
          changed = true;
        }
      }
    }
    return derived;
  }

  // Hypotheses from which some goal atom is reachable through ground rules.
  std::vector<int> support_cone(const std::vector<int>& goals) const {
    std::vector<char> seen(_atoms.size(), 0);
    std::vector<int> stack;
    for (int g : goals) {
      if (!seen[static_cast<std::size_t>(g)]) {
        seen[static_cast<std::size_t>(g)] = 1;
        stack.push_back(g);
      }
    }
    std::map<int, std::vector<const GroundRule*>> by_head;
    for (const auto& r : _rules) by_head[r.head].push_back(&r);
    while (!stack.empty()) {
      int a = stack.back();
      stack.pop_back();
      auto it = by_head.find(a);
      if (it == by_head.end()) continue;
      for (const auto* r : it->second) {
        for (int b : r->body) {
          if (!seen[static_cast<std::size_t>(b)]) {
            seen[static_cast<std::size_t>(b)] = 1;
            stack.push_back(b);
          }
        }
      }
    }
    std::vector<int> out;
    for (int h : _hypotheses) {
      if (seen[static_cast<std::size_t>(h)]) out.push_back(h);
    }
    return out;
  }

  int intern(const Term& t) {
    auto [it, inserted] = _ids.try_emplace(t, static_cast<int>(_atoms.size()));
    if (inserted) _atoms.push_back(t);
    return it->second;
  }

 private:
  struct GroundRule {
    int head;
    std::vector<int> body;
  };

  template <typename F>
  void for_each_grounding(const std::vector<Term>& terms, F&& f) {
    std::vector<std::string> vars;
    for (const auto& t : terms) collect_variables(t, vars);
    if (!vars.empty() && _constants.empty()) return;
    std::vector<std::size_t> pick(vars.size(), 0);
    while (true) {
      Substitution s;
      for (std::size_t k = 0; k < vars.size(); ++k) s.bind(vars[k], _constants[pick[k]]);
      f(s);
      std::size_t k = vars.size();
      while (k-- > 0) {
        if (++pick[k] < _constants.size()) break;
        pick[k] = 0;
      }
      if (k == static_cast<std::size_t>(-1)) return;
    }
  }

  void add_groundings(const Clause& c) {
    std::vector<Term> terms {c.head};
    terms.insert(terms.end(), c.body.begin(), c.body.end());
    for_each_grounding(terms, [&](const Substitution& s) {
      GroundRule r;
      r.head = c.head.is_false() ? _false : intern(s.apply(c.head));
      for (const auto& b : c.body) r.body.push_back(intern(s.apply(b)));
      _rules.push_back(std::move(r));
    });
  }

  std::vector<Term> _constants;
  std::map<Term, int> _ids;
  std::vector<Term> _atoms;
  std::vector<GroundRule> _rules;
  std::vector<int> _hypotheses;
  std::map<int, double> _prior;
  int _false {0};
};

// True when F u D derives every goal atom.
inline bool entails(const KnowledgeBase& kb, const std::vector<Term>& hypotheses,
                    const std::vector<Term>& goal) {
  std::vector<Term> extra = hypotheses;
  extra.insert(extra.end(), goal.begin(), goal.end());
  GroundProgram g(kb, extra);
  std::vector<int> ids;
  for (const auto& h : hypotheses) ids.push_back(g.intern(h));
  std::vector<int> goal_ids;
  for (const auto& a : goal) goal_ids.push_back(g.intern(a));
  auto derived = g.closure(ids);
  return std::all_of(goal_ids.begin(), goal_ids.end(),
                     [&](int a) { return derived[static_cast<std::size_t>(a)] != 0; });
}

inline bool consistent(const KnowledgeBase& kb, const std::vector<Term>& hypotheses) {
  GroundProgram g(kb, hypotheses);
  std::vector<int> ids;
  for (const auto& h : hypotheses) ids.push_back(g.intern(h));
  return !g.closure(ids)[static_cast<std::size_t>(g.false_id())];
}

struct Explanation {
  std::vector<Term> hypotheses;  // sorted
  double prior {1.0};
};

struct Enumeration {
  std::vector<Explanation> explanations;  // sorted by descending prior
  bool budget_exceeded {false};
};

// Every minimal consistent D of at most `hypothesis_budget` hypotheses with
// F u D deriving all of `goal`.
inline Enumeration enumerate_explanations(const KnowledgeBase& kb, const std::vector<Term>& goal,
                                          std::size_t hypothesis_budget) {
  GroundProgram g(kb, goal);
  std::vector<int> goal_ids;
  for (const auto& a : goal) {
    if (!is_ground(a)) throw Error(errc::non_ground_query, to_string(a) + " is not ground");
    goal_ids.push_back(g.intern(a));
  }
  std::vector<int> candidates = g.support_cone(goal_ids);

  Enumeration out;
  std::vector<std::vector<int>> found;
  std::vector<int> current;
  auto visit = [&](auto&& self, std::size_t start) -> void {
    auto derived = g.closure(current);
    if (derived[static_cast<std::size_t>(g.false_id())]) return;
    bool explains = std::all_of(goal_ids.begin(), goal_ids.end(),
                                [&](int a) { return derived[static_cast<std::size_t>(a)] != 0; });
    if (explains) {
      found.push_back(current);
      return;
    }
    if (current.size() >= hypothesis_budget) {
      if (start < candidates.size()) out.budget_exceeded = true;
      return;
    }
    for (std::size_t i = start; i < candidates.size(); ++i) {
      current.push_back(candidates[i]);
      self(self, i + 1);
      current.pop_back();
    }
  };
  visit(visit, 0);

  for (auto& f : found) std::sort(f.begin(), f.end());
  for (std::size_t i = 0; i < found.size(); ++i) {
    bool minimal = true;
    for (std::size_t j = 0; j < found.size() && minimal; ++j) {
      if (i != j && found[j].size() < found[i].size() &&
          std::includes(found[i].begin(), found[i].end(), found[j].begin(), found[j].end())) {
        minimal = false;
      }
    }
    if (!minimal) continue;
    Explanation e;
    e.prior = 1.0;
    for (int h : found[i]) {
      e.hypotheses.push_back(g.atom(h));
      e.prior *= g.prior(h);
    }
    std::sort(e.hypotheses.begin(), e.hypotheses.end());
    out.explanations.push_back(std::move(e));
  }
  std::stable_sort(out.explanations.begin(), out.explanations.end(),
                   [](const Explanation& a, const Explanation& b) { return a.prior > b.prior; });
  return out;
}

// Oracle counterpart of a variable/value proposition.
inline Term value_atom(const std::string& variable, const std::string& value) {
  return Term::compound(variable, {Term::constant(value)});
}

inline std::vector<Term> to_conjunction(const Assignment& a) {
  std::vector<Term> out;
  for (const auto& [var, value] : a) out.push_back(value_atom(var, value));
  return out;
}

}  // namespace pha::oracle
