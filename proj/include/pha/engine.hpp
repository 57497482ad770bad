#pragma once

// Best-first abduction.
//
// The queue holds partial explanations <g <- C, D>: a goal tag, the remaining
// conjunction C and the hypotheses D assumed so far. It is seeded with the
// query and with `false`, so explanations of the query and nogoods (hypothesis
// sets that derive false) are found by the same search. The entry with the
// largest P(D) is expanded first; on equal priors, false-goal entries win,
// then older entries.
//
// At any point P_D <= P(query) <= P_D + P_Q, where P_D sums the priors of the
// explanations found and P_Q sums the priors of the queued query entries.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pha/diagnostics.hpp"
#include "pha/kb.hpp"
#include "pha/numeric.hpp"
#include "pha/term.hpp"

namespace pha {

enum class GoalKind : std::uint8_t { user, falsum };

using HypothesisId = std::uint32_t;

// Sorted, duplicate-free.
using HypothesisSet = std::vector<HypothesisId>;

inline bool is_subset(const HypothesisSet& small, const HypothesisSet& big) {
  return small.size() <= big.size() &&
         std::includes(big.begin(), big.end(), small.begin(), small.end());
}

struct PartialExplanation {
  GoalKind goal {GoalKind::user};
  std::vector<Term> remaining;
  HypothesisSet hypotheses;
  double prior {1.0};
  double log_prior {0.0};
  std::uint64_t seq {0};
};

struct Explanation {
  std::vector<Term> hypotheses;  // sorted
  double prior {1.0};
};

struct Nogood {
  std::vector<Term> hypotheses;  // sorted
  double prior {1.0};
};

struct StopCriteria {
  std::optional<std::uint64_t> max_expansions;
  std::optional<std::size_t> max_explanations;
  // Stop once P_Q <= epsilon * max(P_D, floor).
  std::optional<double> epsilon;
  double floor {0.0};

  static StopCriteria exhaust() { return {}; }
};

enum class Termination { exhausted, max_expansions, max_explanations, mass_gap };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::exhausted: return "exhausted";
    case Termination::max_expansions: return "max-expansions";
    case Termination::max_explanations: return "max-explanations";
    case Termination::mass_gap: return "mass-gap";
  }
  return "?";
}

struct EngineOptions {
  // Keep partial explanations whose prior has dropped to zero.
  bool keep_zero {false};
  // Relative tolerance under which two priors count as tied.
  double tie_tolerance {1e-12};
};

struct Bounds {
  double lower {0.0};
  double upper {1.0};
};

struct StepOutcome {
  enum class Kind { expanded, explanation, nogood, discarded, exhausted };

  Kind kind {Kind::exhausted};
  GoalKind goal {GoalKind::user};
  double prior {0.0};
  std::size_t children {0};
  // Explanations withdrawn because this step made them non-minimal or
  // inconsistent.
  std::size_t retracted {0};
};

struct SearchResult {
  std::vector<Term> query;
  std::vector<Explanation> explanations;  // emission order
  std::vector<Nogood> nogoods;
  Bounds bounds;
  double queued_mass {0.0};  // P_Q at termination
  Termination termination {Termination::exhausted};
  std::uint64_t expansions {0};
  std::size_t duplicates {0};
  std::size_t non_minimal {0};
  std::size_t retractions {0};

  bool exact() const { return termination == Termination::exhausted; }
  // Duplicate or nested explanations mean the rules are not disjoint, so the
  // summed mass may overcount.
  bool mass_possibly_unsound() const { return duplicates > 0 || non_minimal > 0 || retractions > 0; }
};

class Search {
 public:
  using Observer = std::function<void(const Search&, const StepOutcome&)>;

  // Seeds the queue with <query <- query, {}> and <false <- false, {}>.
  Search(const KnowledgeBase& kb, std::vector<Term> query, EngineOptions options = {})
      : _kb(&kb), _query(std::move(query)), _options(options) {
    for (const auto& a : _query) {
      if (!is_ground(a)) {
        throw Error(errc::non_ground_query, "query atom " + to_string(a) + " is not ground");
      }
    }
    push({GoalKind::user, _query, {}, 1.0, 0.0, 0});
    push({GoalKind::falsum, {Term::falsum()}, {}, 1.0, 0.0, 0});
  }

  const std::vector<Term>& query() const noexcept { return _query; }
  const std::vector<PartialExplanation>& queue() const noexcept { return _queue; }
  std::uint64_t expansions() const noexcept { return _expansions; }
  std::size_t duplicates() const noexcept { return _duplicates; }
  std::size_t retractions() const noexcept { return _retractions; }
  bool drained() const noexcept { return _queue.empty(); }

  double mass_found() const noexcept { return _found_mass.value(); }
  double mass_queued() const noexcept { return _user_entries == 0 ? 0.0 : std::max(0.0, _queue_mass.value()); }

  Bounds bounds() const {
    double lo = mass_found();
    return {lo, std::min(1.0, lo + mass_queued())};
  }

  std::vector<Explanation> explanations() const {
    std::vector<Explanation> out;
    out.reserve(_found.size());
    for (const auto& f : _found) out.push_back({terms_of(f.ids), f.prior});
    return out;
  }

  std::vector<Nogood> nogoods() const {
    std::vector<Nogood> out;
    out.reserve(_nogoods.size());
    for (const auto& n : _nogoods) out.push_back({terms_of(n.ids), n.prior});
    return out;
  }

  const Term& hypothesis(HypothesisId id) const { return _hypotheses.at(id); }

  std::vector<Term> terms_of(const HypothesisSet& ids) const {
    std::vector<Term> out;
    out.reserve(ids.size());
    for (auto id : ids) out.push_back(_hypotheses[id]);
    std::sort(out.begin(), out.end());
    return out;
  }

  StepOutcome step() {
    StepOutcome outcome;
    if (_queue.empty()) return outcome;

    PartialExplanation entry = pop_best();
    ++_expansions;
    outcome.goal = entry.goal;
    outcome.prior = entry.prior;

    if (entry.remaining.empty()) {
      if (entry.goal == GoalKind::falsum) {
        record_nogood(entry, outcome);
      } else {
        record_explanation(entry, outcome);
      }
      return outcome;
    }

    outcome.kind = StepOutcome::Kind::expanded;
    const Term& selected = entry.remaining.front();
    std::vector<Term> rest(entry.remaining.begin() + 1, entry.remaining.end());

    for (auto& m : _kb->matching_rules(selected, _fresh)) {
      std::vector<Term> next = std::move(m.clause.body);
      next.insert(next.end(), rest.begin(), rest.end());
      push({entry.goal, m.unifier.apply(next), entry.hypotheses, entry.prior, entry.log_prior, 0});
      ++outcome.children;
    }

    for (auto& m : _kb->assumable_matches(selected)) {
      HypothesisId id = intern(m.instance);
      std::vector<Term> next = m.unifier.apply(rest);
      if (std::binary_search(entry.hypotheses.begin(), entry.hypotheses.end(), id)) {
        push({entry.goal, std::move(next), entry.hypotheses, entry.prior, entry.log_prior, 0});
        ++outcome.children;
        continue;
      }
      if (m.prior == 0.0 && !_options.keep_zero) continue;
      HypothesisSet extended = entry.hypotheses;
      extended.insert(std::lower_bound(extended.begin(), extended.end(), id), id);
      if (contains_nogood(extended)) continue;
      double log_p = m.prior > 0.0 ? std::log(m.prior) : -std::numeric_limits<double>::infinity();
      push({entry.goal, std::move(next), std::move(extended), entry.prior * m.prior,
            entry.log_prior + log_p, 0});
      ++outcome.children;
    }
    return outcome;
  }

  SearchResult run(const StopCriteria& stop = {}, const Observer& observer = {}) {
    Termination why = Termination::exhausted;
    while (true) {
      if (_queue.empty()) {
        why = Termination::exhausted;
        break;
      }
      if (stop.max_expansions && _expansions >= *stop.max_expansions) {
        why = Termination::max_expansions;
        break;
      }
      if (stop.max_explanations && _found.size() >= *stop.max_explanations) {
        why = Termination::max_explanations;
        break;
      }
      if (stop.epsilon && mass_queued() <= *stop.epsilon * std::max(mass_found(), stop.floor)) {
        why = Termination::mass_gap;
        break;
      }
      StepOutcome o = step();
      if (observer) observer(*this, o);
    }
    return result(why);
  }

  SearchResult result(Termination why) const {
    SearchResult r;
    r.query = _query;
    r.explanations = explanations();
    r.nogoods = nogoods();
    r.bounds = bounds();
    r.queued_mass = mass_queued();
    r.termination = why;
    r.expansions = _expansions;
    r.duplicates = _duplicates;
    r.non_minimal = _non_minimal;
    r.retractions = _retractions;
    return r;
  }

 private:
  struct Recorded {
    HypothesisSet ids;
    double prior {1.0};
  };

  // Max-heap order: larger log prior, then false-goal, then lower seq.
  static bool heap_less(const PartialExplanation& a, const PartialExplanation& b) {
    if (a.log_prior != b.log_prior) return a.log_prior < b.log_prior;
    if (a.goal != b.goal) return a.goal == GoalKind::user;
    return a.seq > b.seq;
  }

  static bool preferred(const PartialExplanation& a, const PartialExplanation& b) {
    if (a.goal != b.goal) return a.goal == GoalKind::falsum;
    return a.seq < b.seq;
  }

  void push(PartialExplanation e) {
    e.seq = _next_seq++;
    if (e.goal == GoalKind::user) {
      _queue_mass.add(e.prior);
      ++_user_entries;
    }
    _queue.push_back(std::move(e));
    std::push_heap(_queue.begin(), _queue.end(), heap_less);
  }

  PartialExplanation pop_one() {
    std::pop_heap(_queue.begin(), _queue.end(), heap_less);
    PartialExplanation e = std::move(_queue.back());
    _queue.pop_back();
    return e;
  }

  // Removes the maximum-prior entry, resolving near-ties by preference.
  PartialExplanation pop_best() {
    PartialExplanation best = pop_one();
    std::vector<PartialExplanation> tied;
    double cutoff = best.log_prior - _options.tie_tolerance;
    while (!_queue.empty() && _queue.front().log_prior >= cutoff) {
      PartialExplanation e = pop_one();
      if (preferred(e, best)) std::swap(e, best);
      tied.push_back(std::move(e));
    }
    for (auto& e : tied) {
      _queue.push_back(std::move(e));
      std::push_heap(_queue.begin(), _queue.end(), heap_less);
    }
    if (best.goal == GoalKind::user) {
      _queue_mass.add(-best.prior);
      if (--_user_entries == 0) _queue_mass.reset();
    }
    return best;
  }

  HypothesisId intern(const Term& atom) {
    auto [it, inserted] = _ids.try_emplace(atom, static_cast<HypothesisId>(_hypotheses.size()));
    if (inserted) _hypotheses.push_back(atom);
    return it->second;
  }

  bool contains_nogood(const HypothesisSet& d) const {
    for (const auto& n : _nogoods) {
      if (is_subset(n.ids, d)) return true;
    }
    return false;
  }

  void record_nogood(const PartialExplanation& entry, StepOutcome& outcome) {
    const HypothesisSet& d = entry.hypotheses;
    if (contains_nogood(d)) {
      outcome.kind = StepOutcome::Kind::discarded;
      return;
    }
    outcome.kind = StepOutcome::Kind::nogood;
    std::erase_if(_nogoods, [&](const Recorded& n) { return is_subset(d, n.ids); });
    _nogoods.push_back({d, entry.prior});

    auto before = _queue.size();
    std::erase_if(_queue, [&](const PartialExplanation& e) { return is_subset(d, e.hypotheses); });
    if (_queue.size() != before) {
      std::make_heap(_queue.begin(), _queue.end(), heap_less);
      recompute_queue_mass();
    }

    auto found_before = _found.size();
    std::erase_if(_found, [&](const Recorded& f) { return is_subset(d, f.ids); });
    if (_found.size() != found_before) {
      outcome.retracted = found_before - _found.size();
      _retractions += outcome.retracted;
      recompute_found_mass();
    }
  }

  void record_explanation(const PartialExplanation& entry, StepOutcome& outcome) {
    const HypothesisSet& d = entry.hypotheses;
    outcome.kind = StepOutcome::Kind::discarded;
    if (contains_nogood(d)) return;
    for (const auto& f : _found) {
      if (is_subset(f.ids, d)) {
        if (f.ids.size() == d.size()) {
          ++_duplicates;
        } else {
          ++_non_minimal;
        }
        return;
      }
    }
    auto found_before = _found.size();
    std::erase_if(_found, [&](const Recorded& f) { return is_subset(d, f.ids); });
    outcome.kind = StepOutcome::Kind::explanation;
    _found.push_back({d, entry.prior});
    if (_found.size() != found_before + 1) {
      outcome.retracted = found_before + 1 - _found.size();
      _retractions += outcome.retracted;
      recompute_found_mass();
    } else {
      _found_mass.add(entry.prior);
    }
  }

  void recompute_queue_mass() {
    _queue_mass.reset();
    _user_entries = 0;
    for (const auto& e : _queue) {
      if (e.goal == GoalKind::user) {
        _queue_mass.add(e.prior);
        ++_user_entries;
      }
    }
  }

  void recompute_found_mass() {
    _found_mass.reset();
    for (const auto& f : _found) _found_mass.add(f.prior);
  }

  const KnowledgeBase* _kb;
  std::vector<Term> _query;
  EngineOptions _options;

  std::vector<PartialExplanation> _queue;
  std::vector<Recorded> _found;
  std::vector<Recorded> _nogoods;
  std::map<Term, HypothesisId> _ids;
  std::vector<Term> _hypotheses;

  CompensatedSum _found_mass;
  CompensatedSum _queue_mass;
  std::size_t _user_entries {0};
  std::uint64_t _next_seq {0};
  std::uint64_t _expansions {0};
  std::size_t _duplicates {0};
  std::size_t _non_minimal {0};
  std::size_t _retractions {0};
  FreshCounter _fresh;
};

// One-shot convenience: search `query` until `stop` fires.
inline SearchResult explain(const KnowledgeBase& kb, std::vector<Term> query,
                            const StopCriteria& stop = {}, EngineOptions options = {}) {
  Search s(kb, std::move(query), options);
  return s.run(stop);
}

}  // namespace pha
