#pragma once

#include <algorithm>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "pha/diagnostics.hpp"
#include "pha/engine.hpp"
#include "pha/kb.hpp"
#include "pha/numeric.hpp"

namespace pha {

// M(alpha) with its anytime bracket.
struct MassResult {
  std::vector<Term> query;
  double lower {0.0};
  double upper {1.0};
  std::vector<Explanation> explanations;
  bool exact {false};
  SearchResult search;
};

struct PosteriorResult {
  Term value;
  std::vector<Term> observation;
  double lower {0.0};
  double upper {1.0};
  MassResult numerator;
  MassResult denominator;

  bool exact() const { return numerator.exact && denominator.exact; }
};

struct ValuePosterior {
  std::string value;
  double lower {0.0};
  double upper {1.0};
  bool exact {false};
};

// Product of the declared priors of a set of ground hypotheses.
inline double explanation_prior(const KnowledgeBase& kb, const std::vector<Term>& hypotheses) {
  double p = 1.0;
  for (const auto& h : hypotheses) {
    auto prior = kb.prior_of(h);
    if (!prior) throw Error(errc::unknown_hypothesis, to_string(h) + " is not an assumable");
    p *= *prior;
  }
  return p;
}

inline MassResult mass(const KnowledgeBase& kb, const std::vector<Term>& alpha,
                       const StopCriteria& stop = {}, EngineOptions options = {}) {
  Search search(kb, alpha, options);
  MassResult r;
  r.query = alpha;
  r.search = search.run(stop);
  r.explanations = r.search.explanations;
  std::vector<double> priors;
  priors.reserve(r.explanations.size());
  for (const auto& e : r.explanations) priors.push_back(e.prior);
  r.lower = compensated_sum(priors);
  r.exact = r.search.exact();
  r.upper = r.exact ? r.lower : std::min(1.0, r.lower + r.search.queued_mass);
  return r;
}

namespace detail {

inline std::pair<double, double> divide_masses(const MassResult& num, const MassResult& den,
                                               const std::string& what) {
  if (den.upper <= 0.0 || (den.exact && den.lower <= 0.0)) {
    throw Error(errc::undefined_posterior,
                "posterior of " + what + " is undefined: observation has zero mass");
  }
  if (num.exact && den.exact) {
    double p = std::clamp(num.lower / den.lower, 0.0, 1.0);
    return {p, p};
  }
  double lo = std::clamp(num.lower / den.upper, 0.0, 1.0);
  double hi = den.lower > 0.0 ? std::min(1.0, num.upper / den.lower) : 1.0;
  return {lo, std::max(lo, hi)};
}

inline std::vector<Term> conjoin(const std::vector<Term>& obs, const Term& extra) {
  std::vector<Term> out = obs;
  out.push_back(extra);
  return out;
}

}  // namespace detail

// P(value | obs) = M(obs & value) / M(obs).
inline PosteriorResult posterior(const KnowledgeBase& kb, const Term& value,
                                 const std::vector<Term>& obs, const StopCriteria& stop = {},
                                 EngineOptions options = {}) {
  if (!is_ground(value)) {
    throw Error(errc::non_ground_query, "posterior target " + to_string(value) + " is not ground");
  }
  PosteriorResult r;
  r.value = value;
  r.observation = obs;
  r.denominator = mass(kb, obs, stop, options);
  r.numerator = mass(kb, detail::conjoin(obs, value), stop, options);
  std::tie(r.lower, r.upper) = detail::divide_masses(r.numerator, r.denominator, to_string(value));
  return r;
}

// Posterior interval for each value of `variable`, computing M(obs) once.
inline std::vector<ValuePosterior> distribution(const KnowledgeBase& kb, const std::string& variable,
                                                const std::vector<std::string>& values,
                                                const std::vector<Term>& obs,
                                                const StopCriteria& stop = {},
                                                EngineOptions options = {}) {
  MassResult den = mass(kb, obs, stop, options);
  std::vector<ValuePosterior> out;
  out.reserve(values.size());
  for (const auto& v : values) {
    Term atom = Term::compound(variable, {Term::constant(v)});
    MassResult num = mass(kb, detail::conjoin(obs, atom), stop, options);
    auto [lo, hi] = detail::divide_masses(num, den, to_string(atom));
    out.push_back({v, lo, hi, num.exact && den.exact});
  }
  return out;
}

}  // namespace pha
