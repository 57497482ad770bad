#pragma once

#include <fstream>
#include <iterator>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "pha/bn.hpp"
#include "pha/kb.hpp"
#include "pha/syntax.hpp"

namespace pha::testing {

inline std::string data_path(const std::string& name) { return std::string(PHA_DATA_DIR) + "/" + name; }
inline std::string test_data_path(const std::string& name) { return std::string(PHA_TEST_DATA_DIR) + "/" + name; }

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline KnowledgeBase must_load(std::string_view text) {
  auto kb = load_kb(text);
  if (!kb) {
    std::string msg = "knowledge base failed to load:";
    for (const auto& d : kb.diagnostics()) msg += "\n  " + d.location.str() + " " + d.message;
    throw std::runtime_error(msg);
  }
  return *kb;
}

inline Program must_parse(std::string_view text) {
  auto p = parse_program(text);
  if (!p) throw std::runtime_error("parse failed: " + p.diagnostics().front().message);
  return *p;
}

inline std::vector<Term> conj(std::string_view text) {
  auto c = parse_conjunction(text);
  if (!c) throw std::runtime_error("bad conjunction: " + std::string(text));
  return *c;
}

inline Term atom(std::string_view text) { return conj(text).front(); }

// The hand-written listing of the smoke-alarm network.
inline const KnowledgeBase& listing_kb() {
  static const KnowledgeBase kb = must_load(slurp(test_data_path("smoke_alarm_listing.pha")));
  return kb;
}

inline const BayesianNetwork& smoke_alarm() {
  static const BayesianNetwork bn = [] {
    auto r = parse_bn(slurp(data_path("smoke_alarm.json")));
    if (!r) throw std::runtime_error("smoke_alarm.json invalid");
    return *r;
  }();
  return bn;
}

inline const KnowledgeBase& smoke_alarm_kb() {
  static const KnowledgeBase kb = must_load(to_string(compile(smoke_alarm()).program));
  return kb;
}

// Random networks: 3-5 variables, 2-3 values, at most 2 parents drawn from
// earlier variables, cpt rows sampled uniformly and normalised.
struct NetworkShape {
  std::size_t min_variables {3};
  std::size_t max_variables {5};
  std::size_t min_values {2};
  std::size_t max_values {3};
  std::size_t max_parents {2};
};

inline BayesianNetwork random_network(std::uint64_t seed, NetworkShape shape = {}) {
  std::mt19937_64 rng(seed);
  auto pick = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  std::uniform_real_distribution<double> weight(0.05, 1.0);

  std::size_t n = pick(shape.min_variables, shape.max_variables);
  std::vector<BnVariable> vars(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& v = vars[i];
    v.name = "x" + std::to_string(i);
    std::size_t k = pick(shape.min_values, shape.max_values);
    for (std::size_t j = 0; j < k; ++j) v.values.push_back("v" + std::to_string(j));
    std::vector<std::size_t> earlier(i);
    for (std::size_t j = 0; j < i; ++j) earlier[j] = j;
    std::shuffle(earlier.begin(), earlier.end(), rng);
    std::size_t m = std::min(i, pick(0, shape.max_parents));
    earlier.resize(m);
    std::sort(earlier.begin(), earlier.end());
    for (std::size_t p : earlier) v.parents.push_back(vars[p].name);

    std::vector<std::size_t> digits(m, 0);
    while (true) {
      CptRow row;
      for (std::size_t q = 0; q < m; ++q) row.given.push_back(vars[earlier[q]].values[digits[q]]);
      double total = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        row.probabilities.push_back(weight(rng));
        total += row.probabilities.back();
      }
      for (auto& p : row.probabilities) p /= total;
      v.cpt.push_back(std::move(row));
      std::size_t q = m;
      while (q-- > 0) {
        if (++digits[q] < vars[earlier[q]].values.size()) break;
        digits[q] = 0;
      }
      if (q == static_cast<std::size_t>(-1)) break;
    }
  }
  return BayesianNetwork(std::move(vars));
}

// Random .pha programs for printer/parser round trips.
inline Program random_program(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto pick = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  const std::vector<std::string> functors {"p", "q", "rel", "f", "g2", "a_b", "0x", "node"};
  const std::vector<std::string> constants {"a", "b", "yes", "no", "c1", "42", "z_z"};
  const std::vector<std::string> variables {"X", "Y", "Z", "_W", "Abc", "V1"};

  auto term = [&](auto&& self, int depth) -> Term {
    std::size_t kind = pick(0, depth > 0 ? 2 : 1);
    if (kind == 0) return Term::variable(variables[pick(0, variables.size() - 1)]);
    if (kind == 1) return Term::constant(constants[pick(0, constants.size() - 1)]);
    std::vector<Term> args;
    for (std::size_t i = 0, n = pick(1, 3); i < n; ++i) args.push_back(self(self, depth - 1));
    return Term::compound(functors[pick(0, functors.size() - 1)], std::move(args));
  };
  auto atom = [&]() {
    std::size_t arity = pick(0, 3);
    std::vector<Term> args;
    for (std::size_t i = 0; i < arity; ++i) args.push_back(term(term, 2));
    return Term::compound(functors[pick(0, functors.size() - 1)], std::move(args));
  };

  Program prog;
  for (std::size_t i = 0, n = pick(1, 12); i < n; ++i) {
    switch (pick(0, 3)) {
      case 0: {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        double p = pick(0, 4) == 0 ? static_cast<double>(pick(0, 1)) : u(rng);
        if (pick(0, 5) == 0) p = std::ldexp(u(rng), -30);
        prog.statements.push_back(AssumableDecl {atom(), p, {}});
        break;
      }
      case 1:
        prog.statements.push_back(Clause {atom(), {}, {}});
        break;
      default: {
        std::vector<Term> body;
        for (std::size_t j = 0, m = pick(1, 4); j < m; ++j) body.push_back(atom());
        Term head = pick(0, 4) == 0 ? Term::falsum() : atom();
        prog.statements.push_back(Clause {std::move(head), std::move(body), {}});
      }
    }
  }
  return prog;
}

}  // namespace pha::testing
