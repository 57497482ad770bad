#pragma once

// Discrete Bayesian networks and their translation into Horn abduction.
//
// File format (JSON):
//
//   { "variables": [
//       { "name": "fire", "values": ["yes", "no"], "parents": [],
//         "cpt": [ { "given": [], "probabilities": [0.01, 0.99] } ] },
//       { "name": "smoke", "values": ["yes", "no"], "parents": ["fire"],
//         "cpt": [ { "given": ["yes"], "probabilities": [0.9, 0.1] },
//                  { "given": ["no"],  "probabilities": [0.01, 0.99] } ] } ] }
//
// Each variable a with parents b1..bm compiles to
//
//   a(V) <- b1(V1), ..., bm(Vm), c_a(V, V1, ..., Vm).
//   assumable( c_a(v, v1, ..., vm), P(a=v | b1=v1, ..., bm=vm) ).
//
// roots compile to assumable( a(v), P(a=v) ), and every pair of values of a
// gets `false <- a(vj), a(vk).`

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pha/diagnostics.hpp"
#include "pha/syntax.hpp"
#include "pha/term.hpp"

namespace pha {

struct CptRow {
  std::vector<std::string> given;       // parent values, in parent order
  std::vector<double> probabilities;    // in value order
};

struct BnVariable {
  std::string name;
  std::vector<std::string> values;
  std::vector<std::string> parents;
  std::vector<CptRow> cpt;
};

class BayesianNetwork {
 public:
  BayesianNetwork() = default;
  explicit BayesianNetwork(std::vector<BnVariable> variables) : _variables(std::move(variables)) {
    reindex();
  }

  const std::vector<BnVariable>& variables() const noexcept { return _variables; }
  std::size_t size() const noexcept { return _variables.size(); }
  const BnVariable& variable(std::size_t i) const { return _variables.at(i); }

  std::optional<std::size_t> index_of(std::string_view name) const {
    auto it = _index.find(std::string(name));
    if (it == _index.end()) return std::nullopt;
    return it->second;
  }

  std::optional<std::size_t> value_index(std::size_t var, std::string_view value) const {
    const auto& vs = _variables.at(var).values;
    auto it = std::find(vs.begin(), vs.end(), value);
    if (it == vs.end()) return std::nullopt;
    return static_cast<std::size_t>(it - vs.begin());
  }

  const std::vector<std::size_t>& parent_indices(std::size_t var) const { return _parents.at(var); }

  // P(var = value | parents as given by `assignment`), where `assignment`
  // holds a value index for every variable. Requires a validated network.
  double conditional(std::size_t var, std::size_t value,
                     const std::vector<std::size_t>& assignment) const {
    std::size_t key = 0;
    for (std::size_t p : _parents[var]) key = key * _variables[p].values.size() + assignment[p];
    return _variables[var].cpt[_row_of[var].at(key)].probabilities[value];
  }

  // Rebuilds the lookup tables from the variable list.
  void reindex() {
    _index.clear();
    _parents.assign(_variables.size(), {});
    _row_of.assign(_variables.size(), {});
    for (std::size_t i = 0; i < _variables.size(); ++i) _index.emplace(_variables[i].name, i);
    for (std::size_t i = 0; i < _variables.size(); ++i) {
      for (const auto& p : _variables[i].parents) {
        auto it = _index.find(p);
        _parents[i].push_back(it == _index.end() ? static_cast<std::size_t>(-1) : it->second);
      }
      for (std::size_t r = 0; r < _variables[i].cpt.size(); ++r) {
        const auto& row = _variables[i].cpt[r];
        if (row.given.size() != _parents[i].size()) continue;
        std::size_t key = 0;
        bool ok = true;
        for (std::size_t k = 0; k < row.given.size() && ok; ++k) {
          std::size_t p = _parents[i][k];
          if (p == static_cast<std::size_t>(-1)) {
            ok = false;
            break;
          }
          const auto& dom = _variables[p].values;
          auto it = std::find(dom.begin(), dom.end(), row.given[k]);
          if (it == dom.end()) {
            ok = false;
            break;
          }
          key = key * dom.size() + static_cast<std::size_t>(it - dom.begin());
        }
        if (ok) _row_of[i].emplace(key, r);
      }
    }
  }

  std::size_t row_for(std::size_t var, std::size_t key) const { return _row_of.at(var).at(key); }
  bool has_row(std::size_t var, std::size_t key) const { return _row_of.at(var).count(key) != 0; }

 private:
  std::vector<BnVariable> _variables;
  std::map<std::string, std::size_t> _index;
  std::vector<std::vector<std::size_t>> _parents;
  std::vector<std::map<std::size_t, std::size_t>> _row_of;  // parent-context key -> row
};

// Validation ------------------------------------------------------------------

namespace detail {

inline std::string var_ptr(std::size_t i) { return "/variables/" + std::to_string(i); }

inline bool reserved_name(std::string_view s) { return s == "false" || s == "assumable"; }

// Kahn's algorithm; returns nullopt on a cycle.
inline std::optional<std::vector<std::size_t>> topological_order(const BayesianNetwork& bn) {
  std::size_t n = bn.size();
  std::vector<std::size_t> indeg(n, 0);
  std::vector<std::vector<std::size_t>> children(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p : bn.parent_indices(i)) {
      if (p >= n) continue;
      ++indeg[i];
      children[p].push_back(i);
    }
  }
  std::vector<std::size_t> order;
  std::vector<std::size_t> ready;
  for (std::size_t i = n; i-- > 0;) {
    if (indeg[i] == 0) ready.push_back(i);
  }
  while (!ready.empty()) {
    std::size_t v = ready.back();
    ready.pop_back();
    order.push_back(v);
    for (std::size_t c : children[v]) {
      if (--indeg[c] == 0) ready.push_back(c);
    }
  }
  if (order.size() != n) return std::nullopt;
  return order;
}

}  // namespace detail

// Checks every structural and numeric invariant of a network.
inline std::vector<Diagnostic> validate(const BayesianNetwork& bn, double row_tolerance = 1e-6) {
  std::vector<Diagnostic> out;
  auto err = [&](std::string ptr, std::string code, std::string msg) {
    out.push_back({Severity::error, {0, 0, std::move(ptr)}, std::move(code), std::move(msg)});
  };

  std::set<std::string> names;
  for (std::size_t i = 0; i < bn.size(); ++i) {
    const auto& v = bn.variable(i);
    std::string at = detail::var_ptr(i);
    if (!is_identifier(v.name) || detail::reserved_name(v.name)) {
      err(at + "/name", "bad-name", "variable name '" + v.name + "' is not a valid identifier");
    }
    if (!names.insert(v.name).second) {
      err(at + "/name", "duplicate-variable", "variable '" + v.name + "' declared twice");
    }
    if (v.values.size() < 2) {
      err(at + "/values", "domain-too-small", "variable '" + v.name + "' needs at least two values");
    }
    std::set<std::string> seen_values;
    for (std::size_t k = 0; k < v.values.size(); ++k) {
      if (!is_identifier(v.values[k])) {
        err(at + "/values/" + std::to_string(k), "bad-name",
            "value '" + v.values[k] + "' of '" + v.name + "' is not a valid identifier");
      }
      if (!seen_values.insert(v.values[k]).second) {
        err(at + "/values/" + std::to_string(k), "duplicate-value",
            "value '" + v.values[k] + "' repeated in '" + v.name + "'");
      }
    }
  }
  if (!out.empty()) return out;

  bool parents_ok = true;
  for (std::size_t i = 0; i < bn.size(); ++i) {
    const auto& v = bn.variable(i);
    std::set<std::string> seen;
    for (std::size_t k = 0; k < v.parents.size(); ++k) {
      std::string at = detail::var_ptr(i) + "/parents/" + std::to_string(k);
      if (!bn.index_of(v.parents[k])) {
        err(at, "unknown-parent", "'" + v.name + "' has unknown parent '" + v.parents[k] + "'");
        parents_ok = false;
      } else if (v.parents[k] == v.name) {
        err(at, "cycle", "'" + v.name + "' is its own parent");
        parents_ok = false;
      }
      if (!seen.insert(v.parents[k]).second) {
        err(at, "duplicate-parent", "parent '" + v.parents[k] + "' repeated in '" + v.name + "'");
        parents_ok = false;
      }
    }
  }
  if (!parents_ok) return out;
  if (!detail::topological_order(bn)) {
    err("/variables", "cycle", "parent graph contains a directed cycle");
    return out;
  }

  for (std::size_t i = 0; i < bn.size(); ++i) {
    const auto& v = bn.variable(i);
    std::string at = detail::var_ptr(i);
    std::size_t contexts = 1;
    for (std::size_t p : bn.parent_indices(i)) contexts *= bn.variable(p).values.size();
    std::set<std::vector<std::string>> seen_rows;
    for (std::size_t r = 0; r < v.cpt.size(); ++r) {
      const auto& row = v.cpt[r];
      std::string rat = at + "/cpt/" + std::to_string(r);
      if (row.given.size() != v.parents.size()) {
        err(rat + "/given", "bad-row", "row of '" + v.name + "' gives " +
                                           std::to_string(row.given.size()) + " parent values, expected " +
                                           std::to_string(v.parents.size()));
        continue;
      }
      bool values_ok = true;
      for (std::size_t k = 0; k < row.given.size(); ++k) {
        std::size_t p = bn.parent_indices(i)[k];
        if (!bn.value_index(p, row.given[k])) {
          err(rat + "/given/" + std::to_string(k), "bad-value",
              "'" + row.given[k] + "' is not a value of '" + bn.variable(p).name + "'");
          values_ok = false;
        }
      }
      if (!values_ok) continue;
      if (!seen_rows.insert(row.given).second) {
        err(rat, "duplicate-row", "duplicate cpt row for '" + v.name + "'");
        continue;
      }
      if (row.probabilities.size() != v.values.size()) {
        err(rat + "/probabilities", "bad-row",
            "row of '" + v.name + "' has " + std::to_string(row.probabilities.size()) +
                " probabilities, expected " + std::to_string(v.values.size()));
        continue;
      }
      double sum = 0.0;
      bool range_ok = true;
      for (std::size_t k = 0; k < row.probabilities.size(); ++k) {
        double p = row.probabilities[k];
        if (!(p >= 0.0 && p <= 1.0)) {
          err(rat + "/probabilities/" + std::to_string(k), "probability-out-of-range",
              "probability " + format_probability(p) + " outside [0,1]");
          range_ok = false;
        }
        sum += p;
      }
      if (range_ok && std::fabs(sum - 1.0) > row_tolerance) {
        err(rat + "/probabilities", "row-sum",
            "row of '" + v.name + "' sums to " + format_probability(sum) + ", not 1");
      }
    }
    if (seen_rows.size() < contexts) {
      // Report the first missing context.
      std::vector<std::size_t> digits(v.parents.size(), 0);
      for (std::size_t c = 0; c < contexts; ++c) {
        std::vector<std::string> given;
        for (std::size_t k = 0; k < digits.size(); ++k) {
          given.push_back(bn.variable(bn.parent_indices(i)[k]).values[digits[k]]);
        }
        if (!seen_rows.count(given)) {
          std::string ctx;
          for (std::size_t k = 0; k < given.size(); ++k) ctx += (k ? "," : "") + given[k];
          err(at + "/cpt", "missing-row", "no cpt row for '" + v.name + "' given (" + ctx + ")");
          break;
        }
        for (std::size_t k = digits.size(); k-- > 0;) {
          if (++digits[k] < bn.variable(bn.parent_indices(i)[k]).values.size()) break;
          digits[k] = 0;
        }
      }
    }
  }
  return out;
}

// Reading and writing ---------------------------------------------------------

namespace detail {

inline SourceLocation offset_to_location(std::string_view text, std::size_t offset) {
  int line = 1;
  int col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col, {}};
}

struct SchemaError {
  std::string pointer;
  std::string message;
};

inline const nlohmann::json& field(const nlohmann::json& obj, const char* key, const std::string& at) {
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError{at, std::string("missing field '") + key + "'"};
  return *it;
}

inline std::vector<std::string> string_list(const nlohmann::json& j, const std::string& at) {
  if (!j.is_array()) throw SchemaError{at, "expected an array of strings"};
  std::vector<std::string> out;
  for (std::size_t k = 0; k < j.size(); ++k) {
    if (!j[k].is_string()) throw SchemaError{at + "/" + std::to_string(k), "expected a string"};
    out.push_back(j[k].get<std::string>());
  }
  return out;
}

}  // namespace detail

inline Result<BayesianNetwork> parse_bn(std::string_view text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    return Result<BayesianNetwork>::failure(
        {{Severity::error, detail::offset_to_location(text, e.byte > 0 ? e.byte - 1 : 0), "syntax", e.what()}});
  }

  std::vector<BnVariable> vars;
  try {
    if (!doc.is_object()) throw detail::SchemaError{"", "expected a JSON object"};
    const auto& jv = detail::field(doc, "variables", "");
    if (!jv.is_array()) throw detail::SchemaError{"/variables", "expected an array"};
    for (std::size_t i = 0; i < jv.size(); ++i) {
      std::string at = detail::var_ptr(i);
      const auto& x = jv[i];
      if (!x.is_object()) throw detail::SchemaError{at, "expected an object"};
      BnVariable v;
      const auto& name = detail::field(x, "name", at);
      if (!name.is_string()) throw detail::SchemaError{at + "/name", "expected a string"};
      v.name = name.get<std::string>();
      v.values = detail::string_list(detail::field(x, "values", at), at + "/values");
      if (x.contains("parents")) v.parents = detail::string_list(x["parents"], at + "/parents");
      const auto& cpt = detail::field(x, "cpt", at);
      if (!cpt.is_array()) throw detail::SchemaError{at + "/cpt", "expected an array"};
      for (std::size_t r = 0; r < cpt.size(); ++r) {
        std::string rat = at + "/cpt/" + std::to_string(r);
        const auto& jr = cpt[r];
        if (!jr.is_object()) throw detail::SchemaError{rat, "expected an object"};
        CptRow row;
        if (jr.contains("given")) row.given = detail::string_list(jr["given"], rat + "/given");
        const auto& ps = detail::field(jr, "probabilities", rat);
        if (!ps.is_array()) throw detail::SchemaError{rat + "/probabilities", "expected an array"};
        for (std::size_t k = 0; k < ps.size(); ++k) {
          if (!ps[k].is_number()) {
            throw detail::SchemaError{rat + "/probabilities/" + std::to_string(k), "expected a number"};
          }
          row.probabilities.push_back(ps[k].get<double>());
        }
        v.cpt.push_back(std::move(row));
      }
      vars.push_back(std::move(v));
    }
  } catch (const detail::SchemaError& e) {
    return Result<BayesianNetwork>::failure({{Severity::error, {0, 0, e.pointer.empty() ? "/" : e.pointer},
                                              "schema", e.message}});
  }

  BayesianNetwork bn(std::move(vars));
  auto diags = validate(bn);
  if (has_errors(diags)) return Result<BayesianNetwork>::failure(std::move(diags));
  return Result<BayesianNetwork>::success(std::move(bn), std::move(diags));
}

inline nlohmann::json to_json(const BayesianNetwork& bn) {
  nlohmann::json vars = nlohmann::json::array();
  for (const auto& v : bn.variables()) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : v.cpt) rows.push_back({{"given", r.given}, {"probabilities", r.probabilities}});
    vars.push_back({{"name", v.name}, {"values", v.values}, {"parents", v.parents}, {"cpt", rows}});
  }
  return {{"variables", vars}};
}

// Structure queries -----------------------------------------------------------

// Length of the longest directed path into `name`; 0 for roots.
inline std::size_t depth(const BayesianNetwork& bn, std::string_view name) {
  auto idx = bn.index_of(name);
  if (!idx) throw Error(errc::unknown_variable, "unknown variable '" + std::string(name) + "'");
  std::vector<std::optional<std::size_t>> memo(bn.size());
  auto rec = [&](auto&& self, std::size_t i) -> std::size_t {
    if (memo[i]) return *memo[i];
    std::size_t d = 0;
    for (std::size_t p : bn.parent_indices(i)) d = std::max(d, 1 + self(self, p));
    memo[i] = d;
    return d;
  };
  return rec(rec, *idx);
}

// Variables that are nobody's parent, in declaration order.
inline std::vector<std::string> terminals(const BayesianNetwork& bn) {
  std::vector<bool> has_child(bn.size(), false);
  for (std::size_t i = 0; i < bn.size(); ++i) {
    for (std::size_t p : bn.parent_indices(i)) has_child[p] = true;
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < bn.size(); ++i) {
    if (!has_child[i]) out.push_back(bn.variable(i).name);
  }
  return out;
}

// Compilation -----------------------------------------------------------------

struct CompileOptions {
  // Emit each exclusivity constraint in both orders.
  bool paper_exact {false};
  // Also emit pairwise constraints between c_a hypotheses of one parent context.
  bool c_constraints {false};
};

struct Provenance {
  enum class Kind { root_prior, bridge_rule, cpt_entry, exclusivity, c_exclusivity };

  Kind kind {Kind::root_prior};
  std::string variable;
  std::size_t row {0};    // cpt row, where applicable
  std::size_t value {0};  // value index, where applicable
};

struct CompiledProgram {
  Program program;
  std::vector<Provenance> provenance;  // parallel to program.statements
};

inline std::string c_predicate(std::string_view variable) { return "c_" + std::string(variable); }

namespace detail {

// Logic variable for a network variable: its first two letters, capitalised.
inline std::string logic_var_name(const std::string& name, std::set<std::string>& used) {
  std::string base;
  if (std::isdigit(static_cast<unsigned char>(name[0]))) base = "V";
  base += static_cast<char>(std::toupper(static_cast<unsigned char>(name[0])));
  if (name.size() > 1 && name[1] != '_') base += name[1];
  std::string candidate = base;
  for (int k = 2; !used.insert(candidate).second; ++k) candidate = base + std::to_string(k);
  return candidate;
}

inline Term value_atom(const std::string& variable, const std::string& value) {
  return Term::compound(variable, {Term::constant(value)});
}

}  // namespace detail

inline CompiledProgram compile(const BayesianNetwork& bn, CompileOptions options = {}) {
  CompiledProgram out;
  auto emit = [&](Statement s, Provenance p) {
    out.program.statements.push_back(std::move(s));
    out.provenance.push_back(std::move(p));
  };
  auto exclusivity = [&](const BnVariable& v) {
    for (std::size_t j = 0; j < v.values.size(); ++j) {
      for (std::size_t k = 0; k < v.values.size(); ++k) {
        if (j == k || (!options.paper_exact && k < j)) continue;
        Clause c {Term::falsum(),
                  {detail::value_atom(v.name, v.values[j]), detail::value_atom(v.name, v.values[k])},
                  {}};
        emit(c, {Provenance::Kind::exclusivity, v.name, 0, j});
      }
    }
  };

  for (std::size_t i = 0; i < bn.size(); ++i) {
    const auto& v = bn.variable(i);
    if (v.parents.empty()) {
      const auto& row = v.cpt.front();
      for (std::size_t k = 0; k < v.values.size(); ++k) {
        emit(AssumableDecl{detail::value_atom(v.name, v.values[k]), row.probabilities[k], {}},
             {Provenance::Kind::root_prior, v.name, 0, k});
      }
      exclusivity(v);
      continue;
    }

    std::set<std::string> used;
    Term self = Term::variable(detail::logic_var_name(v.name, used));
    std::vector<Term> body;
    std::vector<Term> c_args {self};
    for (const auto& p : v.parents) {
      Term pv = Term::variable(detail::logic_var_name(p, used));
      body.push_back(Term::compound(p, {pv}));
      c_args.push_back(pv);
    }
    body.push_back(Term::compound(c_predicate(v.name), c_args));
    emit(Clause{Term::compound(v.name, {self}), std::move(body), {}},
         {Provenance::Kind::bridge_rule, v.name, 0, 0});
    exclusivity(v);

    auto c_atom = [&](std::size_t value, const CptRow& row) {
      std::vector<Term> args {Term::constant(v.values[value])};
      for (const auto& g : row.given) args.push_back(Term::constant(g));
      return Term::compound(c_predicate(v.name), std::move(args));
    };
    for (std::size_t r = 0; r < v.cpt.size(); ++r) {
      for (std::size_t k = 0; k < v.values.size(); ++k) {
        emit(AssumableDecl{c_atom(k, v.cpt[r]), v.cpt[r].probabilities[k], {}},
             {Provenance::Kind::cpt_entry, v.name, r, k});
      }
    }
    if (options.c_constraints) {
      for (std::size_t r = 0; r < v.cpt.size(); ++r) {
        for (std::size_t j = 0; j < v.values.size(); ++j) {
          for (std::size_t k = j + 1; k < v.values.size(); ++k) {
            emit(Clause{Term::falsum(), {c_atom(j, v.cpt[r]), c_atom(k, v.cpt[r])}, {}},
                 {Provenance::Kind::c_exclusivity, v.name, r, j});
          }
        }
      }
    }
  }
  return out;
}

// Sidecar describing value domains, so the compiled program can be queried per
// variable without the original network.
inline nlohmann::json domains_json(const BayesianNetwork& bn) {
  nlohmann::json vars = nlohmann::json::array();
  for (const auto& v : bn.variables()) {
    vars.push_back({{"name", v.name}, {"values", v.values}, {"parents", v.parents}});
  }
  return {{"variables", vars}};
}

}  // namespace pha
