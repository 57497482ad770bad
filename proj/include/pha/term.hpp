#pragma once

#include <cstddef>
#include <cstdint>
#include <algorithm>
#include <compare>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pha {

// Term ------------------------------------------------------------------------
//
// Immutable logic term: a variable, a constant, or a compound f(t1,...,tn).
// Atoms are constants or compounds; the nullary atom `false` is reserved.

class Term {
 public:
  enum class Kind : std::uint8_t { variable, constant, compound };

  Term() = default;

  static Term variable(std::string name) { return Term(Kind::variable, std::move(name), {}); }
  static Term constant(std::string name) { return Term(Kind::constant, std::move(name), {}); }
  static Term compound(std::string functor, std::vector<Term> args) {
    if (args.empty()) {
      return constant(std::move(functor));
    }
    return Term(Kind::compound, std::move(functor), std::move(args));
  }
  static Term falsum() { return constant("false"); }

  Kind kind() const noexcept { return _kind; }
  bool is_variable() const noexcept { return _kind == Kind::variable; }
  bool is_constant() const noexcept { return _kind == Kind::constant; }
  bool is_compound() const noexcept { return _kind == Kind::compound; }
  bool is_false() const noexcept { return _kind == Kind::constant && _name == "false"; }

  // Variable name, constant name, or functor.
  const std::string& name() const noexcept { return _name; }
  const std::vector<Term>& args() const noexcept { return _args; }
  std::size_t arity() const noexcept { return _args.size(); }

  friend bool operator==(const Term&, const Term&) = default;
  friend auto operator<=>(const Term& a, const Term& b) {
    if (auto c = a._kind <=> b._kind; c != 0) return c;
    if (auto c = a._name.compare(b._name); c != 0) return c <=> 0;
    return std::lexicographical_compare_three_way(a._args.begin(), a._args.end(),
                                                  b._args.begin(), b._args.end());
  }

 private:
  Term(Kind k, std::string n, std::vector<Term> a)
      : _kind(k), _name(std::move(n)), _args(std::move(a)) {}

  Kind _kind {Kind::constant};
  std::string _name;
  std::vector<Term> _args;
};

// Predicate key used to index rules: name/arity.
struct Predicate {
  std::string name;
  std::size_t arity {0};

  friend auto operator<=>(const Predicate&, const Predicate&) = default;
};

inline Predicate predicate_of(const Term& atom) { return {atom.name(), atom.arity()}; }

// Identifier lexicon ----------------------------------------------------------

inline bool is_lower_start(char c) { return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9'); }
inline bool is_upper_start(char c) { return (c >= 'A' && c <= 'Z') || c == '_'; }
inline bool is_ident_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

inline bool is_identifier(std::string_view s) {
  if (s.empty() || !is_lower_start(s.front())) return false;
  for (char c : s) {
    if (!is_ident_char(c)) return false;
  }
  return true;
}

inline bool is_variable_name(std::string_view s) {
  if (s.empty() || !is_upper_start(s.front())) return false;
  for (char c : s) {
    if (!is_ident_char(c)) return false;
  }
  return true;
}

// Printing --------------------------------------------------------------------

inline void write_term(std::ostream& os, const Term& t) {
  os << t.name();
  if (t.is_compound()) {
    os << '(';
    for (std::size_t i = 0; i < t.args().size(); ++i) {
      if (i) os << ',';
      write_term(os, t.args()[i]);
    }
    os << ')';
  }
}

inline void append_term(std::string& out, const Term& t) {
  out += t.name();
  if (t.is_compound()) {
    out += '(';
    for (std::size_t i = 0; i < t.args().size(); ++i) {
      if (i) out += ',';
      append_term(out, t.args()[i]);
    }
    out += ')';
  }
}

inline std::string to_string(const Term& t) {
  std::string out;
  append_term(out, t);
  return out;
}

inline std::ostream& operator<<(std::ostream& os, const Term& t) {
  write_term(os, t);
  return os;
}

// Queries ---------------------------------------------------------------------

inline bool is_ground(const Term& t) {
  if (t.is_variable()) return false;
  for (const auto& a : t.args()) {
    if (!is_ground(a)) return false;
  }
  return true;
}

inline bool occurs_in(const std::string& var, const Term& t) {
  if (t.is_variable()) return t.name() == var;
  for (const auto& a : t.args()) {
    if (occurs_in(var, a)) return true;
  }
  return false;
}

inline void collect_variables(const Term& t, std::vector<std::string>& out) {
  if (t.is_variable()) {
    for (const auto& v : out) {
      if (v == t.name()) return;
    }
    out.push_back(t.name());
    return;
  }
  for (const auto& a : t.args()) collect_variables(a, out);
}

// Substitution ----------------------------------------------------------------
//
// Bindings are kept fully resolved: no bound variable occurs in any binding's
// right-hand side, so a single application is idempotent.

class Substitution {
 public:
  Substitution() = default;

  bool empty() const noexcept { return _bindings.empty(); }
  std::size_t size() const noexcept { return _bindings.size(); }
  const std::map<std::string, Term>& bindings() const noexcept { return _bindings; }

  const Term* lookup(const std::string& var) const {
    auto it = _bindings.find(var);
    return it == _bindings.end() ? nullptr : &it->second;
  }

  Term apply(const Term& t) const {
    if (_bindings.empty()) return t;
    if (t.is_variable()) {
      const Term* b = lookup(t.name());
      return b ? *b : t;
    }
    if (!t.is_compound()) return t;
    std::vector<Term> args;
    args.reserve(t.arity());
    for (const auto& a : t.args()) args.push_back(apply(a));
    return Term::compound(t.name(), std::move(args));
  }

  std::vector<Term> apply(const std::vector<Term>& ts) const {
    std::vector<Term> out;
    out.reserve(ts.size());
    for (const auto& t : ts) out.push_back(apply(t));
    return out;
  }

  // Adds var -> value, keeping the set resolved. Fails on an occurs-check
  // violation. `value` must already be resolved against this substitution.
  bool bind(const std::string& var, const Term& value) {
    if (value.is_variable() && value.name() == var) return true;
    if (occurs_in(var, value)) return false;
    Substitution single;
    single._bindings.emplace(var, value);
    for (auto& [name, rhs] : _bindings) rhs = single.apply(rhs);
    _bindings.emplace(var, value);
    return true;
  }

  // Equivalent to applying this substitution and then `after`.
  Substitution compose(const Substitution& after) const {
    Substitution out;
    for (const auto& [name, rhs] : _bindings) {
      Term r = after.apply(rhs);
      if (!(r.is_variable() && r.name() == name)) out._bindings.emplace(name, std::move(r));
    }
    for (const auto& [name, rhs] : after._bindings) {
      out._bindings.emplace(name, rhs);
    }
    return out;
  }

  friend bool operator==(const Substitution&, const Substitution&) = default;

 private:
  std::map<std::string, Term> _bindings;
};

inline Term apply(const Substitution& s, const Term& t) { return s.apply(t); }

// Unification -----------------------------------------------------------------

namespace detail {

inline bool unify_into(const Term& a0, const Term& b0, Substitution& s) {
  Term a = s.apply(a0);
  Term b = s.apply(b0);
  if (a.is_variable()) {
    return s.bind(a.name(), b);
  }
  if (b.is_variable()) {
    return s.bind(b.name(), a);
  }
  if (a.kind() != b.kind() || a.name() != b.name() || a.arity() != b.arity()) {
    return false;
  }
  for (std::size_t i = 0; i < a.arity(); ++i) {
    if (!unify_into(a.args()[i], b.args()[i], s)) return false;
  }
  return true;
}

}  // namespace detail

// Most general unifier with occurs check; nullopt when none exists.
inline std::optional<Substitution> unify(const Term& a, const Term& b) {
  Substitution s;
  if (!detail::unify_into(a, b, s)) return std::nullopt;
  return s;
}

// Unifies a and b under an existing substitution.
inline std::optional<Substitution> unify(const Term& a, const Term& b, Substitution s) {
  if (!detail::unify_into(a, b, s)) return std::nullopt;
  return s;
}

// Renaming --------------------------------------------------------------------

// Source of fresh variable names. Confined to a single search instance.
class FreshCounter {
 public:
  explicit FreshCounter(std::uint64_t start = 0) : _next(start) {}

  // '#' keeps generated names disjoint from anything the parser accepts.
  std::string next() { return "_#" + std::to_string(++_next); }
  std::uint64_t value() const noexcept { return _next; }

 private:
  std::uint64_t _next;
};

// Consistently replaces every variable across `terms` with a fresh one.
inline std::vector<Term> rename_apart(const std::vector<Term>& terms, FreshCounter& fresh) {
  std::vector<std::string> vars;
  for (const auto& t : terms) collect_variables(t, vars);
  if (vars.empty()) return terms;
  Substitution s;
  for (const auto& v : vars) s.bind(v, Term::variable(fresh.next()));
  return s.apply(terms);
}

// Canonical text of `terms` with variables numbered by first occurrence; equal
// strings mean equal up to variable renaming.
inline std::string canonical_form(const std::vector<Term>& terms) {
  std::vector<std::string> vars;
  for (const auto& t : terms) collect_variables(t, vars);
  Substitution s;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    s.bind(vars[i], Term::variable("#" + std::to_string(i)));
  }
  std::string out;
  for (const auto& t : s.apply(terms)) {
    out += to_string(t);
    out += ';';
  }
  return out;
}

}  // namespace pha
