#pragma once

// Reader and printer for the .pha language:
//
//   program    := { statement }
//   statement  := atom "."
//               | atom "<-" atom { "," atom } "."
//               | "assumable" "(" atom "," probability ")" "."
//   atom       := ident [ "(" term { "," term } ")" ]
//   term       := VARIABLE | ident [ "(" term { "," term } ")" ]
//
// `%` starts a comment running to the end of the line.

#include <charconv>
#include <cctype>
#include <cmath>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>
#include <vector>

#include "pha/diagnostics.hpp"
#include "pha/term.hpp"

namespace pha {

struct Clause {
  Term head;
  std::vector<Term> body;
  SourceLocation location;

  bool is_constraint() const { return head.is_false(); }

  friend bool operator==(const Clause& a, const Clause& b) {
    return a.head == b.head && a.body == b.body;
  }
};

struct AssumableDecl {
  Term atom;
  double prior {0.0};
  SourceLocation location;

  friend bool operator==(const AssumableDecl& a, const AssumableDecl& b) {
    return a.atom == b.atom && a.prior == b.prior;
  }
};

using Statement = std::variant<Clause, AssumableDecl>;

struct Program {
  std::vector<Statement> statements;

  friend bool operator==(const Program&, const Program&) = default;
};

// Lexer -----------------------------------------------------------------------

namespace detail {

enum class Tok { ident, variable, number, lparen, rparen, comma, period, arrow, end };

inline const char* describe(Tok t) {
  switch (t) {
    case Tok::ident: return "identifier";
    case Tok::variable: return "variable";
    case Tok::number: return "number";
    case Tok::lparen: return "'('";
    case Tok::rparen: return "')'";
    case Tok::comma: return "','";
    case Tok::period: return "'.'";
    case Tok::arrow: return "'<-'";
    case Tok::end: return "end of input";
  }
  return "?";
}

struct Token {
  Tok kind {Tok::end};
  std::string text;
  SourceLocation where;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : _src(src) {}

  // Returns false and fills `diag` on a lexical error.
  bool next(Token& out, Diagnostic& diag) {
    skip_blank();
    out.where = {_line, _col, {}};
    out.text.clear();
    if (_pos >= _src.size()) {
      out.kind = Tok::end;
      return true;
    }
    char c = _src[_pos];
    if (c == '(' || c == ')' || c == ',' || c == '.') {
      out.kind = c == '(' ? Tok::lparen : c == ')' ? Tok::rparen : c == ',' ? Tok::comma : Tok::period;
      out.text = std::string(1, c);
      advance();
      return true;
    }
    if (c == '<') {
      if (_pos + 1 < _src.size() && _src[_pos + 1] == '-') {
        out.kind = Tok::arrow;
        out.text = "<-";
        advance();
        advance();
        return true;
      }
      diag = {Severity::error, out.where, "lexical", "expected '<-'"};
      return false;
    }
    if (is_lower_start(c) || is_upper_start(c)) {
      out.kind = is_upper_start(c) ? Tok::variable : Tok::ident;
      bool digits = true;
      while (_pos < _src.size() && is_ident_char(_src[_pos])) {
        digits = digits && std::isdigit(static_cast<unsigned char>(_src[_pos]));
        out.text += take();
      }
      // digits '.' digits [ ('e'|'E') ['+'|'-'] digits ] is a probability literal.
      if (digits && peek(0) == '.' && is_digit(peek(1))) {
        out.kind = Tok::number;
        out.text += take();
        while (is_digit(peek(0))) out.text += take();
        if (peek(0) == 'e' || peek(0) == 'E') {
          std::size_t k = (peek(1) == '+' || peek(1) == '-') ? 2 : 1;
          if (!is_digit(peek(k))) {
            diag = {Severity::error, {_line, _col, {}}, "probability", "malformed probability literal"};
            return false;
          }
          while (k--) out.text += take();
          while (is_digit(peek(0))) out.text += take();
        }
        if (_pos < _src.size() && is_ident_char(_src[_pos])) {
          diag = {Severity::error, {_line, _col, {}}, "probability", "malformed probability literal"};
          return false;
        }
      }
      return true;
    }
    std::string shown = static_cast<unsigned char>(c) < 0x20 ? "control character" : std::string("'") + c + "'";
    diag = {Severity::error, out.where, "lexical", "unexpected character " + shown};
    return false;
  }

 private:
  static bool is_digit(char c) { return c >= '0' && c <= '9'; }

  char peek(std::size_t k) const { return _pos + k < _src.size() ? _src[_pos + k] : '\0'; }

  char take() {
    char c = _src[_pos];
    advance();
    return c;
  }

  void advance() {
    if (_src[_pos] == '\n') {
      ++_line;
      _col = 1;
    } else {
      ++_col;
    }
    ++_pos;
  }

  void skip_blank() {
    while (_pos < _src.size()) {
      char c = _src[_pos];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v') {
        advance();
      } else if (c == '%') {
        while (_pos < _src.size() && _src[_pos] != '\n') advance();
      } else {
        break;
      }
    }
  }

  std::string_view _src;
  std::size_t _pos {0};
  int _line {1};
  int _col {1};
};

struct SyntaxError {
  Diagnostic diag;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : _lex(src) { shift(); }

  Program program() {
    Program prog;
    while (_tok.kind != Tok::end) prog.statements.push_back(statement());
    return prog;
  }

  std::vector<Term> conjunction() {
    std::vector<Term> atoms;
    if (_tok.kind == Tok::end) return atoms;
    atoms.push_back(atom());
    while (_tok.kind == Tok::comma) {
      shift();
      atoms.push_back(atom());
    }
    if (_tok.kind == Tok::period) shift();
    expect(Tok::end);
    return atoms;
  }

 private:
  Statement statement() {
    SourceLocation at = _tok.where;
    if (_tok.kind == Tok::ident && _tok.text == "assumable") {
      shift();
      if (_tok.kind == Tok::lparen) {
        shift();
        Term a = atom();
        if (a.is_false()) fail(at, "syntax", "'false' cannot be assumable");
        expect(Tok::comma);
        double p = probability();
        expect(Tok::rparen);
        expect(Tok::period);
        return AssumableDecl{std::move(a), p, at};
      }
      // A plain atom named `assumable`.
      Term head = Term::constant("assumable");
      return clause_rest(std::move(head), at);
    }
    Term head = atom();
    return clause_rest(std::move(head), at);
  }

  Clause clause_rest(Term head, SourceLocation at) {
    std::vector<Term> body;
    if (_tok.kind == Tok::arrow) {
      shift();
      body.push_back(atom());
      while (_tok.kind == Tok::comma) {
        shift();
        body.push_back(atom());
      }
    }
    expect(Tok::period);
    for (const auto& b : body) {
      if (b.is_false()) fail(at, "syntax", "'false' may only appear as a clause head");
    }
    return Clause{std::move(head), std::move(body), at};
  }

  double probability() {
    if (_tok.kind != Tok::number && !(_tok.kind == Tok::ident && all_digits(_tok.text))) {
      fail(_tok.where, "probability", std::string("expected probability literal, found ") + found());
    }
    double value = 0.0;
    const char* first = _tok.text.data();
    const char* last = first + _tok.text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
      fail(_tok.where, "probability", "malformed probability literal '" + _tok.text + "'");
    }
    shift();
    return value;
  }

  Term atom() {
    if (_tok.kind == Tok::variable) {
      fail(_tok.where, "syntax", "expected atom, found variable " + _tok.text);
    }
    if (_tok.kind != Tok::ident) {
      fail(_tok.where, "syntax", std::string("expected atom, found ") + found());
    }
    return structure();
  }

  Term term() {
    if (_tok.kind == Tok::variable) {
      Term v = Term::variable(_tok.text);
      shift();
      return v;
    }
    if (_tok.kind != Tok::ident) {
      fail(_tok.where, "syntax", std::string("expected term, found ") + found());
    }
    return structure();
  }

  Term structure() {
    std::string name = _tok.text;
    shift();
    if (_tok.kind != Tok::lparen) return Term::constant(std::move(name));
    shift();
    std::vector<Term> args;
    args.push_back(term());
    while (_tok.kind == Tok::comma) {
      shift();
      args.push_back(term());
    }
    expect(Tok::rparen);
    return Term::compound(std::move(name), std::move(args));
  }

  static bool all_digits(const std::string& s) {
    for (char c : s) {
      if (c < '0' || c > '9') return false;
    }
    return !s.empty();
  }

  std::string found() const {
    if (_tok.kind == Tok::end) return "end of input";
    return std::string(describe(_tok.kind)) + " '" + _tok.text + "'";
  }

  void expect(Tok k) {
    if (_tok.kind != k) {
      fail(_tok.where, "syntax", std::string("expected ") + describe(k) + ", found " + found());
    }
    shift();
  }

  void shift() {
    Diagnostic d;
    if (!_lex.next(_tok, d)) throw SyntaxError{std::move(d)};
  }

  [[noreturn]] static void fail(SourceLocation at, std::string code, std::string msg) {
    throw SyntaxError{{Severity::error, std::move(at), std::move(code), std::move(msg)}};
  }

  Lexer _lex;
  Token _tok;
};

}  // namespace detail

inline Result<Program> parse_program(std::string_view text) {
  try {
    detail::Parser p(text);
    return Result<Program>::success(p.program());
  } catch (detail::SyntaxError& e) {
    return Result<Program>::failure({std::move(e.diag)});
  }
}

// Parses a comma-separated conjunction of atoms; a trailing '.' is optional
// and the empty string is the empty conjunction.
inline Result<std::vector<Term>> parse_conjunction(std::string_view text) {
  try {
    detail::Parser p(text);
    return Result<std::vector<Term>>::success(p.conjunction());
  } catch (detail::SyntaxError& e) {
    return Result<std::vector<Term>>::failure({std::move(e.diag)});
  }
}

// Printing --------------------------------------------------------------------

// Shortest decimal that reads back to the same double.
inline std::string format_probability(double p) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, p);
  std::string s(buf, ptr);
  auto e = s.find('e');
  if (s.find('.') == std::string::npos) s.insert(e == std::string::npos ? s.size() : e, ".0");
  return s;
}

inline std::string to_string(const std::vector<Term>& conjunction) {
  std::string out;
  for (std::size_t i = 0; i < conjunction.size(); ++i) {
    if (i) out += ", ";
    append_term(out, conjunction[i]);
  }
  return out;
}

inline std::string to_string(const Clause& c) {
  std::string out = to_string(c.head);
  if (!c.body.empty()) {
    out += " <- ";
    out += to_string(c.body);
  }
  out += '.';
  return out;
}

inline std::string to_string(const AssumableDecl& a) {
  return "assumable( " + to_string(a.atom) + ", " + format_probability(a.prior) + " ).";
}

inline std::string to_string(const Statement& s) {
  return std::visit([](const auto& x) { return to_string(x); }, s);
}

inline std::string to_string(const Program& p) {
  std::string out;
  for (const auto& s : p.statements) {
    out += to_string(s);
    out += '\n';
  }
  return out;
}

}  // namespace pha
