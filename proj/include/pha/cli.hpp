#pragma once

// Command implementations behind the `pha` executable. Each returns the
// process exit code: 0 success, 1 domain or validation failure, 2 I/O or
// usage error.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <iterator>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pha/bn.hpp"
#include "pha/diagnostics.hpp"
#include "pha/engine.hpp"
#include "pha/kb.hpp"
#include "pha/oracle.hpp"
#include "pha/probability.hpp"
#include "pha/syntax.hpp"

namespace pha::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_domain = 1;
inline constexpr int exit_io = 2;

enum class Format { table, json };

struct StopFlags {
  std::optional<double> epsilon;
  std::optional<std::size_t> max_explanations;
  std::optional<std::uint64_t> max_expansions;
  bool keep_zero {false};

  StopCriteria criteria() const {
    StopCriteria s;
    s.epsilon = epsilon;
    s.max_explanations = max_explanations;
    s.max_expansions = max_expansions;
    return s;
  }
  EngineOptions options() const {
    EngineOptions o;
    o.keep_zero = keep_zero;
    return o;
  }
};

// I/O ---------------------------------------------------------------------------

struct IoError {
  std::string message;
};

// Reads a whole file, or stdin for "-".
inline std::string read_input(const std::string& path) {
  if (path == "-") {
    return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError {"cannot open '" + path + "'"};
  std::string text {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (in.bad()) throw IoError {"error reading '" + path + "'"};
  return text;
}

inline void write_output(const std::string& path, const std::string& text, std::ostream& out) {
  if (path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError {"cannot write '" + path + "'"};
  f << text;
  if (!f) throw IoError {"error writing '" + path + "'"};
}

inline void print_diagnostics(const std::vector<Diagnostic>& ds, const std::string& source, std::ostream& err) {
  for (const auto& d : ds) err << source << ":" << d << '\n';
}

inline std::string format_number(double x) {
  std::ostringstream os;
  os << std::setprecision(12) << x;
  return os.str();
}

// Query report ------------------------------------------------------------------

struct QueryReport {
  std::string query;
  SearchResult result;
  double wall_ms {0.0};
};

inline nlohmann::json to_json(const QueryReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  std::size_t rank = 0;
  for (const auto& e : r.result.explanations) {
    nlohmann::json hs = nlohmann::json::array();
    for (const auto& h : e.hypotheses) hs.push_back(to_string(h));
    rows.push_back({{"rank", ++rank}, {"prior", e.prior}, {"hypotheses", hs}});
  }
  return {
      {"query", r.query},
      {"explanations", rows},
      {"bounds", {{"lower", r.result.bounds.lower}, {"upper", r.result.bounds.upper}}},
      {"termination", to_string(r.result.termination)},
      {"expansions", r.result.expansions},
      {"wall_time_ms", r.wall_ms},
  };
}

inline void print_table(const QueryReport& r, std::ostream& out) {
  out << "query: " << r.query << '\n';
  out << std::left << std::setw(6) << "rank" << std::setw(16) << "prior" << "hypotheses\n";
  std::size_t rank = 0;
  for (const auto& e : r.result.explanations) {
    out << std::left << std::setw(6) << ++rank << std::setw(16) << format_number(e.prior)
        << to_string(e.hypotheses) << '\n';
  }
  out << "bounds: [" << format_number(r.result.bounds.lower) << ", "
      << format_number(r.result.bounds.upper) << "]\n";
  out << "termination: " << to_string(r.result.termination) << "  expansions: " << r.result.expansions
      << "  time: " << std::fixed << std::setprecision(3) << r.wall_ms << " ms\n";
  out.unsetf(std::ios::floatfield);
  if (r.result.mass_possibly_unsound()) {
    out << "warning: " << r.result.duplicates << " duplicate and " << r.result.non_minimal
        << " non-minimal explanations; rules may not be disjoint, mass may overcount\n";
  }
}

// compile-bn --------------------------------------------------------------------

struct CompileArgs {
  std::string input;
  std::string output {"-"};
  bool paper_exact {false};
  bool c_constraints {false};
  bool sidecar {true};
};

inline std::string sidecar_path(const std::string& pha_path) { return pha_path + ".domains.json"; }

inline int cmd_compile_bn(const CompileArgs& args, std::ostream& out, std::ostream& err) {
  try {
    std::string text = read_input(args.input);
    auto bn = parse_bn(text);
    if (!bn) {
      print_diagnostics(bn.diagnostics(), args.input, err);
      return exit_domain;
    }
    auto compiled = compile(*bn, {args.paper_exact, args.c_constraints});
    write_output(args.output, to_string(compiled.program), out);
    if (args.sidecar && args.output != "-") {
      write_output(sidecar_path(args.output), domains_json(*bn).dump(2) + "\n", out);
    }
    return exit_ok;
  } catch (const IoError& e) {
    err << "error: " << e.message << '\n';
    return exit_io;
  }
}

// explain -----------------------------------------------------------------------

struct ExplainArgs {
  std::string kb;
  std::string query;
  StopFlags stop;
  Format format {Format::table};
  bool trace {false};
};

namespace detail {

inline std::optional<KnowledgeBase> load_kb_file(const std::string& path, std::ostream& err) {
  std::string text = read_input(path);
  auto kb = load_kb(text);
  if (!kb) {
    print_diagnostics(kb.diagnostics(), path, err);
    return std::nullopt;
  }
  print_diagnostics(kb.diagnostics(), path, err);
  return *kb;
}

inline std::optional<std::vector<Term>> parse_query(const std::string& text, std::ostream& err) {
  auto q = parse_conjunction(text);
  if (!q) {
    print_diagnostics(q.diagnostics(), "query", err);
    return std::nullopt;
  }
  return *q;
}

}  // namespace detail

inline int cmd_explain(const ExplainArgs& args, std::ostream& out, std::ostream& err) {
  try {
    auto kb = detail::load_kb_file(args.kb, err);
    if (!kb) return exit_domain;
    auto query = detail::parse_query(args.query, err);
    if (!query) return exit_domain;

    auto start = std::chrono::steady_clock::now();
    Search search(*kb, *query, args.stop.options());
    Search::Observer trace;
    if (args.trace) {
      trace = [&err](const Search& s, const StepOutcome&) {
        err << "trace " << s.expansions() << ' ' << format_number(s.mass_found()) << ' '
            << format_number(s.mass_queued()) << '\n';
      };
    }
    QueryReport report;
    report.query = to_string(*query);
    report.result = search.run(args.stop.criteria(), trace);
    report.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

    if (args.format == Format::json) {
      out << to_json(report).dump(2) << '\n';
    } else {
      print_table(report, out);
    }
    return exit_ok;
  } catch (const IoError& e) {
    err << "error: " << e.message << '\n';
    return exit_io;
  } catch (const Error& e) {
    err << "error [" << e.code() << "] " << e.what() << '\n';
    return exit_domain;
  }
}

// posterior ---------------------------------------------------------------------

struct PosteriorArgs {
  std::string kb;
  std::string variable;
  std::string observation;
  std::vector<std::string> values;  // empty: read from the domains sidecar
  std::string domains;              // sidecar path; default <kb>.domains.json
  StopFlags stop;
  Format format {Format::table};
};

namespace detail {

inline std::optional<std::vector<std::string>> values_from_sidecar(const std::string& path,
                                                                   const std::string& variable) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  nlohmann::json doc;
  try {
    in >> doc;
    for (const auto& v : doc.at("variables")) {
      if (v.at("name").get<std::string>() == variable) return v.at("values").get<std::vector<std::string>>();
    }
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
  return std::vector<std::string> {};
}

}  // namespace detail

inline int cmd_posterior(const PosteriorArgs& args, std::ostream& out, std::ostream& err) {
  try {
    auto kb = detail::load_kb_file(args.kb, err);
    if (!kb) return exit_domain;
    auto obs = detail::parse_query(args.observation, err);
    if (!obs) return exit_domain;

    std::vector<std::string> values = args.values;
    if (values.empty()) {
      std::string side = args.domains.empty() ? sidecar_path(args.kb) : args.domains;
      auto found = detail::values_from_sidecar(side, args.variable);
      if (!found) {
        err << "error: no value domain for '" << args.variable << "': pass --values or a domains file ("
            << side << " not readable)\n";
        return exit_io;
      }
      if (found->empty()) {
        err << "error [unknown-variable] '" << args.variable << "' is not listed in " << side << '\n';
        return exit_domain;
      }
      values = *found;
    }

    auto dist = distribution(*kb, args.variable, values, *obs, args.stop.criteria(), args.stop.options());
    if (args.format == Format::json) {
      nlohmann::json rows = nlohmann::json::array();
      for (const auto& d : dist) {
        rows.push_back({{"value", d.value}, {"lower", d.lower}, {"upper", d.upper}, {"exact", d.exact}});
      }
      nlohmann::json doc {{"variable", args.variable}, {"observation", to_string(*obs)}, {"values", rows}};
      out << doc.dump(2) << '\n';
    } else {
      out << "P(" << args.variable << " | " << (obs->empty() ? "true" : to_string(*obs)) << ")\n";
      for (const auto& d : dist) {
        out << "  " << args.variable << "=" << std::left << std::setw(10) << d.value;
        if (d.exact) {
          out << format_number(d.lower) << "  (exact)\n";
        } else {
          out << "[" << format_number(d.lower) << ", " << format_number(d.upper) << "]\n";
        }
      }
    }
    return exit_ok;
  } catch (const IoError& e) {
    err << "error: " << e.message << '\n';
    return exit_io;
  } catch (const Error& e) {
    err << "error [" << e.code() << "] " << e.what() << '\n';
    return exit_domain;
  }
}

// check -------------------------------------------------------------------------

struct CheckArgs {
  std::string bn;
  std::string kb;  // compiled program to check; default compiles the network
  double tolerance {1e-9};
  // Sum over variables of log2(domain size) allowed for the brute-force oracle.
  double size_guard_bits {14.0};
};

struct Comparison {
  std::string label;
  double engine {0.0};
  double oracle {0.0};
  double diff() const { return std::fabs(engine - oracle); }
};

inline int cmd_check(const CheckArgs& args, std::ostream& out, std::ostream& err) {
  try {
    std::string text = read_input(args.bn);
    auto bn = parse_bn(text);
    if (!bn) {
      print_diagnostics(bn.diagnostics(), args.bn, err);
      return exit_domain;
    }
    double bits = 0.0;
    for (const auto& v : bn->variables()) bits += std::log2(static_cast<double>(v.values.size()));
    if (bits > args.size_guard_bits + 1e-9) {
      err << "error [size-guard] network has " << format_number(bits)
          << " binary-equivalent variables; the oracle is limited to " << format_number(args.size_guard_bits)
          << '\n';
      return exit_domain;
    }

    KnowledgeBase kb;
    if (args.kb.empty()) {
      auto built = build_kb(compile(*bn).program);
      if (!built) {
        print_diagnostics(built.diagnostics(), "compiled", err);
        return exit_domain;
      }
      kb = *built;
    } else {
      auto loaded = detail::load_kb_file(args.kb, err);
      if (!loaded) return exit_domain;
      kb = std::move(*loaded);
    }

    std::vector<Comparison> rows;
    for (const auto& v : bn->variables()) {
      for (const auto& value : v.values) {
        double engine = mass(kb, {oracle::value_atom(v.name, value)}).lower;
        double truth = oracle::marginal(*bn, {{v.name, value}});
        rows.push_back({"P(" + v.name + "=" + value + ")", engine, truth});
      }
    }
    std::size_t marginals = rows.size();
    for (const auto& t : terminals(*bn)) {
      const auto& obs_value = bn->variable(*bn->index_of(t)).values.front();
      oracle::Assignment obs {{t, obs_value}};
      if (oracle::marginal(*bn, obs) <= 0.0) continue;
      std::vector<Term> obs_atoms {oracle::value_atom(t, obs_value)};
      for (const auto& v : bn->variables()) {
        auto dist = distribution(kb, v.name, v.values, obs_atoms);
        for (std::size_t k = 0; k < v.values.size(); ++k) {
          double truth = oracle::posterior_exact(*bn, v.name, v.values[k], obs);
          rows.push_back({"P(" + v.name + "=" + v.values[k] + " | " + t + "=" + obs_value + ")",
                          dist[k].lower, truth});
        }
      }
    }

    double worst = 0.0;
    std::size_t failures = 0;
    out << std::left << std::setw(44) << "quantity" << std::setw(20) << "engine" << std::setw(20) << "oracle"
        << "abs diff\n";
    for (const auto& r : rows) {
      worst = std::max(worst, r.diff());
      bool bad = !(r.diff() <= args.tolerance);
      failures += bad ? 1 : 0;
      out << std::left << std::setw(44) << r.label << std::setw(20) << format_number(r.engine) << std::setw(20)
          << format_number(r.oracle) << format_number(r.diff()) << (bad ? "  MISMATCH" : "") << '\n';
    }
    out << marginals << " marginals and " << rows.size() - marginals << " posteriors compared; max abs diff "
        << format_number(worst) << " (tolerance " << format_number(args.tolerance) << ")\n";
    if (failures) {
      out << failures << " mismatches\n";
      return exit_domain;
    }
    return exit_ok;
  } catch (const IoError& e) {
    err << "error: " << e.message << '\n';
    return exit_io;
  } catch (const Error& e) {
    err << "error [" << e.code() << "] " << e.what() << '\n';
    return exit_domain;
  }
}

}  // namespace pha::cli
