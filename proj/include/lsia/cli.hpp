#pragma once

// Batch driver behind tools/lsia.cpp. Exit codes: 10 sat, 0 unknown,
// 1 input or usage error, 2 model validation failure.

#include <atomic>
#include <cctype>
#include <exception>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "lsia/cnf.hpp"
#include "lsia/parser.hpp"
#include "lsia/search.hpp"

namespace lsia::cli {

inline constexpr int kExitSat = 10;
inline constexpr int kExitUnknown = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitInvalidModel = 2;

struct RunConfig {
  std::string input;
  SearchParams params = [] {
    SearchParams p;
    p.time_limit = 1200.0;
    return p;
  }();
  bool validate = true;
  bool stats = false;
  std::optional<std::string> trace_path;
  unsigned portfolio = 1;
  bool gcd_reduce = true;
  bool corrupt_model = false;  // test hook: perturb the model before validation
};

inline bool is_simple_symbol(const std::string& s) {
  if (s.empty() || std::isdigit(static_cast<unsigned char>(s[0]))) return false;
  static const std::string extra = "~!@$%^&*_-+=<>.?/";
  for (unsigned char c : s)
    if (!std::isalnum(c) && extra.find(static_cast<char>(c)) == std::string::npos) return false;
  return true;
}

inline std::string smt_symbol(const std::string& s) {
  return is_simple_symbol(s) ? s : "|" + s + "|";
}

inline std::string smt_int(Int v) {
  if (v >= 0) return std::to_string(v);
  // avoid negating INT64_MIN
  std::string digits = std::to_string(v).substr(1);
  return "(- " + digits + ")";
}

inline void print_model(std::ostream& out, const Formula& f, const Assignment& m) {
  out << "(model\n";
  for (std::size_t p = 0; p < f.n_original_bool; ++p)
    out << "  (define-fun " << smt_symbol(f.bool_names[p]) << " () Bool "
        << (m.bools[p] ? "true" : "false") << ")\n";
  for (std::size_t x = 0; x < f.n_int(); ++x)
    out << "  (define-fun " << smt_symbol(f.int_names[x]) << " () Int " << smt_int(m.ints[x])
        << ")\n";
  out << ")\n";
}

inline std::string format_op(const Formula& f, const Operation& op) {
  if (op.is_flip()) return "flip " + f.bool_names[op.var];
  return f.int_names[op.var] + " := " + std::to_string(op.value);
}

// Changes one value of the model, preferring a change that breaks it.
inline void corrupt(const Formula& f, Assignment& m) {
  for (std::size_t x = 0; x < m.ints.size(); ++x) {
    for (Int d : {1, -1, 1000}) {
      Assignment t = m;
      if (t.ints[x] > INT64_MAX - 1000 || t.ints[x] == INT64_MIN) continue;
      t.ints[x] += d;
      if (!model_is_valid(f, t)) {
        m = t;
        return;
      }
    }
  }
  for (std::size_t p = 0; p < m.bools.size(); ++p) {
    Assignment t = m;
    t.bools[p] = !t.bools[p];
    if (!model_is_valid(f, t)) {
      m = t;
      return;
    }
  }
  if (!m.ints.empty()) m.ints[0] = m.ints[0] == INT64_MAX ? m.ints[0] - 1 : m.ints[0] + 1;
}

inline Result run_portfolio(const Formula& f, const RunConfig& cfg, std::ostream* trace) {
  SearchParams params = cfg.params;
  params.validate_model = cfg.validate;
  if (cfg.portfolio <= 1) {
    Engine engine(f, params);
    if (trace) {
      engine.set_trace([&](const TraceEvent& ev) {
        if (ev.kind == TraceEvent::Kind::Restart) {
          *trace << ev.step << " restart cost=" << ev.cost << "\n";
        } else {
          *trace << ev.step << " " << to_string(ev.mode) << " " << format_op(f, ev.op)
                 << " cost=" << ev.cost << " tenure=" << ev.tenure
                 << (ev.tabu_override ? " override" : "") << "\n";
        }
      });
    }
    return engine.solve();
  }
  std::atomic<bool> stop{false};
  std::atomic<int> winner{-1};
  std::vector<Result> results(cfg.portfolio);
  std::vector<std::exception_ptr> errors(cfg.portfolio);
  std::vector<std::thread> workers;
  for (unsigned i = 0; i < cfg.portfolio; ++i) {
    workers.emplace_back([&, i] {
      try {
        SearchParams p = params;
        p.seed = params.seed + i;
        Engine engine(f, p);
        engine.set_stop_flag(&stop);
        results[i] = engine.solve();
        if (results[i].status == Status::Sat) {
          int none = -1;
          winner.compare_exchange_strong(none, static_cast<int>(i));
          stop = true;
        }
      } catch (...) {
        errors[i] = std::current_exception();
        stop = true;
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  if (winner >= 0) return results[static_cast<std::size_t>(winner.load())];
  Result r = results[0];
  for (const auto& other : results)
    if (other.reason != UnknownReason::Interrupted) r = other;
  return r;
}

/// Runs one configuration end to end and returns the process exit code.
inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.portfolio < 1) {
    err << "error: --portfolio must be at least 1\n";
    return kExitError;
  }
  try {
    cfg.params.validate();
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  std::ifstream in(cfg.input, std::ios::binary);
  if (!in) {
    err << "error: cannot read " << cfg.input << "\n";
    return kExitError;
  }
  std::stringstream buf;
  buf << in.rdbuf();

  Formula f;
  try {
    Script script = parse_script(buf.str());
    for (const auto& w : script.warnings) err << "warning: " << w << "\n";
    f = to_cnf(script, CnfOptions{cfg.gcd_reduce});
    detect_bounds(f);
  } catch (const ParseError& e) {
    err << cfg.input << ":" << e.what() << "\n";
    return kExitError;
  } catch (const Error& e) {
    err << cfg.input << ": " << e.what() << "\n";
    return kExitError;
  }

  std::unique_ptr<std::ofstream> trace;
  if (cfg.trace_path) {
    trace = std::make_unique<std::ofstream>(*cfg.trace_path);
    if (!*trace) {
      err << "error: cannot write " << *cfg.trace_path << "\n";
      return kExitError;
    }
  }

  Result r;
  try {
    r = run_portfolio(f, cfg, trace.get());
  } catch (const std::logic_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalidModel;
  }

  if (cfg.stats) {
    err << "steps " << r.stats.steps << "\n"
        << "restarts " << r.stats.restarts << "\n"
        << "mode-switches " << r.stats.mode_switches << "\n"
        << "weight-updates " << r.stats.weight_updates << "\n"
        << "wall-time " << std::fixed << std::setprecision(3) << r.stats.wall_seconds << "\n";
    if (r.status == Status::Unknown) err << "reason " << to_string(r.reason) << "\n";
  }
  if (!r.diagnostic.empty()) err << "diagnostic: " << r.diagnostic << "\n";

  if (r.status != Status::Sat) {
    out << "unknown\n";
    return kExitUnknown;
  }
  if (cfg.corrupt_model) corrupt(f, r.model);
  if (cfg.validate && !model_is_valid(f, r.model)) {
    err << "error: model fails validation against the original assertions\n";
    return kExitInvalidModel;
  }
  out << "sat\n";
  print_model(out, f, r.model);
  return kExitSat;
}

}  // namespace lsia::cli
