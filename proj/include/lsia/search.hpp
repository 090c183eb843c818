#pragma once

// Two-mode local search: Boolean and Integer episodes, two-level candidate
// selection with BMS sampling, PAWS clause weighting, tabu and restarts.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lsia/formula.hpp"
#include "lsia/operators.hpp"
#include "lsia/oracle.hpp"
#include "lsia/state.hpp"
#include "lsia/tabu.hpp"

namespace lsia {

enum class Variant : std::uint8_t { Default, Fix1, Fix5, Focused, Extended, ScoreOnly };

inline const char* to_string(Variant v) {
  switch (v) {
    case Variant::Default: return "default";
    case Variant::Fix1: return "fix_1";
    case Variant::Fix5: return "fix_5";
    case Variant::Focused: return "focused";
    case Variant::Extended: return "extended";
    case Variant::ScoreOnly: return "score_only";
  }
  return "?";
}

inline std::optional<Variant> parse_variant(const std::string& s) {
  for (auto v : {Variant::Default, Variant::Fix1, Variant::Fix5, Variant::Focused,
                 Variant::Extended, Variant::ScoreOnly})
    if (s == to_string(v)) return v;
  return std::nullopt;
}

struct SearchParams {
  double L = 20;
  std::uint32_t t = 45;
  std::uint32_t tt_base = 3;
  std::uint32_t tt_rand = 10;
  std::uint64_t max_no_improve = 500000;
  double sp = 0.0003;
  std::uint64_t seed = 0;
  std::optional<double> time_limit;  // seconds
  std::optional<std::uint64_t> max_steps;
  Variant variant = Variant::Default;
  bool validate_model = true;

  void validate() const {
    if (!(L > 0)) throw std::invalid_argument("L must be positive");
    if (t == 0) throw std::invalid_argument("t must be positive");
    if (!(sp >= 0 && sp <= 1)) throw std::invalid_argument("sp must lie in [0, 1]");
    if (max_no_improve == 0) throw std::invalid_argument("max_no_improve must be positive");
    if (time_limit && !(*time_limit >= 0)) throw std::invalid_argument("time limit must be >= 0");
  }
};

enum class Status : std::uint8_t { Sat, Unknown };

enum class UnknownReason : std::uint8_t {
  None,
  Timeout,
  StepLimit,
  ContradictoryBounds,
  EmptyClause,
  NumericOverflow,
  Interrupted,
};

inline const char* to_string(UnknownReason r) {
  switch (r) {
    case UnknownReason::None: return "none";
    case UnknownReason::Timeout: return "timeout";
    case UnknownReason::StepLimit: return "step-limit";
    case UnknownReason::ContradictoryBounds: return "contradictory-bounds";
    case UnknownReason::EmptyClause: return "empty-clause";
    case UnknownReason::NumericOverflow: return "numeric-overflow";
    case UnknownReason::Interrupted: return "interrupted";
  }
  return "?";
}

struct Stats {
  std::uint64_t steps = 0;
  std::uint64_t restarts = 0;
  std::uint64_t mode_switches = 0;
  std::uint64_t weight_updates = 0;
  std::uint64_t walk_steps = 0;
  std::uint64_t tabu_overrides = 0;
  double wall_seconds = 0;
};

struct Result {
  Status status = Status::Unknown;
  UnknownReason reason = UnknownReason::None;
  Assignment model;  // original variables only; auxiliaries dropped
  Stats stats;
  std::string diagnostic;
};

enum class Mode : std::uint8_t { Boolean, Integer };

inline const char* to_string(Mode m) { return m == Mode::Boolean ? "bool" : "int"; }

struct TraceEvent {
  enum class Kind : std::uint8_t { Step, Restart };
  Kind kind = Kind::Step;
  std::uint64_t step = 0;
  Mode mode = Mode::Integer;
  Operation op;
  Int previous = 0;       // value before an IntMove
  Int cost = 0;           // weighted cost after the step
  std::uint64_t tenure = 0;
  bool tabu_override = false;
};

using TraceSink = std::function<void(const TraceEvent&)>;

/// Fraction of literal occurrences in falsified clauses that belong to mode m.
inline double mode_proportion(const SearchState& s, Mode m) {
  auto [nb, ni] = s.falsified_literal_counts();
  if (nb + ni == 0) return 0;
  return static_cast<double>(m == Mode::Boolean ? nb : ni) / static_cast<double>(nb + ni);
}

/// Model projected to the original variables.
inline Assignment project_model(const Formula& f, const Assignment& a) {
  Assignment m;
  m.bools.assign(a.bools.begin(), a.bools.begin() + static_cast<std::ptrdiff_t>(f.n_original_bool));
  m.ints = a.ints;
  return m;
}

/// Checks a projected model against the original assertion, or against the
/// clauses when no assertion tree is attached.
inline bool model_is_valid(const Formula& f, const Assignment& model) {
  if (f.original_ast) return eval_ast(f.original_ast, model);
  return satisfies_clauses(f, model);
}

class Engine {
 public:
  Engine(const Formula& f, SearchParams params)
      : f_(f), p_(params), state_(f, params.seed), tabu_(f.n_bool(), f.n_int()), pools_(f) {
    p_.validate();
    if (p_.variant == Variant::Fix1) moves_ = {MoveKind::FixedIncrement, 1};
    if (p_.variant == Variant::Fix5) moves_ = {MoveKind::FixedIncrement, 5};
  }

  void set_trace(TraceSink sink) { trace_ = std::move(sink); }
  void set_stop_flag(const std::atomic<bool>* flag) { stop_ = flag; }

  const SearchParams& params() const { return p_; }
  SearchState& state() { return state_; }
  const SearchState& state() const { return state_; }
  TabuTable& tabu() { return tabu_; }
  const Stats& stats() const { return stats_; }

  Result solve() {
    start_ = std::chrono::steady_clock::now();
    Result r;
    if (f_.has_empty_clause) {
      r.reason = UnknownReason::EmptyClause;
      return finish(r);
    }
    if (f_.contradictory_bounds) {
      r.reason = UnknownReason::ContradictoryBounds;
      return finish(r);
    }
    try {
      state_.reset(init_assignment(f_, state_.rng()));
      best_falsified_ = state_.falsified().size();
      stall_ = 0;
      bool has_int = std::any_of(f_.clauses.begin(), f_.clauses.end(),
                                 [](const Clause& c) { return c.n_int > 0; });
      Mode mode = has_int ? Mode::Integer : Mode::Boolean;
      std::optional<Mode> last;
      while (!state_.falsified().empty()) {
        if (mode_proportion(state_, mode) == 0) mode = other(mode);
        if (last && *last != mode) ++stats_.mode_switches;
        last = mode;
        mode_episode(mode);
        mode = other(mode);
      }
    } catch (const Interrupt& i) {
      r.reason = i.reason;
      return finish(r);
    } catch (const NumericOverflow& e) {
      r.reason = UnknownReason::NumericOverflow;
      r.diagnostic = e.what();
      return finish(r);
    }
    r.status = Status::Sat;
    r.model = project_model(f_, state_.assignment());
    if (p_.validate_model && !model_is_valid(f_, r.model))
      throw std::logic_error("soundness: model fails the original assertion");
    return finish(r);
  }

  /// Runs one episode of mode m. Returns true when the formula is satisfied.
  bool mode_episode(Mode m) {
    double budget = p_.L * mode_proportion(state_, m);
    std::uint64_t non_improve = 0;
    while (static_cast<double>(non_improve) < budget) {
      if (state_.falsified().empty()) return true;
      check_limits();
      Int before = state_.cost();
      std::size_t restarts = stats_.restarts;
      bool moved = m == Mode::Boolean ? boolean_step() : integer_step();
      if (!moved) break;
      if (stats_.restarts != restarts) break;
      if (state_.cost() >= before) ++non_improve;
    }
    return state_.falsified().empty();
  }

  /// One Boolean-mode step. False when no falsified clause has a Boolean literal.
  bool boolean_step() {
    if (state_.falsified_with_bool() == 0) return false;
    ++stamp_;
    bool_stamp_.resize(f_.n_bool(), 0);
    std::optional<Operation> best;
    Int best_score = 0;
    std::uint64_t ties = 0;
    std::uint64_t next = state_.steps() + 1;
    for (auto c : state_.falsified()) {
      for (const auto& l : f_.clauses[c].literals) {
        if (!l.is_bool() || bool_stamp_[l.index] == stamp_) continue;
        bool_stamp_[l.index] = stamp_;
        auto op = flip_op(l.index);
        if (tabu_.forbidden(op, 0, next)) continue;
        Int sc = state_.score(op);
        if (sc > 0) consider(op, sc, best, best_score, ties);
      }
    }
    if (best) {
      execute(*best, Mode::Boolean, false);
      return true;
    }
    update_weights();
    auto c = random_falsified(true);
    std::vector<Operation> cands;
    for (const auto& l : f_.clauses[c].literals)
      if (l.is_bool()) cands.push_back(flip_op(l.index));
    bool override = filter_tabu(cands);
    ++stats_.walk_steps;
    execute(select_by(cands, false), Mode::Boolean, override);
    return true;
  }

  /// One Integer-mode step. False when no falsified clause has an integer literal.
  bool integer_step() {
    if (state_.falsified_with_int() == 0) return false;
    Rng& rng = state_.rng();
    if (p_.variant == Variant::Extended) {
      auto pools = pools_.build(state_, moves_, &tabu_, rng);
      pools.focused.insert(pools.focused.end(), pools.others.begin(), pools.others.end());
      if (auto op = best_decreasing(pools.focused)) {
        execute(*op, Mode::Integer, false);
        return true;
      }
    } else {
      auto s = pools_.focused(state_, moves_, &tabu_, rng);
      if (auto op = best_decreasing(s)) {
        execute(*op, Mode::Integer, false);
        return true;
      }
      if (p_.variant != Variant::Focused) {
        auto d = pools_.others(state_, moves_, &tabu_, rng);
        sample_bms(d);
        if (auto op = best_decreasing(d)) {
          execute(*op, Mode::Integer, false);
          return true;
        }
      }
    }
    update_weights();
    ++stats_.walk_steps;
    auto c = random_falsified(false);
    auto [op, override] = walk_move(c);
    if (op) execute(*op, Mode::Integer, override);
    return true;
  }

  /// Random-walk choice within falsified clause c: the move with greatest
  /// dscore (LIA) or score (NIA, score_only), falling back to unit moves.
  std::pair<std::optional<Operation>, bool> walk_move(std::uint32_t c) {
    Rng& rng = state_.rng();
    std::vector<Operation> cands;
    std::vector<Literal> arith;
    for (const auto& l : f_.clauses[c].literals) {
      if (!l.is_arith()) continue;
      arith.push_back(l);
      literal_moves(state_, l, moves_, rng, cands);
    }
    std::erase_if(cands, [&](const Operation& o) { return o.value == state_.int_value(o.var); });
    bool override = filter_tabu(cands);
    if (cands.empty()) {
      const auto& l = arith[rng.below(arith.size())];
      const auto& vars = f_.occ.atom_vars[l.index];
      auto op = unit_move(state_, l, vars[rng.below(vars.size())], rng);
      bool blocked = op && tabu_.forbidden(*op, state_.int_value(op->var), state_.steps() + 1);
      if (blocked) ++stats_.tabu_overrides;
      return {op, blocked};
    }
    bool use_dscore = f_.theory == Theory::LIA && p_.variant != Variant::ScoreOnly;
    std::optional<Operation> op;
    try {
      op = select_by(cands, use_dscore);
    } catch (const NumericOverflow&) {
    }
    return {op, override};
  }

  /// Restarts when the falsified-clause count has not improved for
  /// max_no_improve steps. Returns true when a restart happened.
  bool restart_if_stalled() {
    std::size_t nf = state_.falsified().size();
    if (nf < best_falsified_) {
      best_falsified_ = nf;
      stall_ = 0;
      return false;
    }
    if (++stall_ < p_.max_no_improve) return false;
    state_.reset(init_assignment(f_, state_.rng()));
    state_.reset_weights();
    tabu_.clear();
    best_falsified_ = state_.falsified().size();
    stall_ = 0;
    ++stats_.restarts;
    if (trace_) {
      TraceEvent ev;
      ev.kind = TraceEvent::Kind::Restart;
      ev.step = state_.steps();
      ev.cost = state_.cost();
      trace_(ev);
    }
    return true;
  }

 private:
  struct Interrupt {
    UnknownReason reason;
  };

  static Mode other(Mode m) { return m == Mode::Boolean ? Mode::Integer : Mode::Boolean; }

  Result finish(Result r) {
    stats_.steps = state_.steps();
    stats_.wall_seconds = elapsed();
    r.stats = stats_;
    return r;
  }

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

  void check_limits() {
    if (p_.max_steps && state_.steps() >= *p_.max_steps) throw Interrupt{UnknownReason::StepLimit};
    if ((state_.steps() & 63) != 0) return;
    if (stop_ && stop_->load(std::memory_order_relaxed)) throw Interrupt{UnknownReason::Interrupted};
    if (p_.time_limit && elapsed() >= *p_.time_limit) throw Interrupt{UnknownReason::Timeout};
  }

  void update_weights() {
    state_.update_weights_paws(p_.sp);
    ++stats_.weight_updates;
  }

  // Uniformly random falsified clause with Boolean (or integer) literals.
  std::uint32_t random_falsified(bool want_bool) {
    const auto& fal = state_.falsified();
    std::uint32_t pick = 0;
    std::uint64_t seen = 0;
    for (auto c : fal) {
      const auto& cl = f_.clauses[c];
      if ((want_bool ? cl.n_bool : cl.n_int) == 0) continue;
      if (state_.rng().below(++seen) == 0) pick = c;
    }
    return pick;
  }

  // Removes tabu candidates unless that would remove all of them. Returns
  // true when tabu had to be ignored.
  bool filter_tabu(std::vector<Operation>& cands) {
    std::uint64_t next = state_.steps() + 1;
    std::vector<Operation> allowed;
    for (const auto& op : cands)
      if (!tabu_.forbidden(op, op.is_flip() ? 0 : state_.int_value(op.var), next))
        allowed.push_back(op);
    if (allowed.empty() && !cands.empty()) {
      ++stats_.tabu_overrides;
      return true;
    }
    cands = std::move(allowed);
    return false;
  }

  void consider(const Operation& op, Int key, std::optional<Operation>& best, Int& best_key,
                std::uint64_t& ties) {
    if (!best || key > best_key) {
      best = op;
      best_key = key;
      ties = 1;
    } else if (key == best_key && state_.rng().below(++ties) == 0) {
      best = op;
    }
  }

  std::optional<Operation> best_decreasing(const std::vector<Operation>& pool) {
    std::optional<Operation> best;
    Int best_score = 0;
    std::uint64_t ties = 0;
    for (const auto& op : pool) {
      try {
        Int sc = state_.score(op);
        if (sc > 0) consider(op, sc, best, best_score, ties);
      } catch (const NumericOverflow&) {
      }
    }
    return best;
  }

  Operation select_by(const std::vector<Operation>& cands, bool use_dscore) {
    std::optional<Operation> best;
    Int best_key = 0;
    std::uint64_t ties = 0;
    for (const auto& op : cands) {
      try {
        auto eff = state_.evaluate(op);
        consider(op, use_dscore ? eff.dscore : eff.score, best, best_key, ties);
      } catch (const NumericOverflow&) {
      }
    }
    if (!best) throw NumericOverflow("every candidate overflows");
    return *best;
  }

  // Keeps a uniform sample of at most t operations (without replacement).
  void sample_bms(std::vector<Operation>& pool) {
    if (pool.size() <= p_.t) return;
    for (std::size_t i = 0; i < p_.t; ++i) {
      std::size_t j = i + state_.rng().below(pool.size() - i);
      std::swap(pool[i], pool[j]);
    }
    pool.resize(p_.t);
  }

  void execute(const Operation& op, Mode mode, bool override) {
    Int previous = op.is_flip() ? 0 : state_.int_value(op.var);
    state_.apply(op);
    std::uint64_t step = state_.steps();
    std::uint64_t tenure = p_.tt_base + (p_.tt_rand ? state_.rng().below(p_.tt_rand) : 0);
    tabu_.record(op, previous, step, tenure);
    if (trace_) {
      TraceEvent ev;
      ev.step = step;
      ev.mode = mode;
      ev.op = op;
      ev.previous = previous;
      ev.cost = state_.cost();
      ev.tenure = tenure;
      ev.tabu_override = override;
      trace_(ev);
    }
    restart_if_stalled();
  }

  const Formula& f_;
  SearchParams p_;
  SearchState state_;
  TabuTable tabu_;
  PoolBuilder pools_;
  MoveConfig moves_;
  TraceSink trace_;
  const std::atomic<bool>* stop_ = nullptr;
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
  Stats stats_;
  std::size_t best_falsified_ = 0;
  std::uint64_t stall_ = 0;
  std::uint64_t stamp_ = 0;
  std::vector<std::uint64_t> bool_stamp_;
};

/// Convenience wrapper around Engine.
inline Result solve(const Formula& f, const SearchParams& params = {}) {
  return Engine(f, params).solve();
}

}  // namespace lsia
