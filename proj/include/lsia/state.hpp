#pragma once

// Mutable search state: assignment, atom values, clause caches, clause
// weights and the falsified-clause set, all maintained incrementally.

#include <cstdint>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lsia/formula.hpp"
#include "lsia/integer.hpp"

namespace lsia {

/// Seeded generator with the few draws the search needs. Uses plain modulo
/// reduction so traces are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }
  /// Uniform in [0, n), n > 0.
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(gen_() % n); }
  /// Uniform in [0, 1).
  double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  void reseed(std::uint64_t seed) { gen_.seed(seed); }

 private:
  std::mt19937_64 gen_;
};

enum class OpKind : std::uint8_t { Flip, IntMove };

/// A Boolean flip or an integer assignment x <- value.
struct Operation {
  OpKind kind = OpKind::IntMove;
  VarIndex var = 0;
  Int value = 0;                  // IntMove only
  std::optional<Literal> source;  // literal that produced the move

  static Operation flip(VarIndex p) { return Operation{OpKind::Flip, p, 0, std::nullopt}; }
  static Operation move(VarIndex x, Int v, std::optional<Literal> src = std::nullopt) {
    return Operation{OpKind::IntMove, x, v, src};
  }

  bool is_flip() const { return kind == OpKind::Flip; }

  /// Same effect (provenance ignored).
  bool same_effect(const Operation& o) const {
    return kind == o.kind && var == o.var && (kind == OpKind::Flip || value == o.value);
  }
};

struct LiteralState {
  Int delta = 0;  // lhs - rhs for arithmetic literals
  bool is_true = false;
  Int dtt = 0;
};

struct ClauseState {
  Int weight = 1;
  std::uint32_t sat_count = 0;
  Int dts = 0;
};

/// Booleans true; integers random in [lb, ub] when both bounds exist, the
/// single bound when only one exists, 0 otherwise.
inline Assignment init_assignment(const Formula& f, Rng& rng) {
  Assignment a;
  a.bools.assign(f.n_bool(), true);
  a.ints.assign(f.n_int(), 0);
  for (std::size_t x = 0; x < f.n_int(); ++x) {
    const Bound b = x < f.bounds.size() ? f.bounds[x] : Bound{};
    if (b.lb && b.ub && *b.lb <= *b.ub) {
      auto width = static_cast<std::uint64_t>(*b.ub) - static_cast<std::uint64_t>(*b.lb);
      std::uint64_t off = width == UINT64_MAX ? rng.next() : rng.next() % (width + 1);
      a.ints[x] = static_cast<Int>(static_cast<std::uint64_t>(*b.lb) + off);
    } else if (b.ub) {
      a.ints[x] = *b.ub;
    } else if (b.lb) {
      a.ints[x] = *b.lb;
    }
  }
  return a;
}

/// Distance to truth from scratch.
inline Int compute_dtt(const Formula& f, const Literal& l, const Assignment& a) {
  if (l.is_bool()) return a.bools[l.index] == l.positive ? 0 : 1;
  const auto& atom = f.atoms[l.index];
  return distance_to_truth(atom.relation, l.positive, atom.delta(a.ints));
}

/// Distance to satisfaction from scratch: min dtt over the clause.
inline Int compute_dts(const Formula& f, const Clause& c, const Assignment& a) {
  Int best = -1;
  for (const auto& l : c.literals) {
    Int d = compute_dtt(f, l, a);
    if (best < 0 || d < best) best = d;
  }
  return best < 0 ? 0 : best;
}

enum class PawsBranch : std::uint8_t { Increased, Smoothed };

/// Returned by apply(); restores the previous value when undone.
struct UndoToken {
  OpKind kind = OpKind::IntMove;
  VarIndex var = 0;
  Int previous = 0;
};

struct OperationEffect {
  Int score = 0;   // cost before - cost after
  Int dscore = 0;  // weighted dts decrease
};

class SearchState {
 public:
  explicit SearchState(const Formula& f, std::uint64_t seed = 0) : f_(f), rng_(seed) {
    clauses_.assign(f.clauses.size(), ClauseState{});
    falsified_pos_.assign(f.clauses.size(), kNotFalsified);
    clause_stamp_.assign(f.clauses.size(), 0);
    atom_stamp_.assign(f.atoms.size(), 0);
    scratch_delta_.assign(f.atoms.size(), 0);
    delta_.assign(f.atoms.size(), 0);
    Assignment a;
    a.bools.assign(f.n_bool(), true);
    a.ints.assign(f.n_int(), 0);
    reset(std::move(a));
  }

  /// Installs a new assignment and recomputes every cache. Weights are kept.
  void reset(Assignment a) {
    if (a.bools.size() != f_.n_bool() || a.ints.size() != f_.n_int())
      throw std::invalid_argument("assignment does not match the formula signature");
    a_ = std::move(a);
    for (std::size_t i = 0; i < f_.atoms.size(); ++i) delta_[i] = f_.atoms[i].delta(a_.ints);
    falsified_.clear();
    std::fill(falsified_pos_.begin(), falsified_pos_.end(), kNotFalsified);
    falsified_bool_ = falsified_int_ = 0;
    cost_ = 0;
    for (std::uint32_t c = 0; c < f_.clauses.size(); ++c) refresh_clause(c);
  }

  void reset_weights() {
    for (auto& c : clauses_) c.weight = 1;
    recompute_cost();
  }

  void set_weight(std::uint32_t c, Int w) {
    if (w < 1) throw std::invalid_argument("clause weight must be positive");
    clauses_[c].weight = w;
    recompute_cost();
  }

  void set_shadow_check(bool on) { shadow_check_ = on; }

  const Formula& formula() const { return f_; }
  const Assignment& assignment() const { return a_; }
  Int int_value(VarIndex x) const { return a_.ints[x]; }
  bool bool_value(VarIndex p) const { return a_.bools[p]; }
  Int atom_delta(std::uint32_t atom) const { return delta_[atom]; }

  bool literal_is_true(const Literal& l) const {
    if (l.is_bool()) return a_.bools[l.index] == l.positive;
    return literal_holds(f_.atoms[l.index].relation, l.positive, delta_[l.index]);
  }

  LiteralState literal_state(const Literal& l) const {
    if (l.is_bool()) {
      bool t = a_.bools[l.index] == l.positive;
      return {0, t, t ? 0 : 1};
    }
    const auto& atom = f_.atoms[l.index];
    Int d = delta_[l.index];
    return {d, literal_holds(atom.relation, l.positive, d),
            distance_to_truth(atom.relation, l.positive, d)};
  }

  const ClauseState& clause_state(std::uint32_t c) const { return clauses_[c]; }
  bool is_falsified(std::uint32_t c) const { return falsified_pos_[c] != kNotFalsified; }
  const std::vector<std::uint32_t>& falsified() const { return falsified_; }
  std::uint32_t falsified_with_bool() const { return falsified_bool_; }
  std::uint32_t falsified_with_int() const { return falsified_int_; }
  Int cost() const { return cost_; }
  std::uint64_t steps() const { return steps_; }
  Rng& rng() { return rng_; }

  /// (Boolean, integer) literal occurrences over all falsified clauses.
  std::pair<std::uint64_t, std::uint64_t> falsified_literal_counts() const {
    std::uint64_t nb = 0, ni = 0;
    for (auto c : falsified_) {
      nb += f_.clauses[c].n_bool;
      ni += f_.clauses[c].n_int;
    }
    return {nb, ni};
  }

  /// Executes op, re-evaluating only atoms and clauses that mention its
  /// variable. Counts as one step.
  UndoToken apply(const Operation& op) {
    UndoToken tok{op.kind, op.var, op.is_flip() ? 0 : a_.ints[op.var]};
    if (op.is_flip()) {
      a_.bools[op.var] = !a_.bools[op.var];
      ++stamp_;
      touched_.clear();
      for (auto c : f_.occ.bool_var_clauses[op.var]) touch(c);
    } else {
      assign_int(op.var, op.value);
    }
    for (auto c : touched_) refresh_clause(c);
    ++steps_;
    if (shadow_check_) {
      if (auto msg = verify(); !msg.empty()) throw std::logic_error("shadow check: " + msg);
    }
    return tok;
  }

  void undo(const UndoToken& tok) {
    if (tok.kind == OpKind::Flip) {
      a_.bools[tok.var] = !a_.bools[tok.var];
      ++stamp_;
      touched_.clear();
      for (auto c : f_.occ.bool_var_clauses[tok.var]) touch(c);
    } else {
      assign_int(tok.var, tok.previous);
    }
    for (auto c : touched_) refresh_clause(c);
    if (steps_ > 0) --steps_;
  }

  /// score and dscore of op without changing the state.
  OperationEffect evaluate(const Operation& op) const {
    ++stamp_;
    touched_.clear();
    if (op.is_flip()) {
      for (auto c : f_.occ.bool_var_clauses[op.var]) touch(c);
    } else {
      compute_new_deltas(op.var, op.value);
    }
    OperationEffect eff;
    for (auto c : touched_) {
      const auto& cs = clauses_[c];
      bool sat_after = false;
      Int dts_after = -1;
      for (const auto& l : f_.clauses[c].literals) {
        bool t;
        Int d;
        if (l.is_bool()) {
          bool v = a_.bools[l.index];
          if (op.is_flip() && l.index == op.var) v = !v;
          t = v == l.positive;
          d = t ? 0 : 1;
        } else {
          Int delta = atom_stamp_[l.index] == stamp_ ? scratch_delta_[l.index] : delta_[l.index];
          const auto rel = f_.atoms[l.index].relation;
          t = literal_holds(rel, l.positive, delta);
          d = distance_to_truth(rel, l.positive, delta);
        }
        sat_after = sat_after || t;
        if (dts_after < 0 || d < dts_after) dts_after = d;
      }
      bool sat_before = cs.sat_count > 0;
      if (sat_before && !sat_after) eff.score = checked::sub(eff.score, cs.weight);
      if (!sat_before && sat_after) eff.score = checked::add(eff.score, cs.weight);
      eff.dscore = checked::add(eff.dscore, checked::mul(checked::sub(cs.dts, dts_after), cs.weight));
    }
    return eff;
  }

  Int score(const Operation& op) const { return evaluate(op).score; }
  Int dscore(const Operation& op) const { return evaluate(op).dscore; }

  /// Probabilistic PAWS: with probability 1-sp bump every falsified clause,
  /// otherwise decay every satisfied clause heavier than 1.
  PawsBranch update_weights_paws(double sp) {
    if (rng_.unit() < sp) {
      for (std::uint32_t c = 0; c < clauses_.size(); ++c) {
        if (!is_falsified(c) && clauses_[c].weight > 1) --clauses_[c].weight;
      }
      return PawsBranch::Smoothed;
    }
    for (auto c : falsified_) {
      clauses_[c].weight = checked::add(clauses_[c].weight, 1);
      cost_ = checked::add(cost_, 1);
    }
    return PawsBranch::Increased;
  }

  /// Compares every cache with a from-scratch recomputation. Returns an
  /// empty string when consistent.
  std::string verify() const {
    std::ostringstream err;
    for (std::size_t i = 0; i < f_.atoms.size(); ++i) {
      Int d = f_.atoms[i].delta(a_.ints);
      if (d != delta_[i]) {
        err << "atom " << i << " delta " << delta_[i] << " != " << d;
        return err.str();
      }
    }
    Int cost = 0;
    std::uint32_t nb = 0, ni = 0, nf = 0;
    for (std::uint32_t c = 0; c < f_.clauses.size(); ++c) {
      const auto& clause = f_.clauses[c];
      std::uint32_t sat = 0;
      for (const auto& l : clause.literals) sat += literal_true(f_, l, a_) ? 1 : 0;
      Int dts = compute_dts(f_, clause, a_);
      const auto& cs = clauses_[c];
      if (sat != cs.sat_count || dts != cs.dts) {
        err << "clause " << c << " sat_count/dts " << cs.sat_count << "/" << cs.dts
            << " != " << sat << "/" << dts;
        return err.str();
      }
      if ((sat == 0) != is_falsified(c)) {
        err << "clause " << c << " falsified-set membership wrong";
        return err.str();
      }
      if (cs.weight < 1) {
        err << "clause " << c << " weight below 1";
        return err.str();
      }
      if (sat == 0) {
        ++nf;
        cost += cs.weight;
        if (clause.n_bool) ++nb;
        if (clause.n_int) ++ni;
      }
    }
    if (nf != falsified_.size()) return "falsified set size mismatch";
    if (cost != cost_) {
      err << "cost " << cost_ << " != " << cost;
      return err.str();
    }
    if (nb != falsified_bool_ || ni != falsified_int_) return "falsified kind counters mismatch";
    return {};
  }

 private:
  static constexpr std::uint32_t kNotFalsified = UINT32_MAX;

  void touch(std::uint32_t c) const {
    if (clause_stamp_[c] != stamp_) {
      clause_stamp_[c] = stamp_;
      touched_.push_back(c);
    }
  }

  // New deltas of every atom containing x when x takes value v; results go
  // to scratch_delta_ (stamped) and touched_ collects affected clauses.
  void compute_new_deltas(VarIndex x, Int v) const {
    ++stamp_;
    touched_.clear();
    Int old = a_.ints[x];
    a_.ints[x] = v;
    try {
      for (auto atom : f_.occ.int_var_atoms[x]) {
        scratch_delta_[atom] = f_.atoms[atom].delta(a_.ints);
        atom_stamp_[atom] = stamp_;
        for (auto c : f_.occ.atom_clauses[atom]) touch(c);
      }
    } catch (...) {
      a_.ints[x] = old;
      throw;
    }
    a_.ints[x] = old;
  }

  void assign_int(VarIndex x, Int v) {
    compute_new_deltas(x, v);  // may throw; state untouched in that case
    a_.ints[x] = v;
    for (auto atom : f_.occ.int_var_atoms[x]) delta_[atom] = scratch_delta_[atom];
  }

  void refresh_clause(std::uint32_t c) {
    const auto& clause = f_.clauses[c];
    auto& cs = clauses_[c];
    std::uint32_t sat = 0;
    Int dts = -1;
    for (const auto& l : clause.literals) {
      LiteralState ls = literal_state(l);
      if (ls.is_true) ++sat;
      if (dts < 0 || ls.dtt < dts) dts = ls.dtt;
    }
    cs.sat_count = sat;
    cs.dts = dts < 0 ? 0 : dts;
    bool now_falsified = sat == 0;
    if (now_falsified && !is_falsified(c)) {
      falsified_pos_[c] = static_cast<std::uint32_t>(falsified_.size());
      falsified_.push_back(c);
      cost_ = checked::add(cost_, cs.weight);
      if (clause.n_bool) ++falsified_bool_;
      if (clause.n_int) ++falsified_int_;
    } else if (!now_falsified && is_falsified(c)) {
      auto pos = falsified_pos_[c];
      auto last = falsified_.back();
      falsified_[pos] = last;
      falsified_pos_[last] = pos;
      falsified_.pop_back();
      falsified_pos_[c] = kNotFalsified;
      cost_ -= cs.weight;
      if (clause.n_bool) --falsified_bool_;
      if (clause.n_int) --falsified_int_;
    }
  }

  void recompute_cost() {
    cost_ = 0;
    for (auto c : falsified_) cost_ = checked::add(cost_, clauses_[c].weight);
  }

  const Formula& f_;
  Rng rng_;
  mutable Assignment a_;  // temporarily overridden during evaluate()
  std::vector<Int> delta_;
  std::vector<ClauseState> clauses_;
  std::vector<std::uint32_t> falsified_;
  std::vector<std::uint32_t> falsified_pos_;
  std::uint32_t falsified_bool_ = 0;
  std::uint32_t falsified_int_ = 0;
  Int cost_ = 0;
  std::uint64_t steps_ = 0;
  bool shadow_check_ = false;

  mutable std::uint64_t stamp_ = 0;
  mutable std::vector<std::uint64_t> clause_stamp_;
  mutable std::vector<std::uint64_t> atom_stamp_;
  mutable std::vector<Int> scratch_delta_;
  mutable std::vector<std::uint32_t> touched_;
};

}  // namespace lsia
