#pragma once

// Candidate operations: Boolean flips and critical moves. A critical move
// assigns an integer variable the threshold value that makes a false
// arithmetic literal true. All root analysis is exact integer arithmetic.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <unordered_set>
#include <vector>

#include "lsia/formula.hpp"
#include "lsia/integer.hpp"
#include "lsia/state.hpp"
#include "lsia/tabu.hpp"

namespace lsia {

inline Operation flip_op(VarIndex p) { return Operation::flip(p); }

// ---------------------------------------------------------------------------
// Linear critical move

/// Critical move of x for a false linear literal. Empty when x has no linear
/// coefficient, when an equality is not divisible, or on overflow. A negated
/// equality yields the pair x+1, x-1.
inline std::vector<Operation> cm_lia(const SearchState& s, VarIndex x, const Literal& l) {
  std::vector<Operation> out;
  if (!l.is_arith() || s.literal_is_true(l)) return out;
  const auto& atom = s.formula().atoms[l.index];
  Int a = atom.lhs.linear_coefficient(x);
  if (a == 0) return out;
  Int delta = s.atom_delta(l.index);
  Int cur = s.int_value(x);
  try {
    if (atom.relation == Relation::LE) {
      if (l.positive) {
        // delta > 0: shrink a*x by at least delta
        Int step = ceil_div(delta, checked::abs(a));
        out.push_back(Operation::move(x, a > 0 ? checked::sub(cur, step) : checked::add(cur, step), l));
      } else {
        // delta <= 0: grow a*x by at least 1 - delta
        Int step = ceil_div(checked::sub(1, delta), checked::abs(a));
        out.push_back(Operation::move(x, a > 0 ? checked::add(cur, step) : checked::sub(cur, step), l));
      }
    } else if (l.positive) {
      if (delta % a == 0) out.push_back(Operation::move(x, checked::sub(cur, delta / a), l));
    } else {
      out.push_back(Operation::move(x, checked::add(cur, 1), l));
      out.push_back(Operation::move(x, checked::sub(cur, 1), l));
    }
  } catch (const NumericOverflow&) {
    out.clear();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Univariate substitution and exact roots

/// c2*x^2 + c1*x + c0
struct Univariate {
  Int c0 = 0;
  Int c1 = 0;
  Int c2 = 0;

  int degree() const { return c2 != 0 ? 2 : c1 != 0 ? 1 : 0; }
  Int at(Int x) const {
    return checked::add(checked::add(checked::mul(c2, checked::mul(x, x)), checked::mul(c1, x)), c0);
  }
  friend bool operator==(const Univariate&, const Univariate&) = default;
};

enum class SubstitutionKind : std::uint8_t { Polynomial, Constant, DegreeTooHigh };

struct Substitution {
  SubstitutionKind kind = SubstitutionKind::Constant;
  Univariate poly;  // lhs - rhs as a function of x
};

/// Fixes every variable but x at its assigned value. Throws NumericOverflow.
inline Substitution substitute(const AtomicConstraint& atom, VarIndex x,
                               std::span<const Int> values) {
  Substitution out;
  if (atom.lhs.degree_of(x) > 2) {
    out.kind = SubstitutionKind::DegreeTooHigh;
    return out;
  }
  Int c[3] = {checked::neg(atom.rhs), 0, 0};
  for (const auto& t : atom.lhs.terms) {
    Int coeff = t.coeff;
    std::uint32_t e = 0;
    for (const auto& f : t.mono.factors()) {
      if (f.var == x) {
        e = f.exponent;
      } else {
        coeff = checked::mul(coeff, checked::pow(values[f.var], f.exponent));
      }
    }
    c[e] = checked::add(c[e], coeff);
  }
  out.poly = Univariate{c[0], c[1], c[2]};
  out.kind = out.poly.degree() == 0 ? SubstitutionKind::Constant : SubstitutionKind::Polynomial;
  return out;
}

inline Substitution substitute(const SearchState& s, const Literal& l, VarIndex x) {
  return substitute(s.formula().atoms[l.index], x, s.assignment().ints);
}

/// A real root known through its integer neighbours.
struct Root {
  Int floor = 0;
  Int ceil = 0;
  bool is_integer = false;
  friend bool operator==(const Root&, const Root&) = default;
};

/// Distinct real roots in increasing order and the sign of the polynomial
/// on each open interval between them (signs.size() == roots.size() + 1).
struct RootProfile {
  std::vector<Root> roots;
  std::vector<int> signs;
};

namespace detail {

// floor and ceil of (p + q*sqrt(d)) / m for m > 0, q in {-1, +1}, d >= 0.
inline Root quadratic_root(Int p, int q, Int d, Int m) {
  Int r = isqrt(d);
  if (checked::mul(r, r) == d) {
    Int n = q > 0 ? checked::add(p, r) : checked::sub(p, r);
    return {floor_div(n, m), ceil_div(n, m), n % m == 0};
  }
  // sqrt(d) lies strictly inside (r, r+1), so the numerator lies strictly
  // inside (lo, lo+1) and the quotient is irrational.
  Int lo = q > 0 ? checked::add(p, r) : checked::sub(checked::sub(p, r), 1);
  Int f = floor_div(lo, m);
  return {f, checked::add(f, 1), false};
}

inline Root exact_ratio(Int num, Int den) {
  return {floor_div(num, den), ceil_div(num, den), num % den == 0};
}

}  // namespace detail

/// Roots and interval signs of a polynomial of degree 1 or 2.
inline RootProfile analyze_roots(const Univariate& p) {
  RootProfile out;
  if (p.degree() == 0) {
    out.signs = {sign(p.c0)};
    return out;
  }
  if (p.degree() == 1) {
    out.roots = {detail::exact_ratio(checked::neg(p.c0), p.c1)};
    out.signs = {-sign(p.c1), sign(p.c1)};
    return out;
  }
  int lead = sign(p.c2);
  Int disc = checked::sub(checked::mul(p.c1, p.c1), checked::mul(4, checked::mul(p.c2, p.c0)));
  if (disc < 0) {
    out.signs = {lead};
    return out;
  }
  // roots = (num_base +- sqrt(disc)) / m with m > 0
  Int m = checked::abs(checked::mul(2, p.c2));
  Int num_base = p.c2 > 0 ? checked::neg(p.c1) : p.c1;
  if (disc == 0) {
    out.roots = {detail::exact_ratio(num_base, m)};
    out.signs = {lead, lead};
    return out;
  }
  out.roots = {detail::quadratic_root(num_base, -1, disc, m),
               detail::quadratic_root(num_base, +1, disc, m)};
  out.signs = {lead, -lead, lead};
  return out;
}

// ---------------------------------------------------------------------------
// Polynomial critical move

/// Critical moves of x for a false polynomial literal. Variables of degree
/// above two contribute nothing. Every returned move makes the literal true.
inline std::vector<Operation> cm_nia(const SearchState& s, VarIndex x, const Literal& l) {
  std::vector<Operation> out;
  if (!l.is_arith() || s.literal_is_true(l)) return out;
  const auto& atom = s.formula().atoms[l.index];
  Int cur = s.int_value(x);
  try {
    Substitution sub = substitute(s, l, x);
    if (sub.kind != SubstitutionKind::Polynomial) return out;
    std::vector<Int> values;
    if (atom.relation == Relation::EQ && !l.positive) {
      values = {checked::add(cur, 1), checked::sub(cur, 1)};
    } else {
      RootProfile prof = analyze_roots(sub.poly);
      const auto n = prof.roots.size();
      if (atom.relation == Relation::EQ) {
        for (const auto& r : prof.roots)
          if (r.is_integer) values.push_back(r.floor);
      } else {
        for (std::size_t j = 0; j <= n; ++j) {
          const Root* left = j > 0 ? &prof.roots[j - 1] : nullptr;
          const Root* right = j < n ? &prof.roots[j] : nullptr;
          std::optional<Int> lo, hi;
          if (l.positive && prof.signs[j] < 0) {
            // closed interval [left, right]
            if (left) lo = left->ceil;
            if (right) hi = right->floor;
          } else if (!l.positive && prof.signs[j] > 0) {
            // open interval (left, right)
            if (left) lo = checked::add(left->floor, 1);
            if (right) hi = checked::sub(right->ceil, 1);
          } else {
            continue;
          }
          if (lo && hi && *lo > *hi) continue;
          if (lo) values.push_back(*lo);
          if (hi) values.push_back(*hi);
        }
        // A double root of an upward parabola is the only point where it is <= 0.
        if (l.positive && n == 1 && prof.signs.size() == 2 && prof.signs[0] > 0 &&
            prof.signs[1] > 0 && prof.roots[0].is_integer)
          values.push_back(prof.roots[0].floor);
      }
    }
    for (Int v : values) {
      if (v == cur) continue;
      if (!literal_holds(atom.relation, l.positive, sub.poly.at(v))) continue;
      if (std::none_of(out.begin(), out.end(), [&](const Operation& o) { return o.value == v; }))
        out.push_back(Operation::move(x, v, l));
    }
  } catch (const NumericOverflow&) {
    out.clear();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Unit moves for stalled literals

/// x <- x+1 or x-1, preferring a direction that strictly reduces |delta| (for
/// equalities) or the distance to truth (otherwise); random when neither does.
inline std::optional<Operation> unit_move(const SearchState& s, const Literal& l, VarIndex x,
                                          Rng& rng) {
  const auto& atom = s.formula().atoms[l.index];
  auto distance = [&](Int delta) {
    if (atom.relation == Relation::EQ && l.positive) return checked::abs(delta);
    return distance_to_truth(atom.relation, l.positive, delta);
  };
  Int cur = s.int_value(x);
  Int now = distance(s.atom_delta(l.index));
  std::optional<Int> best_val;
  Int best_dist = now;
  std::vector<Int> tied;
  for (int dir : {+1, -1}) {
    try {
      Int v = checked::add(cur, dir);
      auto values = s.assignment().ints;
      values[x] = v;
      Int d = distance(atom.delta(values));
      if (d < best_dist) {
        best_dist = d;
        tied = {v};
      } else if (d == best_dist && d < now) {
        tied.push_back(v);
      }
    } catch (const NumericOverflow&) {
    }
  }
  if (!tied.empty()) return Operation::move(x, tied[rng.below(tied.size())], l);
  try {
    Int v = rng.below(2) == 0 ? checked::add(cur, 1) : checked::sub(cur, 1);
    return Operation::move(x, v, l);
  } catch (const NumericOverflow&) {
    return std::nullopt;
  }
}

/// Random variable of a stalled equality moved by one toward |delta| = 0.
inline std::optional<Operation> equality_fallback(const SearchState& s, const Literal& l,
                                                  Rng& rng) {
  const auto& vars = s.formula().occ.atom_vars[l.index];
  if (vars.empty()) return std::nullopt;
  return unit_move(s, l, vars[rng.below(vars.size())], rng);
}

// ---------------------------------------------------------------------------
// Move generation per literal and candidate pools

enum class MoveKind : std::uint8_t { Critical, FixedIncrement };

struct MoveConfig {
  MoveKind kind = MoveKind::Critical;
  Int increment = 1;  // FixedIncrement only
};

/// All moves for a false arithmetic literal under the configured operator.
inline void literal_moves(const SearchState& s, const Literal& l, const MoveConfig& cfg, Rng& rng,
                          std::vector<Operation>& out) {
  const auto& f = s.formula();
  const auto& vars = f.occ.atom_vars[l.index];
  if (cfg.kind == MoveKind::FixedIncrement) {
    for (auto x : vars) {
      try {
        out.push_back(Operation::move(x, checked::add(s.int_value(x), cfg.increment), l));
        out.push_back(Operation::move(x, checked::sub(s.int_value(x), cfg.increment), l));
      } catch (const NumericOverflow&) {
      }
    }
    return;
  }
  std::size_t before = out.size();
  for (auto x : vars) {
    auto ops = f.theory == Theory::LIA ? cm_lia(s, x, l) : cm_nia(s, x, l);
    out.insert(out.end(), ops.begin(), ops.end());
  }
  const auto& atom = f.atoms[l.index];
  if (out.size() == before && atom.relation == Relation::EQ && l.positive) {
    if (auto op = equality_fallback(s, l, rng)) out.push_back(*op);
  }
}

/// S: moves from false literals in falsified clauses. The rest of D: moves
/// from false literals that occur in no falsified clause.
struct CandidatePools {
  std::vector<Operation> focused;
  std::vector<Operation> others;
};

namespace detail {

struct MoveKey {
  VarIndex var;
  Int value;
  friend bool operator==(const MoveKey&, const MoveKey&) = default;
};

struct MoveKeyHash {
  std::size_t operator()(const MoveKey& k) const {
    return std::hash<Int>{}(k.value) * 1000003u ^ k.var;
  }
};

using MoveSet = std::unordered_set<MoveKey, MoveKeyHash>;

inline void add_unique(std::vector<Operation>& pool, MoveSet& seen, const Operation& op) {
  if (seen.insert(MoveKey{op.var, op.value}).second) pool.push_back(op);
}

}  // namespace detail

/// Builds S (and, when with_others is set, D minus S), dropping tabu moves.
class PoolBuilder {
 public:
  explicit PoolBuilder(const Formula& f) : lit_stamp_(f.atoms.size() * 2, 0) {}

  CandidatePools build(const SearchState& s, const MoveConfig& cfg, const TabuTable* tabu,
                       Rng& rng, bool with_others = true) {
    CandidatePools pools;
    pools.focused = focused(s, cfg, tabu, rng);
    if (with_others) pools.others = others(s, cfg, tabu, rng);
    return pools;
  }

  std::vector<Operation> focused(const SearchState& s, const MoveConfig& cfg,
                                 const TabuTable* tabu, Rng& rng) {
    ++stamp_;
    seen_focused_.clear();
    std::vector<Operation> pool;
    const auto& f = s.formula();
    for (auto c : s.falsified()) {
      for (const auto& l : f.clauses[c].literals) {
        if (!l.is_arith() || !mark(l)) continue;
        collect(s, l, cfg, tabu, rng, pool, seen_focused_);
      }
    }
    focused_stamp_ = stamp_;
    return pool;
  }

  /// Must follow focused() on the same state.
  std::vector<Operation> others(const SearchState& s, const MoveConfig& cfg,
                                const TabuTable* tabu, Rng& rng) {
    std::vector<Operation> pool;
    if (focused_stamp_ != stamp_) return pool;
    detail::MoveSet seen = seen_focused_;
    const auto& f = s.formula();
    for (std::uint32_t c = 0; c < f.clauses.size(); ++c) {
      if (s.is_falsified(c)) continue;
      for (const auto& l : f.clauses[c].literals) {
        if (!l.is_arith() || s.literal_is_true(l) || !mark(l)) continue;
        collect(s, l, cfg, tabu, rng, pool, seen);
      }
    }
    return pool;
  }

 private:
  // True the first time a literal is seen in the current round.
  bool mark(const Literal& l) {
    auto& slot = lit_stamp_[l.index * 2 + (l.positive ? 1 : 0)];
    if (slot == stamp_) return false;
    slot = stamp_;
    return true;
  }

  void collect(const SearchState& s, const Literal& l, const MoveConfig& cfg, const TabuTable* tabu,
               Rng& rng, std::vector<Operation>& pool, detail::MoveSet& seen) {
    scratch_.clear();
    literal_moves(s, l, cfg, rng, scratch_);
    std::uint64_t next_step = s.steps() + 1;
    for (const auto& op : scratch_) {
      if (op.value == s.int_value(op.var)) continue;
      if (tabu && tabu->forbidden(op, s.int_value(op.var), next_step)) continue;
      detail::add_unique(pool, seen, op);
    }
  }

  std::vector<std::uint64_t> lit_stamp_;
  std::uint64_t stamp_ = 0;
  std::uint64_t focused_stamp_ = UINT64_MAX;
  detail::MoveSet seen_focused_;
  std::vector<Operation> scratch_;
};

/// Convenience form of PoolBuilder for one-off use.
inline CandidatePools build_pools(const SearchState& s, const MoveConfig& cfg = {},
                                  const TabuTable* tabu = nullptr, std::uint64_t seed = 0) {
  Rng rng(seed);
  return PoolBuilder(s.formula()).build(s, cfg, tabu, rng);
}

}  // namespace lsia
