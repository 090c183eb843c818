#pragma once

// Canonical clausal representation of quantifier-free integer arithmetic
// formulas: monomials, polynomials, normalized atoms, literals and clauses.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "lsia/ast.hpp"
#include "lsia/integer.hpp"

namespace lsia {

using VarIndex = std::uint32_t;

struct VarId {
  VarIndex index = 0;
  Sort sort = Sort::Int;
  friend bool operator==(const VarId&, const VarId&) = default;
};

struct Factor {
  VarIndex var = 0;
  std::uint32_t exponent = 1;
  friend bool operator==(const Factor&, const Factor&) = default;
};

/// Product of integer variables. Factors are sorted by variable, no variable
/// repeats, every exponent is at least one. No factors means the constant 1.
class Monomial {
 public:
  Monomial() = default;

  /// Accepts factors in any order with repeated variables and merges them.
  explicit Monomial(std::vector<Factor> raw) : factors_(std::move(raw)) {
    std::sort(factors_.begin(), factors_.end(),
              [](const Factor& a, const Factor& b) { return a.var < b.var; });
    std::vector<Factor> merged;
    for (const auto& f : factors_) {
      if (f.exponent == 0) continue;
      if (!merged.empty() && merged.back().var == f.var) {
        merged.back().exponent += f.exponent;
      } else {
        merged.push_back(f);
      }
    }
    factors_ = std::move(merged);
  }

  static Monomial variable(VarIndex v) { return Monomial({Factor{v, 1}}); }

  const std::vector<Factor>& factors() const { return factors_; }
  bool is_constant() const { return factors_.empty(); }
  bool is_linear() const { return factors_.size() == 1 && factors_[0].exponent == 1; }

  std::uint32_t degree() const {
    std::uint32_t d = 0;
    for (const auto& f : factors_) d += f.exponent;
    return d;
  }

  std::uint32_t exponent_of(VarIndex v) const {
    for (const auto& f : factors_) {
      if (f.var == v) return f.exponent;
    }
    return 0;
  }

  Monomial operator*(const Monomial& other) const {
    std::vector<Factor> all = factors_;
    all.insert(all.end(), other.factors_.begin(), other.factors_.end());
    return Monomial(std::move(all));
  }

  Int evaluate(std::span<const Int> values) const {
    Int r = 1;
    for (const auto& f : factors_) r = checked::mul(r, checked::pow(values[f.var], f.exponent));
    return r;
  }

  friend bool operator==(const Monomial&, const Monomial&) = default;

  // Graded lexicographic: total degree first, then factor lists.
  friend bool operator<(const Monomial& a, const Monomial& b) {
    auto da = a.degree();
    auto db = b.degree();
    if (da != db) return da < db;
    return std::lexicographical_compare(
        a.factors_.begin(), a.factors_.end(), b.factors_.begin(), b.factors_.end(),
        [](const Factor& x, const Factor& y) {
          if (x.var != y.var) return x.var < y.var;
          return x.exponent > y.exponent;
        });
  }

 private:
  std::vector<Factor> factors_;
};

struct Term {
  Int coeff = 0;
  Monomial mono;
  friend bool operator==(const Term&, const Term&) = default;
};

/// Sum of terms with nonzero coefficients, distinct monomials, sorted by the
/// graded-lex order. May contain the constant monomial only before atoms are
/// formed (normalize_polynomial strips it).
struct Polynomial {
  std::vector<Term> terms;

  bool empty() const { return terms.empty(); }
  bool is_linear() const {
    return std::all_of(terms.begin(), terms.end(),
                       [](const Term& t) { return t.mono.is_linear(); });
  }

  Int evaluate(std::span<const Int> values) const {
    Int s = 0;
    for (const auto& t : terms) s = checked::add(s, checked::mul(t.coeff, t.mono.evaluate(values)));
    return s;
  }

  /// Coefficient of the linear monomial `v` (0 when absent).
  Int linear_coefficient(VarIndex v) const {
    for (const auto& t : terms) {
      if (t.mono.is_linear() && t.mono.factors()[0].var == v) return t.coeff;
    }
    return 0;
  }

  std::uint32_t degree_of(VarIndex v) const {
    std::uint32_t d = 0;
    for (const auto& t : terms) d = std::max(d, t.mono.exponent_of(v));
    return d;
  }

  std::vector<VarIndex> variables() const {
    std::vector<VarIndex> vs;
    for (const auto& t : terms)
      for (const auto& f : t.mono.factors()) vs.push_back(f.var);
    std::sort(vs.begin(), vs.end());
    vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
    return vs;
  }

  friend bool operator==(const Polynomial&, const Polynomial&) = default;
};

struct RawTerm {
  Int coeff = 0;
  std::vector<Factor> factors;  // unsorted, repeats allowed
};

struct NormalizedPolynomial {
  Polynomial poly;  // constant-free
  Int offset = 0;   // the folded constant part
};

inline NormalizedPolynomial normalize_polynomial(std::span<const RawTerm> raw) {
  std::map<Monomial, Int> acc;
  for (const auto& rt : raw) {
    if (rt.coeff == 0) continue;
    Monomial m(rt.factors);
    auto [it, inserted] = acc.emplace(std::move(m), rt.coeff);
    if (!inserted) it->second = checked::add(it->second, rt.coeff);
  }
  NormalizedPolynomial out;
  for (auto& [m, c] : acc) {
    if (c == 0) continue;
    if (m.is_constant()) {
      out.offset = c;
    } else {
      out.poly.terms.push_back(Term{c, m});
    }
  }
  return out;
}

inline Polynomial negate(const Polynomial& p) {
  Polynomial r = p;
  for (auto& t : r.terms) t.coeff = checked::neg(t.coeff);
  return r;
}

enum class Relation : std::uint8_t { LE, EQ };

/// lhs (relation) rhs with a constant-free lhs.
struct AtomicConstraint {
  Polynomial lhs;
  Relation relation = Relation::LE;
  Int rhs = 0;

  /// lhs(values) - rhs
  Int delta(std::span<const Int> values) const {
    return checked::sub(lhs.evaluate(values), rhs);
  }
  friend bool operator==(const AtomicConstraint&, const AtomicConstraint&) = default;
};

/// Truth of an arithmetic literal given delta = lhs - rhs.
inline bool literal_holds(Relation rel, bool positive, Int delta) {
  if (rel == Relation::LE) return positive ? delta <= 0 : delta >= 1;
  return positive ? delta == 0 : delta != 0;
}

/// Distance to truth of an arithmetic literal given its delta.
inline Int distance_to_truth(Relation rel, bool positive, Int delta) {
  if (rel == Relation::LE) {
    if (positive) return delta > 0 ? delta : 0;
    return delta >= 1 ? 0 : checked::sub(1, delta);
  }
  return literal_holds(rel, positive, delta) ? 0 : 1;
}

struct SignedAtom {
  AtomicConstraint atom;
  bool positive = true;
};

/// Divide out common factors. For LE the constant is floored, which keeps
/// the integer solution set (and therefore that of the negation) unchanged.
inline AtomicConstraint gcd_reduce(AtomicConstraint a) {
  if (a.lhs.empty()) return a;
  Int g = 0;
  for (const auto& t : a.lhs.terms) g = gcd(g, t.coeff);
  if (a.relation == Relation::EQ) g = gcd(g, a.rhs);
  if (g <= 1) return a;
  for (auto& t : a.lhs.terms) t.coeff /= g;
  a.rhs = a.relation == Relation::EQ ? a.rhs / g : floor_div(a.rhs, g);
  return a;
}

/// Rewrites `lhs op k` into LE/EQ atoms. A single entry is a literal; two
/// entries form a disjunction (only for NE).
inline std::vector<SignedAtom> normalize_atom(const Polynomial& lhs, CmpOp op, Int k,
                                              bool reduce = true) {
  auto mk = [&](Polynomial p, Relation rel, Int rhs, bool positive) {
    AtomicConstraint a{std::move(p), rel, rhs};
    return SignedAtom{reduce ? gcd_reduce(std::move(a)) : std::move(a), positive};
  };
  switch (op) {
    case CmpOp::LE:
      return {mk(lhs, Relation::LE, k, true)};
    case CmpOp::LT:
      return {mk(lhs, Relation::LE, checked::sub(k, 1), true)};
    case CmpOp::GT:
      return {mk(lhs, Relation::LE, k, false)};
    case CmpOp::GE:
      return {mk(negate(lhs), Relation::LE, checked::neg(k), true)};
    case CmpOp::EQ:
      return {mk(lhs, Relation::EQ, k, true)};
    case CmpOp::NE:
      return {mk(lhs, Relation::LE, checked::sub(k, 1), true), mk(lhs, Relation::LE, k, false)};
  }
  return {};
}

enum class LiteralKind : std::uint8_t { Bool, Arith };

/// A Boolean variable or an interned atom, with polarity.
struct Literal {
  LiteralKind kind = LiteralKind::Bool;
  std::uint32_t index = 0;  // Boolean variable or atom index
  bool positive = true;

  bool is_bool() const { return kind == LiteralKind::Bool; }
  bool is_arith() const { return kind == LiteralKind::Arith; }
  Literal negated() const { return Literal{kind, index, !positive}; }

  friend bool operator==(const Literal&, const Literal&) = default;
  friend bool operator<(const Literal& a, const Literal& b) {
    return std::tie(a.kind, a.index, a.positive) < std::tie(b.kind, b.index, b.positive);
  }
};

struct Clause {
  std::vector<Literal> literals;
  std::uint32_t n_bool = 0;
  std::uint32_t n_int = 0;
};

enum class Theory : std::uint8_t { LIA, NIA };

inline const char* to_string(Theory t) { return t == Theory::LIA ? "LIA" : "NIA"; }

struct Bound {
  std::optional<Int> lb;
  std::optional<Int> ub;
};

/// Complete assignment over both sorts.
struct Assignment {
  std::vector<bool> bools;
  std::vector<Int> ints;
  friend bool operator==(const Assignment&, const Assignment&) = default;
};

/// Immutable lookup tables used by the search.
struct Occurrences {
  std::vector<std::vector<std::uint32_t>> atom_clauses;   // atom -> clauses
  std::vector<std::vector<VarIndex>> atom_vars;           // atom -> int vars
  std::vector<std::vector<std::uint32_t>> int_var_atoms;  // int var -> atoms
  std::vector<std::vector<std::uint32_t>> bool_var_clauses;
};

struct Formula {
  std::vector<std::string> bool_names;  // originals first, then auxiliaries
  std::vector<std::string> int_names;
  std::size_t n_original_bool = 0;

  std::vector<AtomicConstraint> atoms;
  std::vector<Clause> clauses;

  Theory theory = Theory::LIA;
  std::vector<std::uint32_t> max_degree;  // per int var
  std::vector<Bound> bounds;              // per int var
  bool contradictory_bounds = false;
  bool has_empty_clause = false;
  std::size_t dropped_tautologies = 0;

  AstPtr original_ast;
  Occurrences occ;

  std::size_t n_bool() const { return bool_names.size(); }
  std::size_t n_int() const { return int_names.size(); }
};

inline bool literal_true(const Formula& f, const Literal& l, const Assignment& a) {
  if (l.is_bool()) return a.bools[l.index] == l.positive;
  const auto& atom = f.atoms[l.index];
  return literal_holds(atom.relation, l.positive, atom.delta(a.ints));
}

inline bool clause_satisfied(const Formula& f, const Clause& c, const Assignment& a) {
  return std::any_of(c.literals.begin(), c.literals.end(),
                     [&](const Literal& l) { return literal_true(f, l, a); });
}

inline bool satisfies_clauses(const Formula& f, const Assignment& a) {
  return std::all_of(f.clauses.begin(), f.clauses.end(),
                     [&](const Clause& c) { return clause_satisfied(f, c, a); });
}

/// LIA iff every monomial is a single variable with exponent one. Also fills
/// the per-variable maximum degree.
inline Theory classify_theory(Formula& f) {
  f.max_degree.assign(f.n_int(), 0);
  bool linear = true;
  for (const auto& atom : f.atoms) {
    for (const auto& t : atom.lhs.terms) {
      if (!t.mono.is_linear()) linear = false;
      for (const auto& fac : t.mono.factors())
        f.max_degree[fac.var] = std::max(f.max_degree[fac.var], fac.exponent);
    }
  }
  f.theory = linear ? Theory::LIA : Theory::NIA;
  return f.theory;
}

inline void build_occurrences(Formula& f) {
  Occurrences occ;
  occ.atom_clauses.assign(f.atoms.size(), {});
  occ.atom_vars.assign(f.atoms.size(), {});
  occ.int_var_atoms.assign(f.n_int(), {});
  occ.bool_var_clauses.assign(f.n_bool(), {});
  for (std::uint32_t a = 0; a < f.atoms.size(); ++a) {
    occ.atom_vars[a] = f.atoms[a].lhs.variables();
    for (auto v : occ.atom_vars[a]) occ.int_var_atoms[v].push_back(a);
  }
  for (std::uint32_t c = 0; c < f.clauses.size(); ++c) {
    for (const auto& l : f.clauses[c].literals) {
      auto& list = l.is_bool() ? occ.bool_var_clauses[l.index] : occ.atom_clauses[l.index];
      if (list.empty() || list.back() != c) list.push_back(c);
    }
  }
  f.occ = std::move(occ);
}

/// Incrementally assembles a Formula: declares variables, interns atoms and
/// adds clauses with duplicate and tautology removal.
class FormulaBuilder {
 public:
  VarIndex add_bool_var(std::string name) {
    f_.bool_names.push_back(std::move(name));
    f_.n_original_bool = f_.bool_names.size();
    return static_cast<VarIndex>(f_.bool_names.size() - 1);
  }

  VarIndex add_int_var(std::string name) {
    f_.int_names.push_back(std::move(name));
    return static_cast<VarIndex>(f_.int_names.size() - 1);
  }

  /// Auxiliary Boolean, not part of the original signature.
  VarIndex fresh_aux() {
    f_.bool_names.push_back("!aux" + std::to_string(f_.bool_names.size() - f_.n_original_bool));
    return static_cast<VarIndex>(f_.bool_names.size() - 1);
  }

  std::uint32_t intern(const AtomicConstraint& atom) {
    for (auto idx : buckets_[bucket_key(atom)]) {
      if (f_.atoms[idx] == atom) return idx;
    }
    f_.atoms.push_back(atom);
    auto idx = static_cast<std::uint32_t>(f_.atoms.size() - 1);
    buckets_[bucket_key(atom)].push_back(idx);
    return idx;
  }

  Literal literal(const SignedAtom& sa) {
    return Literal{LiteralKind::Arith, intern(sa.atom), sa.positive};
  }

  static Literal bool_literal(VarIndex v, bool positive = true) {
    return Literal{LiteralKind::Bool, v, positive};
  }

  void add_clause(std::vector<Literal> lits) {
    std::sort(lits.begin(), lits.end());
    lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
    for (std::size_t i = 0; i + 1 < lits.size(); ++i) {
      if (lits[i].kind == lits[i + 1].kind && lits[i].index == lits[i + 1].index) {
        ++f_.dropped_tautologies;
        return;
      }
    }
    if (lits.empty()) {
      f_.has_empty_clause = true;
      return;
    }
    Clause c;
    for (const auto& l : lits) (l.is_bool() ? c.n_bool : c.n_int)++;
    c.literals = std::move(lits);
    f_.clauses.push_back(std::move(c));
  }

  void set_original_ast(AstPtr ast) { f_.original_ast = std::move(ast); }

  Formula build() {
    classify_theory(f_);
    f_.bounds.assign(f_.n_int(), Bound{});
    build_occurrences(f_);
    return std::move(f_);
  }

  Formula& formula() { return f_; }

 private:
  static std::size_t bucket_key(const AtomicConstraint& a) {
    std::size_t h = std::hash<Int>{}(a.rhs) ^ (static_cast<std::size_t>(a.relation) << 1);
    for (const auto& t : a.lhs.terms) {
      h = h * 1000003u ^ std::hash<Int>{}(t.coeff);
      for (const auto& fac : t.mono.factors()) h = h * 31u + fac.var * 7u + fac.exponent;
    }
    return h;
  }

  Formula f_;
  std::map<std::size_t, std::vector<std::uint32_t>> buckets_;
};

}  // namespace lsia
