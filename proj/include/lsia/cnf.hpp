#pragma once

// Clausal form: arithmetic atoms become normalized theory literals, Boolean
// structure that is not already clausal is Tseitin-encoded with full
// (bidirectional) definitions.

#include <algorithm>
#include <map>
#include <optional>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "lsia/ast.hpp"
#include "lsia/formula.hpp"
#include "lsia/parser.hpp"

namespace lsia {

struct CnfOptions {
  bool gcd_reduce = true;
};

using RationalPolynomial = std::map<Monomial, Rational>;

inline RationalPolynomial expand_term(const AstNode& n) {
  RationalPolynomial out;
  auto accumulate = [&out](const RationalPolynomial& p, bool negate) {
    for (const auto& [m, c] : p) {
      Rational& slot = out[m];
      slot = negate ? slot - c : slot + c;
      if (slot.is_zero()) out.erase(m);
    }
  };
  switch (n.kind) {
    case AstKind::IntConst:
      if (!n.value.is_zero()) out[Monomial()] = n.value;
      break;
    case AstKind::IntVar:
      out[Monomial::variable(n.var)] = Rational(1);
      break;
    case AstKind::Add:
      for (const auto& c : n.children) accumulate(expand_term(*c), false);
      break;
    case AstKind::Sub:
      for (std::size_t i = 0; i < n.children.size(); ++i)
        accumulate(expand_term(*n.children[i]), i > 0);
      break;
    case AstKind::Neg:
      accumulate(expand_term(*n.children[0]), true);
      break;
    case AstKind::Mul: {
      out[Monomial()] = Rational(1);
      for (const auto& c : n.children) {
        RationalPolynomial rhs = expand_term(*c);
        RationalPolynomial prod;
        for (const auto& [m1, c1] : out) {
          for (const auto& [m2, c2] : rhs) {
            Rational& slot = prod[m1 * m2];
            slot = slot + c1 * c2;
          }
        }
        std::erase_if(prod, [](const auto& kv) { return kv.second.is_zero(); });
        out = std::move(prod);
      }
      break;
    }
    default:
      throw Error("expand_term: not an integer term");
  }
  return out;
}

/// Normalized form of a comparison: either a constant truth value or one or
/// two signed atoms (two means a disjunction).
struct NormalizedComparison {
  std::optional<bool> constant;
  std::vector<SignedAtom> disjuncts;
};

inline NormalizedComparison normalize_comparison(CmpOp op, const AstNode& lhs, const AstNode& rhs,
                                                 bool reduce) {
  RationalPolynomial p = expand_term(lhs);
  for (const auto& [m, c] : expand_term(rhs)) {
    Rational& slot = p[m];
    slot = slot - c;
    if (slot.is_zero()) p.erase(m);
  }
  // Clear denominators so every coefficient is integral.
  Int scale = 1;
  for (const auto& [m, c] : p) scale = lcm(scale, c.den);
  Polynomial poly;
  Int k = 0;
  for (const auto& [m, c] : p) {
    Int v = checked::mul(c.num, scale / c.den);
    if (m.is_constant()) {
      k = checked::neg(v);
    } else {
      poly.terms.push_back(Term{v, m});
    }
  }
  NormalizedComparison out;
  if (poly.empty()) {
    // 0 op k
    switch (op) {
      case CmpOp::LT: out.constant = 0 < k; break;
      case CmpOp::LE: out.constant = 0 <= k; break;
      case CmpOp::GT: out.constant = 0 > k; break;
      case CmpOp::GE: out.constant = 0 >= k; break;
      case CmpOp::EQ: out.constant = 0 == k; break;
      case CmpOp::NE: out.constant = 0 != k; break;
    }
    return out;
  }
  out.disjuncts = normalize_atom(poly, op, k, reduce);
  return out;
}

namespace detail {

/// A literal or a truth constant.
using CnfLit = std::variant<bool, Literal>;

inline CnfLit negate(const CnfLit& l) {
  if (const bool* b = std::get_if<bool>(&l)) return !*b;
  return std::get<Literal>(l).negated();
}

class CnfEncoder {
 public:
  CnfEncoder(FormulaBuilder& builder, CnfOptions opts) : b_(builder), opts_(opts) {}

  void assert_top(const AstPtr& n, bool positive) {
    switch (n->kind) {
      case AstKind::BoolConst:
        if (n->bool_value != positive) b_.add_clause({});
        return;
      case AstKind::Not:
        assert_top(n->children[0], !positive);
        return;
      case AstKind::And:
        if (positive) {
          for (const auto& c : n->children) assert_top(c, true);
          return;
        }
        break;
      case AstKind::Or:
        if (!positive) {
          for (const auto& c : n->children) assert_top(c, false);
          return;
        }
        break;
      case AstKind::Implies:
        if (!positive) {
          assert_top(n->children[0], true);
          assert_top(n->children[1], false);
          return;
        }
        break;
      case AstKind::Iff: {
        CnfLit a = encode(n->children[0]);
        CnfLit c = encode(n->children[1]);
        if (!positive) c = negate(c);
        emit({negate(a), c});
        emit({a, negate(c)});
        return;
      }
      case AstKind::Distinct:
        if (positive) {
          for_each_pair(*n, [&](const AstNode& x, const AstNode& y) {
            auto nc = normalize_comparison(CmpOp::NE, x, y, opts_.gcd_reduce);
            emit(literals_of(nc));
          });
          return;
        }
        break;
      case AstKind::Cmp: {
        auto nc = comparison(*n);
        if (!positive && nc.disjuncts.size() == 2) {
          // not (a or b): both negations hold
          for (const auto& sa : nc.disjuncts) emit({CnfLit(b_.literal(sa).negated())});
          return;
        }
        break;
      }
      default:
        break;
    }
    std::vector<CnfLit> clause;
    collect_disjuncts(n, positive, clause);
    emit(std::move(clause));
  }

  CnfLit encode(const AstPtr& n) {
    if (auto it = cache_.find(n.get()); it != cache_.end()) return it->second;
    CnfLit result = encode_uncached(n);
    cache_.emplace(n.get(), result);
    return result;
  }

 private:
  template <typename F>
  static void for_each_pair(const AstNode& n, F&& f) {
    for (std::size_t i = 0; i < n.children.size(); ++i)
      for (std::size_t j = i + 1; j < n.children.size(); ++j) f(*n.children[i], *n.children[j]);
  }

  NormalizedComparison comparison(const AstNode& n) {
    return normalize_comparison(n.cmp, *n.children[0], *n.children[1], opts_.gcd_reduce);
  }

  std::vector<CnfLit> literals_of(const NormalizedComparison& nc) {
    if (nc.constant) return {CnfLit(*nc.constant)};
    std::vector<CnfLit> out;
    for (const auto& sa : nc.disjuncts) out.emplace_back(b_.literal(sa));
    return out;
  }

  void collect_disjuncts(const AstPtr& n, bool positive, std::vector<CnfLit>& out) {
    switch (n->kind) {
      case AstKind::Not:
        collect_disjuncts(n->children[0], !positive, out);
        return;
      case AstKind::Or:
        if (positive) {
          for (const auto& c : n->children) collect_disjuncts(c, true, out);
          return;
        }
        break;
      case AstKind::And:
        if (!positive) {
          for (const auto& c : n->children) collect_disjuncts(c, false, out);
          return;
        }
        break;
      case AstKind::Implies:
        if (positive) {
          collect_disjuncts(n->children[0], false, out);
          collect_disjuncts(n->children[1], true, out);
          return;
        }
        break;
      case AstKind::Cmp:
        if (positive) {
          auto lits = literals_of(comparison(*n));
          out.insert(out.end(), lits.begin(), lits.end());
          return;
        }
        break;
      case AstKind::Distinct:
        if (n->children.size() == 2) {
          auto nc = normalize_comparison(positive ? CmpOp::NE : CmpOp::EQ, *n->children[0],
                                         *n->children[1], opts_.gcd_reduce);
          auto lits = literals_of(nc);
          out.insert(out.end(), lits.begin(), lits.end());
          return;
        }
        break;
      default:
        break;
    }
    CnfLit l = encode(n);
    out.push_back(positive ? l : negate(l));
  }

  void emit(std::vector<CnfLit> lits) {
    std::vector<Literal> clause;
    for (const auto& l : lits) {
      if (const bool* b = std::get_if<bool>(&l)) {
        if (*b) return;  // satisfied
        continue;
      }
      clause.push_back(std::get<Literal>(l));
    }
    b_.add_clause(std::move(clause));
  }

  CnfLit define_or(std::vector<CnfLit> parts) {
    std::vector<Literal> lits;
    for (const auto& p : parts) {
      if (const bool* b = std::get_if<bool>(&p)) {
        if (*b) return true;
        continue;
      }
      lits.push_back(std::get<Literal>(p));
    }
    if (lits.empty()) return false;
    if (lits.size() == 1) return lits[0];
    Literal v = FormulaBuilder::bool_literal(b_.fresh_aux());
    std::vector<Literal> big{v.negated()};
    for (const auto& l : lits) {
      big.push_back(l);
      b_.add_clause({v, l.negated()});
    }
    b_.add_clause(std::move(big));
    return v;
  }

  CnfLit define_and(std::vector<CnfLit> parts) {
    for (auto& p : parts) p = negate(p);
    return negate(define_or(std::move(parts)));
  }

  CnfLit encode_uncached(const AstPtr& n) {
    switch (n->kind) {
      case AstKind::BoolConst:
        return n->bool_value;
      case AstKind::BoolVar:
        return FormulaBuilder::bool_literal(n->var);
      case AstKind::Not:
        return negate(encode(n->children[0]));
      case AstKind::Cmp: {
        auto lits = literals_of(comparison(*n));
        return lits.size() == 1 ? lits[0] : define_or(std::move(lits));
      }
      case AstKind::Or:
      case AstKind::And: {
        std::vector<CnfLit> parts;
        for (const auto& c : n->children) parts.push_back(encode(c));
        return n->kind == AstKind::Or ? define_or(std::move(parts)) : define_and(std::move(parts));
      }
      case AstKind::Implies:
        return define_or({negate(encode(n->children[0])), encode(n->children[1])});
      case AstKind::Iff: {
        CnfLit a = encode(n->children[0]);
        CnfLit c = encode(n->children[1]);
        if (const bool* b = std::get_if<bool>(&a)) return *b ? c : negate(c);
        if (const bool* b = std::get_if<bool>(&c)) return *b ? a : negate(a);
        Literal la = std::get<Literal>(a);
        Literal lc = std::get<Literal>(c);
        if (la == lc) return true;
        if (la == lc.negated()) return false;
        Literal v = FormulaBuilder::bool_literal(b_.fresh_aux());
        b_.add_clause({v.negated(), la.negated(), lc});
        b_.add_clause({v.negated(), la, lc.negated()});
        b_.add_clause({v, la, lc});
        b_.add_clause({v, la.negated(), lc.negated()});
        return v;
      }
      case AstKind::Distinct: {
        std::vector<CnfLit> parts;
        for_each_pair(*n, [&](const AstNode& x, const AstNode& y) {
          auto lits = literals_of(normalize_comparison(CmpOp::NE, x, y, opts_.gcd_reduce));
          parts.push_back(lits.size() == 1 ? lits[0] : define_or(std::move(lits)));
        });
        return define_and(std::move(parts));
      }
      default:
        throw Error("encode: integer term in Boolean position");
    }
  }

  FormulaBuilder& b_;
  CnfOptions opts_;
  std::map<const AstNode*, CnfLit> cache_;
};

}  // namespace detail

/// Clausal form of a parsed script. Bounds are left empty; see detect_bounds.
inline Formula to_cnf(const Script& script, CnfOptions opts = {}) {
  FormulaBuilder b;
  for (const auto& n : script.bool_names) b.add_bool_var(n);
  for (const auto& n : script.int_names) b.add_int_var(n);
  detail::CnfEncoder enc(b, opts);
  enc.assert_top(script.assertion, true);
  b.set_original_ast(script.assertion);
  return b.build();
}

/// Reads variable bounds off unit clauses over a single linear term. The
/// tightest bound wins; an empty range sets contradictory_bounds.
inline const std::vector<Bound>& detect_bounds(Formula& f) {
  f.bounds.assign(f.n_int(), Bound{});
  f.contradictory_bounds = false;
  auto tighten_lb = [](Bound& b, Int v) { b.lb = b.lb ? std::max(*b.lb, v) : v; };
  auto tighten_ub = [](Bound& b, Int v) { b.ub = b.ub ? std::min(*b.ub, v) : v; };
  for (const auto& c : f.clauses) {
    if (c.literals.size() != 1 || !c.literals[0].is_arith()) continue;
    const Literal& l = c.literals[0];
    const auto& atom = f.atoms[l.index];
    if (atom.lhs.terms.size() != 1 || !atom.lhs.terms[0].mono.is_linear()) continue;
    Int a = atom.lhs.terms[0].coeff;
    VarIndex x = atom.lhs.terms[0].mono.factors()[0].var;
    Bound& b = f.bounds[x];
    if (atom.relation == Relation::LE) {
      // positive: a*x <= k ; negative: a*x >= k + 1
      Int k = l.positive ? atom.rhs : checked::add(atom.rhs, 1);
      bool upper = (a > 0) == l.positive;
      if (upper) {
        tighten_ub(b, floor_div(k, a));
      } else {
        tighten_lb(b, ceil_div(k, a));
      }
    } else if (l.positive) {
      if (atom.rhs % a != 0) {
        f.contradictory_bounds = true;
        continue;
      }
      tighten_lb(b, atom.rhs / a);
      tighten_ub(b, atom.rhs / a);
    }
  }
  for (const auto& b : f.bounds) {
    if (b.lb && b.ub && *b.lb > *b.ub) f.contradictory_bounds = true;
  }
  return f.bounds;
}

/// Parse, clausify and detect bounds in one go.
inline Formula load_formula(std::string_view text, CnfOptions opts = {}) {
  Formula f = to_cnf(parse_script(text), opts);
  detect_bounds(f);
  return f;
}

}  // namespace lsia
