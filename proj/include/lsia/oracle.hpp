#pragma once

// Ground truth for validation and differential testing: direct evaluation of
// the original assertion tree and exhaustive enumeration over a box.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "lsia/ast.hpp"
#include "lsia/formula.hpp"

namespace lsia {

inline Rational eval_term(const AstNode& n, const Assignment& m) {
  switch (n.kind) {
    case AstKind::IntConst:
      return n.value;
    case AstKind::IntVar:
      return Rational(m.ints.at(n.var));
    case AstKind::Add: {
      Rational s;
      for (const auto& c : n.children) s = s + eval_term(*c, m);
      return s;
    }
    case AstKind::Sub: {
      Rational s = eval_term(*n.children[0], m);
      for (std::size_t i = 1; i < n.children.size(); ++i) s = s - eval_term(*n.children[i], m);
      return s;
    }
    case AstKind::Neg:
      return -eval_term(*n.children[0], m);
    case AstKind::Mul: {
      Rational p(1);
      for (const auto& c : n.children) p = p * eval_term(*c, m);
      return p;
    }
    default:
      throw Error("eval_term: not an integer term");
  }
}

/// Evaluates a Boolean assertion tree under a complete model.
inline bool eval_ast(const AstNode& n, const Assignment& m) {
  switch (n.kind) {
    case AstKind::BoolConst:
      return n.bool_value;
    case AstKind::BoolVar:
      return m.bools.at(n.var);
    case AstKind::Not:
      return !eval_ast(*n.children[0], m);
    case AstKind::And:
      for (const auto& c : n.children)
        if (!eval_ast(*c, m)) return false;
      return true;
    case AstKind::Or:
      for (const auto& c : n.children)
        if (eval_ast(*c, m)) return true;
      return false;
    case AstKind::Implies:
      return !eval_ast(*n.children[0], m) || eval_ast(*n.children[1], m);
    case AstKind::Iff:
      return eval_ast(*n.children[0], m) == eval_ast(*n.children[1], m);
    case AstKind::Distinct: {
      std::vector<Rational> vals;
      for (const auto& c : n.children) vals.push_back(eval_term(*c, m));
      for (std::size_t i = 0; i < vals.size(); ++i)
        for (std::size_t j = i + 1; j < vals.size(); ++j)
          if (vals[i] == vals[j]) return false;
      return true;
    }
    case AstKind::Cmp: {
      int s = (eval_term(*n.children[0], m) - eval_term(*n.children[1], m)).sign();
      switch (n.cmp) {
        case CmpOp::LT: return s < 0;
        case CmpOp::LE: return s <= 0;
        case CmpOp::GT: return s > 0;
        case CmpOp::GE: return s >= 0;
        case CmpOp::EQ: return s == 0;
        case CmpOp::NE: return s != 0;
      }
      return false;
    }
    default:
      throw Error("eval_ast: integer term in Boolean position");
  }
}

inline bool eval_ast(const AstPtr& n, const Assignment& m) { return eval_ast(*n, m); }

/// Inclusive per-variable integer ranges.
struct Box {
  std::vector<std::pair<Int, Int>> ranges;

  static Box uniform(std::size_t n_int, Int bound) {
    return Box{std::vector<std::pair<Int, Int>>(n_int, {-bound, bound})};
  }
};

class SearchSpaceTooLarge : public Error {
 public:
  SearchSpaceTooLarge() : Error("brute force search space exceeds the cap") {}
};

struct BruteForceResult {
  bool in_box_sat = false;
  Assignment model;  // first witness in enumeration order
  std::uint64_t checked_leaves = 0;
};

inline constexpr std::uint64_t kDefaultBruteForceCap = 10'000'000;

namespace detail {

struct Check {
  std::function<bool(const Assignment&)> holds;
  std::vector<std::size_t> positions;  // enumeration positions of its variables
};

// Enumerates Booleans (false < true) then integers (ascending), first
// variable most significant. A check is evaluated as soon as all of its
// variables are fixed, which prunes without changing the witness order.
class Enumerator {
 public:
  Enumerator(std::size_t n_bool, const Box& box, std::vector<Check> checks)
      : n_bool_(n_bool), box_(box) {
    model_.bools.assign(n_bool, false);
    model_.ints.assign(box.ranges.size(), 0);
    due_.assign(n_bool + box.ranges.size() + 1, {});
    for (auto& c : checks) {
      std::size_t at = 0;
      for (auto p : c.positions) at = std::max(at, p + 1);
      due_[at].push_back(std::move(c));
    }
  }

  BruteForceResult run() {
    BruteForceResult r;
    r.in_box_sat = passes(0) && descend(0);
    r.checked_leaves = leaves_;
    if (r.in_box_sat) r.model = model_;
    return r;
  }

 private:
  bool passes(std::size_t depth) {
    for (const auto& c : due_[depth])
      if (!c.holds(model_)) return false;
    return true;
  }

  bool descend(std::size_t pos) {
    std::size_t total = n_bool_ + box_.ranges.size();
    if (pos == total) {
      ++leaves_;
      return true;
    }
    if (pos < n_bool_) {
      for (bool v : {false, true}) {
        model_.bools[pos] = v;
        if (passes(pos + 1) && descend(pos + 1)) return true;
      }
      return false;
    }
    auto [lo, hi] = box_.ranges[pos - n_bool_];
    for (Int v = lo; v <= hi; ++v) {
      model_.ints[pos - n_bool_] = v;
      if (passes(pos + 1) && descend(pos + 1)) return true;
    }
    return false;
  }

  std::size_t n_bool_;
  const Box& box_;
  Assignment model_;
  std::vector<std::vector<Check>> due_;
  std::uint64_t leaves_ = 0;
};

inline void check_space(std::size_t n_bool, const Box& box, std::uint64_t cap) {
  long double size = 1;
  for (std::size_t i = 0; i < n_bool; ++i) size *= 2;
  for (auto [lo, hi] : box.ranges) {
    if (lo > hi) throw Error("empty box range");
    size *= static_cast<long double>(hi - lo) + 1;
  }
  if (size > static_cast<long double>(cap)) throw SearchSpaceTooLarge();
}

inline void collect_vars(const AstNode& n, std::size_t n_bool, std::vector<std::size_t>& out) {
  if (n.kind == AstKind::BoolVar) out.push_back(n.var);
  if (n.kind == AstKind::IntVar) out.push_back(n_bool + n.var);
  for (const auto& c : n.children) collect_vars(*c, n_bool, out);
}

}  // namespace detail

/// Exhaustive search of the original assertion over Booleans x box.
/// InBoxUnsat says nothing about solutions outside the box.
inline BruteForceResult brute_force(const AstPtr& assertion, std::size_t n_bool, const Box& box,
                                    std::uint64_t cap = kDefaultBruteForceCap) {
  detail::check_space(n_bool, box, cap);
  std::vector<AstPtr> conjuncts;
  collect_conjuncts(assertion, conjuncts);
  std::vector<detail::Check> checks;
  for (const auto& c : conjuncts) {
    detail::Check chk;
    detail::collect_vars(*c, n_bool, chk.positions);
    chk.holds = [c](const Assignment& m) { return eval_ast(*c, m); };
    checks.push_back(std::move(chk));
  }
  return detail::Enumerator(n_bool, box, std::move(checks)).run();
}

/// Exhaustive search over the clausal form, auxiliary Booleans included.
inline BruteForceResult brute_force(const Formula& f, const Box& box,
                                    std::uint64_t cap = kDefaultBruteForceCap) {
  detail::check_space(f.n_bool(), box, cap);
  std::vector<detail::Check> checks;
  if (f.has_empty_clause) {
    checks.push_back(detail::Check{[](const Assignment&) { return false; }, {}});
  }
  for (const auto& c : f.clauses) {
    detail::Check chk;
    for (const auto& l : c.literals) {
      if (l.is_bool()) {
        chk.positions.push_back(l.index);
      } else {
        for (auto v : f.atoms[l.index].lhs.variables()) chk.positions.push_back(f.n_bool() + v);
      }
    }
    chk.holds = [&f, &c](const Assignment& m) { return clause_satisfied(f, c, m); };
    checks.push_back(std::move(chk));
  }
  return detail::Enumerator(f.n_bool(), box, std::move(checks)).run();
}

}  // namespace lsia
