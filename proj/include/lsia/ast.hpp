#pragma once

// Let-free assertion tree produced by the SMT-LIB front end. Kept alongside
// the clausal formula so models can be checked against the original input.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "lsia/integer.hpp"

namespace lsia {

enum class Sort : std::uint8_t { Bool, Int };

enum class AstKind : std::uint8_t {
  // Boolean structure
  BoolConst,
  BoolVar,
  Not,
  And,
  Or,
  Implies,
  Iff,
  Distinct,  // over integer terms
  Cmp,
  // integer terms
  IntConst,
  IntVar,
  Add,
  Sub,
  Mul,
  Neg,
};

enum class CmpOp : std::uint8_t { LT, LE, GT, GE, EQ, NE };

struct AstNode;
using AstPtr = std::shared_ptr<const AstNode>;

struct AstNode {
  AstKind kind = AstKind::BoolConst;
  bool bool_value = false;
  Rational value;      // IntConst; rational constants are allowed as coefficients
  std::uint32_t var = 0;  // BoolVar / IntVar index (per sort, declaration order)
  CmpOp cmp = CmpOp::EQ;
  std::vector<AstPtr> children;

  Sort sort() const {
    switch (kind) {
      case AstKind::IntConst:
      case AstKind::IntVar:
      case AstKind::Add:
      case AstKind::Sub:
      case AstKind::Mul:
      case AstKind::Neg:
        return Sort::Int;
      default:
        return Sort::Bool;
    }
  }
};

namespace ast {

inline AstPtr make(AstKind kind, std::vector<AstPtr> children = {}) {
  auto n = std::make_shared<AstNode>();
  n->kind = kind;
  n->children = std::move(children);
  return n;
}

inline AstPtr bool_const(bool v) {
  auto n = std::make_shared<AstNode>();
  n->kind = AstKind::BoolConst;
  n->bool_value = v;
  return n;
}

inline AstPtr int_const(Rational v) {
  auto n = std::make_shared<AstNode>();
  n->kind = AstKind::IntConst;
  n->value = v;
  return n;
}

inline AstPtr bool_var(std::uint32_t index) {
  auto n = std::make_shared<AstNode>();
  n->kind = AstKind::BoolVar;
  n->var = index;
  return n;
}

inline AstPtr int_var(std::uint32_t index) {
  auto n = std::make_shared<AstNode>();
  n->kind = AstKind::IntVar;
  n->var = index;
  return n;
}

inline AstPtr cmp(CmpOp op, AstPtr lhs, AstPtr rhs) {
  auto n = std::make_shared<AstNode>();
  n->kind = AstKind::Cmp;
  n->cmp = op;
  n->children = {std::move(lhs), std::move(rhs)};
  return n;
}

inline AstPtr negate(AstPtr a) { return make(AstKind::Not, {std::move(a)}); }

}  // namespace ast

/// Top-level conjuncts of an assertion tree (nested Ands flattened).
inline void collect_conjuncts(const AstPtr& node, std::vector<AstPtr>& out) {
  if (node->kind == AstKind::And) {
    for (const auto& c : node->children) collect_conjuncts(c, out);
  } else {
    out.push_back(node);
  }
}

}  // namespace lsia
