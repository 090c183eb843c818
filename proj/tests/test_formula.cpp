#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "lsia/formula.hpp"

using namespace lsia;

namespace {

RawTerm raw(Int c, std::vector<VarIndex> vars) {
  RawTerm t{c, {}};
  for (auto v : vars) t.factors.push_back(Factor{v, 1});
  return t;
}

Polynomial poly(std::vector<RawTerm> terms) {
  auto n = normalize_polynomial(terms);
  EXPECT_EQ(n.offset, 0);
  return n.poly;
}

// Naive evaluation of raw terms, independent of canonicalization.
Int eval_raw(const std::vector<RawTerm>& terms, const std::vector<Int>& v) {
  Int s = 0;
  for (const auto& t : terms) {
    Int p = t.coeff;
    for (const auto& f : t.factors)
      for (std::uint32_t e = 0; e < f.exponent; ++e) p *= v[f.var];
    s += p;
  }
  return s;
}

std::vector<RawTerm> random_raw(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> n_terms(1, 6), coeff(-6, 6), var(0, 3), len(0, 3);
  std::vector<RawTerm> terms;
  for (int i = n_terms(rng); i > 0; --i) {
    RawTerm t{coeff(rng), {}};
    for (int j = len(rng); j > 0; --j)
      t.factors.push_back(Factor{static_cast<VarIndex>(var(rng)), 1});
    terms.push_back(t);
  }
  return terms;
}

bool holds(const AtomicConstraint& a, bool positive, const std::vector<Int>& v) {
  return literal_holds(a.relation, positive, a.delta(v));
}

}  // namespace

TEST(NormalizePolynomial, MergesLikeTerms) {
  auto n = normalize_polynomial(std::vector<RawTerm>{raw(2, {0}), raw(3, {0})});
  ASSERT_EQ(n.poly.terms.size(), 1u);
  EXPECT_EQ(n.poly.terms[0].coeff, 5);
  EXPECT_EQ(n.poly.terms[0].mono, Monomial::variable(0));
  EXPECT_EQ(n.offset, 0);
}

TEST(NormalizePolynomial, SortsAndMergesFactors) {
  // x*y*x -> x^2 y
  auto n = normalize_polynomial(std::vector<RawTerm>{raw(1, {0, 1, 0})});
  ASSERT_EQ(n.poly.terms.size(), 1u);
  const auto& f = n.poly.terms[0].mono.factors();
  ASSERT_EQ(f.size(), 2u);
  EXPECT_EQ(f[0], (Factor{0, 2}));
  EXPECT_EQ(f[1], (Factor{1, 1}));
}

TEST(NormalizePolynomial, TotalCancellation) {
  auto n = normalize_polynomial(
      std::vector<RawTerm>{raw(4, {}), raw(2, {0}), raw(-4, {}), raw(-2, {0})});
  EXPECT_TRUE(n.poly.empty());
  EXPECT_EQ(n.offset, 0);
}

TEST(NormalizePolynomial, ConstantBecomesOffset) {
  auto n = normalize_polynomial(std::vector<RawTerm>{raw(7, {}), raw(1, {2})});
  EXPECT_EQ(n.offset, 7);
  EXPECT_EQ(n.poly.terms.size(), 1u);
}

TEST(NormalizePolynomial, IdempotentAndGradedLexSorted) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 500; ++i) {
    auto terms = random_raw(rng);
    auto once = normalize_polynomial(terms);
    std::vector<RawTerm> again;
    for (const auto& t : once.poly.terms) again.push_back(RawTerm{t.coeff, t.mono.factors()});
    auto twice = normalize_polynomial(again);
    EXPECT_EQ(once.poly, twice.poly);
    EXPECT_EQ(twice.offset, 0);
    for (std::size_t j = 1; j < once.poly.terms.size(); ++j) {
      EXPECT_TRUE(once.poly.terms[j - 1].mono < once.poly.terms[j].mono);
      EXPECT_LE(once.poly.terms[j - 1].mono.degree(), once.poly.terms[j].mono.degree());
    }
    for (const auto& t : once.poly.terms) EXPECT_NE(t.coeff, 0);
  }
}

TEST(NormalizePolynomial, EvaluationMatchesRawTerms) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<Int> val(-9, 9);
  for (int i = 0; i < 500; ++i) {
    auto terms = random_raw(rng);
    auto n = normalize_polynomial(terms);
    std::vector<Int> v(4);
    for (auto& x : v) x = val(rng);
    EXPECT_EQ(n.poly.evaluate(v) + n.offset, eval_raw(terms, v));
  }
}

TEST(NormalizeAtom, StrictLessThan) {
  Polynomial p = poly({raw(1, {0}), raw(2, {1})});
  auto r = normalize_atom(p, CmpOp::LT, 3);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].atom.lhs, p);
  EXPECT_EQ(r[0].atom.relation, Relation::LE);
  EXPECT_EQ(r[0].atom.rhs, 2);
  EXPECT_TRUE(r[0].positive);
}

TEST(NormalizeAtom, GreaterOrEqualNegatesBothSides) {
  Polynomial p = poly({raw(1, {0})});
  auto r = normalize_atom(p, CmpOp::GE, 5);
  ASSERT_EQ(r.size(), 1u);
  ASSERT_EQ(r[0].atom.lhs.terms.size(), 1u);
  EXPECT_EQ(r[0].atom.lhs.terms[0].coeff, -1);
  EXPECT_EQ(r[0].atom.rhs, -5);
  EXPECT_TRUE(r[0].positive);
}

TEST(NormalizeAtom, GreaterThanIsNegatedLe) {
  auto r = normalize_atom(poly({raw(1, {0})}), CmpOp::GT, 0);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].atom.relation, Relation::LE);
  EXPECT_EQ(r[0].atom.rhs, 0);
  EXPECT_FALSE(r[0].positive);
}

TEST(NormalizeAtom, NotEqualBecomesDisjunction) {
  auto r = normalize_atom(poly({raw(1, {0})}), CmpOp::NE, 0);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].atom.rhs, -1);
  EXPECT_TRUE(r[0].positive);
  EXPECT_EQ(r[1].atom.rhs, 0);
  EXPECT_FALSE(r[1].positive);
}

TEST(NormalizeAtom, PreservesTruthOnRandomPoints) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<Int> val(-6, 6), k(-12, 12);
  const CmpOp ops[] = {CmpOp::LT, CmpOp::LE, CmpOp::GT, CmpOp::GE, CmpOp::EQ, CmpOp::NE};
  for (int i = 0; i < 2000; ++i) {
    auto terms = random_raw(rng);
    auto n = normalize_polynomial(terms);
    if (n.poly.empty()) continue;
    CmpOp op = ops[i % 6];
    Int kk = k(rng);
    auto atoms = normalize_atom(n.poly, op, kk - n.offset, i % 2 == 0);
    std::vector<Int> v(4);
    for (auto& x : v) x = val(rng);
    Int lhs = eval_raw(terms, v);
    bool expect = op == CmpOp::LT   ? lhs < kk
                  : op == CmpOp::LE ? lhs <= kk
                  : op == CmpOp::GT ? lhs > kk
                  : op == CmpOp::GE ? lhs >= kk
                  : op == CmpOp::EQ ? lhs == kk
                                    : lhs != kk;
    bool got = false;
    for (const auto& a : atoms) got = got || holds(a.atom, a.positive, v);
    EXPECT_EQ(got, expect);
  }
}

TEST(GcdReduce, LeFloorsTheConstant) {
  AtomicConstraint a{poly({raw(4, {0}), raw(6, {1})}), Relation::LE, 7};
  auto r = gcd_reduce(a);
  EXPECT_EQ(r.lhs.terms[0].coeff, 2);
  EXPECT_EQ(r.lhs.terms[1].coeff, 3);
  EXPECT_EQ(r.rhs, 3);
  AtomicConstraint b{poly({raw(4, {0})}), Relation::LE, -7};
  EXPECT_EQ(gcd_reduce(b).rhs, -2);
}

TEST(GcdReduce, EqIncludesTheConstant) {
  AtomicConstraint a{poly({raw(4, {0}), raw(6, {1})}), Relation::EQ, 7};
  EXPECT_EQ(gcd_reduce(a), a);
  AtomicConstraint b{poly({raw(4, {0}), raw(6, {1})}), Relation::EQ, 8};
  auto r = gcd_reduce(b);
  EXPECT_EQ(r.rhs, 4);
  EXPECT_EQ(r.lhs.terms[0].coeff, 2);
}

TEST(GcdReduce, PreservesIntegerSolutions) {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<Int> c(-4, 4), val(-8, 8), k(-30, 30);
  for (int i = 0; i < 300; ++i) {
    Int g = std::uniform_int_distribution<Int>(1, 6)(rng);
    std::vector<RawTerm> terms;
    for (VarIndex v = 0; v < 3; ++v) terms.push_back(raw(g * c(rng), {v}));
    auto n = normalize_polynomial(terms);
    if (n.poly.empty()) continue;
    for (auto rel : {Relation::LE, Relation::EQ}) {
      AtomicConstraint a{n.poly, rel, k(rng)};
      auto r = gcd_reduce(a);
      for (int j = 0; j < 100; ++j) {
        std::vector<Int> v{val(rng), val(rng), val(rng)};
        for (bool pos : {true, false}) EXPECT_EQ(holds(a, pos, v), holds(r, pos, v));
      }
    }
  }
}

TEST(Distance, DttPerLiteralForm) {
  EXPECT_EQ(distance_to_truth(Relation::LE, true, 5), 5);
  EXPECT_EQ(distance_to_truth(Relation::LE, true, -2), 0);
  EXPECT_EQ(distance_to_truth(Relation::LE, false, -2), 3);
  EXPECT_EQ(distance_to_truth(Relation::LE, false, 1), 0);
  EXPECT_EQ(distance_to_truth(Relation::EQ, true, 4), 1);
  EXPECT_EQ(distance_to_truth(Relation::EQ, true, 0), 0);
  EXPECT_EQ(distance_to_truth(Relation::EQ, false, 0), 1);
}

TEST(ClassifyTheory, LinearFormula) {
  FormulaBuilder b;
  auto p1 = b.add_bool_var("p1");
  b.add_int_var("x1");
  b.add_int_var("x2");
  auto atom = normalize_atom(poly({raw(1, {0}), raw(2, {1})}), CmpOp::LE, 2);
  b.add_clause({FormulaBuilder::bool_literal(p1), b.literal(atom[0])});
  auto f = b.build();
  EXPECT_EQ(f.theory, Theory::LIA);
}

TEST(ClassifyTheory, NonlinearFormulaRecordsDegree) {
  FormulaBuilder b;
  for (int i = 0; i < 3; ++i) b.add_int_var("x" + std::to_string(i + 3));
  // 3 x3^2 x4 + 4 x4 + 5 x5 = 2
  auto p = poly({raw(3, {0, 0, 1}), raw(4, {1}), raw(5, {2})});
  b.add_clause({b.literal(normalize_atom(p, CmpOp::EQ, 2)[0])});
  auto f = b.build();
  EXPECT_EQ(f.theory, Theory::NIA);
  EXPECT_EQ(f.max_degree[0], 2u);
  EXPECT_EQ(f.max_degree[1], 1u);
}

TEST(ClassifyTheory, BooleanOnlyIsLinear) {
  FormulaBuilder b;
  auto p = b.add_bool_var("p");
  b.add_clause({FormulaBuilder::bool_literal(p)});
  EXPECT_EQ(b.build().theory, Theory::LIA);
}

TEST(Builder, DeduplicatesAndDropsTautologies) {
  FormulaBuilder b;
  auto p = b.add_bool_var("p");
  auto q = b.add_bool_var("q");
  b.add_clause({FormulaBuilder::bool_literal(p), FormulaBuilder::bool_literal(p),
                FormulaBuilder::bool_literal(q, false)});
  b.add_clause({FormulaBuilder::bool_literal(p), FormulaBuilder::bool_literal(p, false)});
  auto f = b.build();
  ASSERT_EQ(f.clauses.size(), 1u);
  EXPECT_EQ(f.clauses[0].literals.size(), 2u);
  EXPECT_EQ(f.clauses[0].n_bool, 2u);
  EXPECT_EQ(f.dropped_tautologies, 1u);
}

TEST(Builder, InternsEqualAtomsOnce) {
  FormulaBuilder b;
  b.add_int_var("x");
  auto a1 = normalize_atom(poly({raw(2, {0})}), CmpOp::LE, 4);
  auto a2 = normalize_atom(poly({raw(1, {0})}), CmpOp::LE, 2);
  EXPECT_EQ(b.literal(a1[0]), b.literal(a2[0]));
  b.add_clause({b.literal(a1[0])});
  auto f = b.build();
  EXPECT_EQ(f.atoms.size(), 1u);
  EXPECT_EQ(f.occ.atom_clauses[0], std::vector<std::uint32_t>{0});
  EXPECT_EQ(f.occ.int_var_atoms[0], std::vector<std::uint32_t>{0});
}

TEST(Builder, EmptyClauseIsFlagged) {
  FormulaBuilder b;
  b.add_clause({});
  EXPECT_TRUE(b.build().has_empty_clause);
}
