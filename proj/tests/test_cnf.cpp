#include <gtest/gtest.h>

#include <functional>
#include <optional>
#include <random>
#include <sstream>

#include "lsia/cnf.hpp"
#include "lsia/oracle.hpp"

using namespace lsia;

namespace {

std::size_t aux_count(const Formula& f) { return f.n_bool() - f.n_original_bool; }

// Whether some assignment of the auxiliary Booleans extends the original
// part of `a` to a model of the clauses. Small DPLL with unit propagation.
bool extends(const Formula& f, Assignment a) {
  std::vector<std::optional<bool>> aux(aux_count(f));
  std::function<bool()> solve = [&]() -> bool {
    auto saved = aux;
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& c : f.clauses) {
        bool sat = false;
        std::optional<Literal> open;
        int n_open = 0;
        for (const auto& l : c.literals) {
          if (l.is_bool() && l.index >= f.n_original_bool) {
            auto& v = aux[l.index - f.n_original_bool];
            if (!v) {
              ++n_open;
              open = l;
              continue;
            }
            if (*v == l.positive) sat = true;
          } else if (literal_true(f, l, a)) {
            sat = true;
          }
        }
        if (sat) continue;
        if (n_open == 0) {
          aux = saved;
          return false;
        }
        if (n_open == 1) {
          aux[open->index - f.n_original_bool] = open->positive;
          changed = true;
        }
      }
    }
    for (std::size_t i = 0; i < aux.size(); ++i) {
      if (aux[i]) continue;
      for (bool v : {false, true}) {
        auto before = aux;
        aux[i] = v;
        if (solve()) return true;
        aux = before;
      }
      aux = saved;
      return false;
    }
    return true;
  };
  return solve();
}

class RandomFormula {
 public:
  explicit RandomFormula(std::uint64_t seed) : rng_(seed) {}

  std::string next() {
    std::ostringstream s;
    s << "(declare-fun p0 () Bool)(declare-fun p1 () Bool)(declare-fun p2 () Bool)"
         "(declare-fun x0 () Int)(declare-fun x1 () Int)(declare-fun x2 () Int)\n";
    s << "(assert " << node(4) << ")\n";
    return s.str();
  }

 private:
  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  std::string num(int v) { return v < 0 ? "(- " + std::to_string(-v) + ")" : std::to_string(v); }

  std::string term() {
    std::string t = "(+";
    for (int i = pick(1, 2); i > 0; --i) {
      t += " (* " + num(pick(-3, 3)) + " x" + std::to_string(pick(0, 2));
      if (pick(0, 4) == 0) t += " x" + std::to_string(pick(0, 2));
      t += ")";
    }
    return t + ")";
  }

  std::string atom() {
    if (pick(0, 2) == 0) return "p" + std::to_string(pick(0, 2));
    static const char* ops[] = {"<=", "<", ">=", ">", "=", "distinct"};
    return std::string("(") + ops[pick(0, 5)] + " " + term() + " " + num(pick(-5, 5)) + ")";
  }

  std::string node(int depth) {
    if (depth == 0 || pick(0, 3) == 0) return atom();
    switch (pick(0, 6)) {
      case 0: return "(not " + node(depth - 1) + ")";
      case 1: return "(=> " + node(depth - 1) + " " + node(depth - 1) + ")";
      case 2: return "(= " + node(depth - 1) + " " + node(depth - 1) + ")";
      case 3: return "(xor " + node(depth - 1) + " " + node(depth - 1) + ")";
      case 4: return "(and " + node(depth - 1) + " " + node(depth - 1) + " " + node(depth - 1) + ")";
      default: return "(or " + node(depth - 1) + " " + node(depth - 1) + ")";
    }
  }

  std::mt19937_64 rng_;
};

}  // namespace

TEST(ToCnf, ClausalInputNeedsNoAuxiliaries) {
  auto f = load_formula(
      "(declare-fun p1 () Bool)(declare-fun p2 () Bool)"
      "(declare-fun x1 () Int)(declare-fun x2 () Int)(declare-fun x3 () Int)"
      "(declare-fun x4 () Int)(declare-fun x5 () Int)"
      "(assert (and (or p1 (<= (+ x1 (* 2 x2)) 2))"
      "             (or p2 (= (+ (* 3 x3) (* 4 x4) (* 5 x5)) 2) (<= (- (- x2) x3) 3))))");
  EXPECT_EQ(aux_count(f), 0u);
  ASSERT_EQ(f.clauses.size(), 2u);
  EXPECT_EQ(f.clauses[0].n_bool, 1u);
  EXPECT_EQ(f.clauses[0].n_int, 1u);
  EXPECT_EQ(f.clauses[1].n_bool, 1u);
  EXPECT_EQ(f.clauses[1].n_int, 2u);
  EXPECT_EQ(f.theory, Theory::LIA);
  ASSERT_TRUE(f.original_ast);
}

TEST(ToCnf, DisequalitySplicesIntoClause) {
  auto f = load_formula(
      "(declare-fun p () Bool)(declare-fun x () Int)(assert (or p (distinct x 0)))");
  ASSERT_EQ(f.clauses.size(), 1u);
  EXPECT_EQ(f.clauses[0].literals.size(), 3u);
  EXPECT_EQ(aux_count(f), 0u);
}

TEST(ToCnf, TopLevelDistinctIsPairwise) {
  auto f = load_formula(
      "(declare-fun x () Int)(declare-fun y () Int)(declare-fun z () Int)"
      "(assert (distinct x y z))");
  EXPECT_EQ(f.clauses.size(), 3u);
  for (const auto& c : f.clauses) EXPECT_EQ(c.literals.size(), 2u);
}

TEST(ToCnf, NestedStructureGetsDefinitions) {
  auto f = load_formula(
      "(declare-fun p () Bool)(declare-fun q () Bool)(declare-fun x () Int)"
      "(assert (or (and p q) (and (not p) (> x 3))))");
  EXPECT_EQ(aux_count(f), 2u);
  // Each And definition contributes 3 clauses plus the top clause.
  EXPECT_EQ(f.clauses.size(), 7u);
}

TEST(ToCnf, ConstantComparisonsFold) {
  auto f = load_formula(
      "(declare-fun x () Int)(declare-fun p () Bool)"
      "(assert (or p (< 1 0)))(assert (or (<= (- x x) 3) p))");
  ASSERT_EQ(f.clauses.size(), 1u);
  EXPECT_EQ(f.clauses[0].literals.size(), 1u);
  auto g = load_formula("(declare-fun x () Int)(assert (> (- x x) 1))");
  EXPECT_TRUE(g.has_empty_clause);
}

TEST(ToCnf, RationalCoefficientsAreCleared) {
  auto f = load_formula("(declare-fun x () Int)(declare-fun y () Int)"
                        "(assert (<= (+ (* 0.5 x) (* (/ 1 3) y)) 1))");
  ASSERT_EQ(f.atoms.size(), 1u);
  const auto& a = f.atoms[0];
  EXPECT_EQ(a.lhs.terms[0].coeff, 3);
  EXPECT_EQ(a.lhs.terms[1].coeff, 2);
  EXPECT_EQ(a.rhs, 6);
}

TEST(ToCnf, GcdReductionCanBeDisabled) {
  const char* text = "(declare-fun x () Int)(declare-fun y () Int)(declare-fun p () Bool)"
                     "(assert (or p (<= (+ (* 4 x) (* 6 y)) 7)))";
  auto on = load_formula(text);
  auto off = load_formula(text, CnfOptions{false});
  EXPECT_EQ(on.atoms[0].rhs, 3);
  EXPECT_EQ(off.atoms[0].rhs, 7);
  EXPECT_EQ(off.atoms[0].lhs.terms[0].coeff, 4);
}

TEST(ToCnf, ProjectionEquivalentOnRandomFormulas) {
  RandomFormula gen(7);
  int sat = 0;
  for (int i = 0; i < 200; ++i) {
    std::string text = gen.next();
    Script s = parse_script(text);
    Formula f = to_cnf(s);
    Box box = Box::uniform(3, 5);
    Assignment a;
    a.bools.assign(f.n_bool(), false);
    a.ints.assign(3, 0);
    bool any_ast = false, any_cnf = false;
    for (int m = 0; m < 8; ++m) {
      for (int b = 0; b < 3; ++b) a.bools[b] = (m >> b) & 1;
      for (Int x0 = -5; x0 <= 5; ++x0)
        for (Int x1 = -5; x1 <= 5; ++x1)
          for (Int x2 = -5; x2 <= 5; ++x2) {
            a.ints = {x0, x1, x2};
            Assignment orig{std::vector<bool>(a.bools.begin(), a.bools.begin() + 3), a.ints};
            bool by_ast = eval_ast(s.assertion, orig);
            bool by_cnf = !f.has_empty_clause && extends(f, a);
            ASSERT_EQ(by_ast, by_cnf) << text;
            any_ast = any_ast || by_ast;
            any_cnf = any_cnf || by_cnf;
          }
    }
    auto oracle = brute_force(s.assertion, 3, box);
    EXPECT_EQ(oracle.in_box_sat, any_ast) << text;
    sat += any_ast;
  }
  // Both outcomes must be exercised.
  EXPECT_GT(sat, 20);
  EXPECT_LT(sat, 200);
}

TEST(DetectBounds, FromUnitClauses) {
  auto f = load_formula(
      "(declare-fun a () Int)(declare-fun b () Int)(declare-fun c () Int)(declare-fun d () Int)"
      "(declare-fun e () Int)"
      "(assert (<= a 5))(assert (>= a (- 3)))"
      "(assert (> b 2))"
      "(assert (= c 4))"
      "(assert (<= (* 2 d) 5))(assert (>= (* (- 3) d) 7))"
      "(assert (or (<= e 1) (>= e 9)))");
  EXPECT_EQ(f.bounds[0].lb, -3);
  EXPECT_EQ(f.bounds[0].ub, 5);
  EXPECT_EQ(f.bounds[1].lb, 3);
  EXPECT_FALSE(f.bounds[1].ub);
  EXPECT_EQ(f.bounds[2].lb, 4);
  EXPECT_EQ(f.bounds[2].ub, 4);
  EXPECT_FALSE(f.bounds[3].lb);
  EXPECT_EQ(f.bounds[3].ub, -3);
  EXPECT_FALSE(f.bounds[4].lb);
  EXPECT_FALSE(f.bounds[4].ub);
  EXPECT_FALSE(f.contradictory_bounds);
}

TEST(DetectBounds, Contradictions) {
  EXPECT_TRUE(load_formula("(declare-fun x () Int)(assert (<= x 0))(assert (> x 0))")
                  .contradictory_bounds);
  EXPECT_TRUE(load_formula("(declare-fun x () Int)(assert (= (* 2 x) 3))").contradictory_bounds);
  EXPECT_TRUE(load_formula("(declare-fun x () Int)(assert (= x 1))(assert (= x 2))")
                  .contradictory_bounds);
}

TEST(DetectBounds, IgnoresNonUnitAndMultiVariableAtoms) {
  auto f = load_formula("(declare-fun x () Int)(declare-fun y () Int)"
                        "(assert (<= (+ x y) 3))(assert (<= (* x x) 4))");
  EXPECT_FALSE(f.bounds[0].ub);
  EXPECT_FALSE(f.bounds[1].ub);
}
