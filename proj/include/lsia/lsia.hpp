#pragma once

#include "lsia/integer.hpp"
#include "lsia/ast.hpp"
#include "lsia/formula.hpp"
#include "lsia/parser.hpp"
#include "lsia/cnf.hpp"
#include "lsia/oracle.hpp"
#include "lsia/state.hpp"
#include "lsia/tabu.hpp"
#include "lsia/operators.hpp"
#include "lsia/search.hpp"
