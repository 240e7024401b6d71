#ifndef DPDT_DPDT_HPP
#define DPDT_DPDT_HPP

// Dynamic-programming decision trees: tree induction as a finite-horizon MDP
// over data subsets, solved by backward induction.

#include "dpdt/dataset.hpp"
#include "dpdt/tree.hpp"
#include "dpdt/greedy.hpp"
#include "dpdt/splitgen.hpp"
#include "dpdt/solver.hpp"
#include "dpdt/boosting.hpp"

#endif  // DPDT_DPDT_HPP
