#pragma once

// Predictive and structural evaluation: RMSE and minimum edit distance
// of a learned forest against a ground-truth expression.

#include <Eigen/Dense>

#include <vector>

#include "symforest/expr.hpp"

namespace symforest {

// (n^-1 sum (y_i - y_hat_i)^2)^(1/2); throws on empty or mismatched input.
double rmse(const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat);

// Exact edit distance between canonical_ordered(a) and
// canonical_ordered(b) as rooted ordered labeled trees with unit
// insert/delete/relabel costs (Zhang-Shasha). Terminals are labeled by
// feature name, so the trees may live over different feature counts.
int tree_edit_distance(const SymbolicTree& a, const OperatorSet& ops_a, const SymbolicTree& b,
                       const OperatorSet& ops_b);

// min over trees of tree_edit_distance to the truth.
int mged(const std::vector<SymbolicTree>& forest, const OperatorSet& ops,
         const SymbolicTree& truth, const OperatorSet& truth_ops);

}  // namespace symforest
