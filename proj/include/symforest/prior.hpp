#pragma once

// Split probability, symbolic-tree prior log-density, Dirichlet
// machinery, and prior tree generation (also the GROW proposal draw).

#include <Eigen/Dense>

#include <random>
#include <span>

#include "symforest/expr.hpp"

namespace symforest {

using Rng = std::mt19937_64;

struct SplitRule {
  double alpha = 0.95;   // in (0,1)
  double delta0 = 1.2;   // >= 0
};

// p_m = alpha * (1+m)^(-delta0), monotone nonincreasing in m.
double split_probability(const SplitRule& rule, int m);

// Split probability used by both the prior density and the prior
// sampler: zero at and beyond the depth cap, so nodes at depth
// max_depth are terminal with probability one and the density stays
// normalized on the truncated class.
double effective_split_probability(const SplitRule& rule, int m, int max_depth);

void validate_simplex(const Eigen::VectorXd& w, double tol = 1e-12);
void validate_concentrations(const Eigen::VectorXd& a);

// log-density of a tree whose root sits at absolute depth root_depth,
// under given operator/feature weights and the truncated split rule.
// This is exactly the log-probability that sample_tree_from_prior
// generates the tree, and is the building block of the GROW kernel.
double subtree_log_prob(const SymbolicTree& tree, const OperatorSet& ops,
                        const Eigen::VectorXd& w_op, const Eigen::VectorXd& w_ft,
                        const SplitRule& rule, int max_depth, int root_depth);

// Tree prior log-density. Zero weight at a used operator/feature yields
// -inf. include_root_split_factor drops the depth-0 split factor when
// false; the default keeps it so a bare terminal carries (1 - p_0).
double log_tree_prior(const SymbolicTree& tree, const OperatorSet& ops,
                      const Eigen::VectorXd& w_op, const Eigen::VectorXd& w_ft,
                      const SplitRule& rule, int max_depth,
                      bool include_root_split_factor = true);

// Recursive generation: a node at depth m < max_depth is nonterminal
// with probability p_m (operator from w_op, unary one child, binary
// two); nodes at max_depth are forced terminal; terminals draw a
// feature from w_ft. root_depth offsets the schedule for subtree
// regrows inside GROW proposals.
SymbolicTree sample_tree_from_prior(Rng& rng, const OperatorSet& ops,
                                    const Eigen::VectorXd& w_op, const Eigen::VectorXd& w_ft,
                                    const SplitRule& rule, int max_depth, int root_depth = 0);

// log B(a) = sum_i lgamma(a_i) - lgamma(sum_i a_i).
double log_multivariate_beta(const Eigen::VectorXd& a);

// log B(concentrations + counts); throws std::domain_error on a
// nonpositive concentration or a negative count.
double log_dirichlet_multinomial(const Eigen::VectorXd& concentrations,
                                 const std::vector<int>& counts);

// Shared categorical draw over a weight vector (inverse CDF on one
// uniform); weights must form a simplex. Returns a 0-based index.
int sample_categorical(Rng& rng, const Eigen::VectorXd& weights);

Eigen::VectorXd sample_dirichlet(Rng& rng, const Eigen::VectorXd& concentrations);

}  // namespace symforest
